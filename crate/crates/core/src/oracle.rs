//! Exhaustive reference computations for small instances.
//!
//! [`brute_force_optimal_regret`] searches strategies on the arena directly,
//! playing every environment in lockstep, and shares no code with the
//! reweighting/value-iteration pipeline of the solver beyond the arena
//! itself and cheapest-path costs of concrete environments.

use std::collections::{BTreeMap, HashMap};

use crate::arena::{Arena, Vertex, VertexId};
use crate::cost::ExtCost;
use crate::error::{Error, Result};
use crate::exec::execute;
use crate::formula::Dfa;
use crate::model::knowledge::{env_choices, MAX_ENUM_UNKNOWNS};
use crate::model::product::optimal_cost;
use crate::model::Pkwts;
use crate::solver::{best_response, BrMode};
use crate::strategy::{Controller, Decision, DecisionKey, Objective, Strategy};

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_vertices: usize,
    pub max_unknowns: usize,
    /// Budget on search nodes.
    pub max_nodes: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_vertices: 2000, max_unknowns: 3, max_nodes: 10_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: ExtCost,
    /// A strategy attaining `value`, when one exists.
    pub strategy: Option<Strategy>,
    /// Complete winning strategies evaluated.
    pub evaluated: u64,
    pub nodes: u64,
}

/// What a strategy is allowed to remember.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Memory {
    /// Decisions depend on the current agent vertex.
    Positional,
    /// Decisions also depend on the previous agent vertex.
    Lookback,
}

enum Status {
    Done(u64),
    Need(u64, (VertexId, VertexId)),
    Loop,
}

struct Search<'a> {
    arena: &'a Arena,
    m: &'a Pkwts,
    envs: Vec<Vec<usize>>,
    opt: Vec<u64>,
    memory: Memory,
    assign: HashMap<(VertexId, VertexId), VertexId>,
    best: Option<(u64, HashMap<(VertexId, VertexId), VertexId>)>,
    evaluated: u64,
    nodes: u64,
    max_nodes: u64,
    stamp: Vec<u64>,
    epoch: u64,
}

const NONE: VertexId = usize::MAX;

impl Search<'_> {
    fn key(&self, prev: VertexId, v: VertexId) -> (VertexId, VertexId) {
        match self.memory {
            Memory::Positional => (NONE, v),
            Memory::Lookback => (prev, v),
        }
    }

    /// Follows the current partial assignment in environment `i`.
    fn simulate(&mut self, i: usize) -> Status {
        let mut prev = NONE;
        let mut v = self.arena.initial();
        let mut cost = 0;
        self.epoch += 1;
        let mut seen: Vec<(VertexId, VertexId)> = Vec::new();
        loop {
            // Stopping on the first final vertex is never worse than
            // continuing, so the search only considers stopping there.
            if self.arena.is_final(v) {
                return Status::Done(cost);
            }
            let key = self.key(prev, v);
            match self.memory {
                Memory::Positional => {
                    if self.stamp[v] == self.epoch {
                        return Status::Loop;
                    }
                    self.stamp[v] = self.epoch;
                }
                Memory::Lookback => {
                    if seen.contains(&key) {
                        return Status::Loop;
                    }
                    seen.push(key);
                }
            }
            let Some(&e) = self.assign.get(&key) else {
                return Status::Need(cost, key);
            };
            let (t, w) = self.arena.env_response(self.m, e, &self.envs[i]);
            cost += w;
            prev = v;
            v = t;
        }
    }

    fn dfs(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::SearchSpaceTooLarge(format!("more than {} search nodes", self.max_nodes)));
        }
        let mut lower = 0u64;
        let mut need = None;
        for i in 0..self.envs.len() {
            match self.simulate(i) {
                Status::Loop => return Ok(()),
                Status::Done(c) => lower = lower.max(c - self.opt[i]),
                Status::Need(c, key) => {
                    lower = lower.max(c.saturating_sub(self.opt[i]));
                    need.get_or_insert(key);
                }
            }
        }
        if self.best.as_ref().is_some_and(|(b, _)| lower >= *b) {
            return Ok(());
        }
        let Some(key) = need else {
            self.evaluated += 1;
            self.best = Some((lower, self.assign.clone()));
            return Ok(());
        };
        let options: Vec<VertexId> = self.arena.successors(key.1).iter().map(|&(e, _)| e).collect();
        for e in options {
            self.assign.insert(key, e);
            self.dfs()?;
        }
        self.assign.remove(&key);
        Ok(())
    }
}

/// Minimal regret over all strategies of the given memory kind, by
/// exhaustive branch-and-bound search.
pub fn brute_force_with(m: &Pkwts, a: &Dfa, limits: OracleLimits, memory: Memory) -> Result<OracleResult> {
    let unknown = m.unknown_states().len();
    if unknown > limits.max_unknowns {
        return Err(Error::SearchSpaceTooLarge(format!("{unknown} unknown states (limit {})", limits.max_unknowns)));
    }
    let arena = Arena::build_capped(m, a, limits.max_vertices + 1)
        .map_err(|_| Error::SearchSpaceTooLarge(format!("arena exceeds {} vertices", limits.max_vertices)))?;
    if arena.num_vertices() > limits.max_vertices {
        return Err(Error::SearchSpaceTooLarge(format!("arena exceeds {} vertices", limits.max_vertices)));
    }
    let envs = env_choices(m, MAX_ENUM_UNKNOWNS)?;
    let mut opt = Vec::with_capacity(envs.len());
    for c in &envs {
        match optimal_cost(&m.env(c), a)? {
            ExtCost::Finite(o) => opt.push(o),
            // Some environment cannot satisfy the task at all.
            ExtCost::Infinite => {
                return Ok(OracleResult { value: ExtCost::Infinite, strategy: None, evaluated: 0, nodes: 0 });
            }
        }
    }
    let n = arena.num_vertices();
    let mut s = Search {
        arena: &arena,
        m,
        envs,
        opt,
        memory,
        assign: HashMap::new(),
        best: None,
        evaluated: 0,
        nodes: 0,
        max_nodes: limits.max_nodes,
        stamp: vec![0; n],
        epoch: 0,
    };
    s.dfs()?;
    let (evaluated, nodes) = (s.evaluated, s.nodes);
    let Some((value, assign)) = s.best else {
        return Ok(OracleResult { value: ExtCost::Infinite, strategy: None, evaluated, nodes });
    };
    let strategy = match memory {
        Memory::Positional => Some(positional_strategy(&arena, &assign, a, value)),
        Memory::Lookback => None,
    };
    Ok(OracleResult { value: ExtCost::Finite(value), strategy, evaluated, nodes })
}

fn positional_strategy(arena: &Arena, assign: &HashMap<(VertexId, VertexId), VertexId>, a: &Dfa, value: u64) -> Strategy {
    let mut decisions = BTreeMap::new();
    let key_of = |v: VertexId| {
        let Vertex::Agent { x, q, k } = arena.vertex(v) else { unreachable!() };
        DecisionKey { x, q, k: arena.knowledge(k).clone() }
    };
    for (&(_, v), &e) in assign {
        let Vertex::Env { next, .. } = arena.vertex(e) else { unreachable!() };
        decisions.insert(key_of(v), Decision::Go(next));
    }
    for f in arena.finals() {
        decisions.insert(key_of(f), Decision::Stop);
    }
    Strategy {
        objective: Objective::Regret,
        task: String::new(),
        atoms: a.atoms().to_vec(),
        value: ExtCost::Finite(value),
        decisions,
    }
}

/// Minimal regret over positional strategies with default limits.
pub fn brute_force_optimal_regret(m: &Pkwts, a: &Dfa) -> Result<OracleResult> {
    brute_force_with(m, a, OracleLimits::default(), Memory::Positional)
}

/// One environment's row of the decomposition check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionRow {
    pub choice: Vec<usize>,
    pub cost: u64,
    pub optimum: u64,
    pub regret: u64,
    /// Hindsight cost given the knowledge at the end of the run.
    pub br_final: u64,
    /// `cost - br_final`.
    pub bound: u64,
}

#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub rows: Vec<DecompositionRow>,
    /// Every row has `regret <= bound`.
    pub bounded: bool,
    /// Some row has `regret == bound`.
    pub tight_somewhere: bool,
    /// `max regret == max bound`.
    pub maxima_agree: bool,
}

impl DecompositionReport {
    pub fn holds(&self) -> bool {
        self.bounded && self.tight_somewhere && self.maxima_agree
    }
}

/// Compares per-environment regret with `cost - br(K_final)`.
///
/// The hindsight cost only knows what the run revealed, so it is at most
/// the environment's own optimum; hence each environment's regret is
/// bounded by `cost - br(K_final)`, and the environment attaining `br` among
/// those sharing the final knowledge meets the bound. Taking maxima, the
/// strategy's regret equals the largest `cost - br(K_final)`.
pub fn check_decomposition(ctrl: &mut dyn Controller, m: &Pkwts, a: &Dfa) -> Result<DecompositionReport> {
    let mut rows = Vec::new();
    for choice in env_choices(m, MAX_ENUM_UNKNOWNS)? {
        let t = m.env(&choice);
        let rec = execute(ctrl, m, a, &t)?;
        if !rec.satisfied {
            return Err(Error::Invariant(format!("strategy fails the task in environment {choice:?}")));
        }
        let optimum = optimal_cost(&t, a)?.unwrap();
        let br_final = best_response(m, a, &rec.knowledge_final, BrMode::Exact)?.unwrap();
        rows.push(DecompositionRow {
            choice,
            cost: rec.cost,
            optimum,
            regret: rec.cost - optimum,
            br_final,
            bound: rec.cost - br_final,
        });
    }
    let bounded = rows.iter().all(|r| r.regret <= r.bound);
    let tight_somewhere = rows.iter().any(|r| r.regret == r.bound);
    let maxima_agree = rows.iter().map(|r| r.regret).max() == rows.iter().map(|r| r.bound).max();
    Ok(DecompositionReport { rows, bounded, tight_somewhere, maxima_agree })
}
