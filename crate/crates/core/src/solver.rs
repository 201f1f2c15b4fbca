//! Strategy synthesis on the arena.
//!
//! Regret minimization reweights the arena: moves that leave every shortest
//! path to a final vertex become infinitely expensive, and the move that
//! reaches a final vertex `v` is charged `d(v) - br(K_v)`, the gap between
//! the cheapest arena cost of reaching `v` and the best cost achievable in
//! hindsight with the knowledge gathered on the way. A min-max game over
//! these weights is then solved by value iteration. The worst-case
//! objective runs the same game on the original weights.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::arena::{Arena, KnowledgeId, Reversed, Vertex, VertexId, DEFAULT_ARENA_CAP};
use crate::cost::ExtCost;
use crate::error::{Error, Result};
use crate::exec;
use crate::formula::{Dfa, Letter};
use crate::model::graph::{dijkstra, dijkstra_offsets, Digraph};
use crate::model::knowledge::{env_choices, refine, skeleton, KnowledgeSet, MAX_ENUM_UNKNOWNS};
use crate::model::product::{model_letters, optimal_cost};
use crate::model::{Pkwts, StateId};
use crate::strategy::{Controller, Decision, DecisionKey, Objective, Strategy};

/// Largest number of completions exact best responses will enumerate.
pub const MAX_EXACT_COMPLETIONS: u128 = 1 << 12;

/// How hindsight-optimal costs are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrMode {
    /// Minimum over every environment consistent with the knowledge.
    #[default]
    Exact,
    /// Shortest path in the union of the remaining patterns. Cheaper, and a
    /// lower bound on the exact value; the two can differ when an optimal
    /// path would visit an unexplored state twice.
    Skeleton,
}

impl fmt::Display for BrMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BrMode::Exact => "exact",
            BrMode::Skeleton => "skeleton",
        })
    }
}

impl FromStr for BrMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(BrMode::Exact),
            "skeleton" => Ok(BrMode::Skeleton),
            _ => Err(format!("unknown best-response mode `{s}` (expected exact or skeleton)")),
        }
    }
}

/// Cheapest cost of satisfying the task in hindsight, given knowledge `k`.
pub fn best_response(m: &Pkwts, a: &Dfa, k: &KnowledgeSet, mode: BrMode) -> Result<ExtCost> {
    let r = refine(m, k);
    match mode {
        BrMode::Skeleton => optimal_cost(&skeleton(&r), a),
        BrMode::Exact => {
            if r.completion_count() > MAX_EXACT_COMPLETIONS {
                return Err(Error::TooManyUnknowns { count: r.unknown_states().len(), cap: MAX_ENUM_UNKNOWNS });
            }
            let mut best = ExtCost::Infinite;
            for c in env_choices(&r, usize::MAX)? {
                best = best.min(optimal_cost(&r.env(&c), a)?);
            }
            Ok(best)
        }
    }
}

/// Memoized best responses per arena knowledge set.
struct BrTable<'a> {
    m: &'a Pkwts,
    a: &'a Dfa,
    mode: BrMode,
    memo: HashMap<KnowledgeId, ExtCost>,
    fallbacks: usize,
}

impl BrTable<'_> {
    fn get(&mut self, arena: &Arena, k: KnowledgeId) -> Result<ExtCost> {
        if let Some(&c) = self.memo.get(&k) {
            return Ok(c);
        }
        let ks = arena.knowledge(k);
        let c = match best_response(self.m, self.a, ks, self.mode) {
            Err(Error::TooManyUnknowns { count, .. }) => {
                warn!("{count} unexplored states leave too many completions; using skeleton best response");
                self.fallbacks += 1;
                best_response(self.m, self.a, ks, BrMode::Skeleton)?
            }
            other => other?,
        };
        self.memo.insert(k, c);
        Ok(c)
    }
}

/// Edges lying on some cheapest path from the initial vertex to a final
/// vertex, with the potentials used to find them.
#[derive(Debug, Clone)]
pub struct ShortestPathEdges {
    /// Arena distance from the initial vertex.
    pub d: Vec<ExtCost>,
    /// `min over finals f of dist(v, f) - d(f)`, if some final is reachable.
    pub g: Vec<Option<i64>>,
    /// Parallel to the arena successor lists.
    pub on_path: Vec<Vec<bool>>,
}

impl ShortestPathEdges {
    pub fn contains(&self, arena: &Arena, from: VertexId, to: VertexId) -> bool {
        arena
            .successors(from)
            .iter()
            .position(|&(t, _)| t == to)
            .is_some_and(|j| self.on_path[from][j])
    }
}

/// Finds all edges on cheapest initial-to-final paths. An edge `v -> v'`
/// with weight `w` qualifies iff `d(v) + w + g(v') = 0`.
pub fn compute_e_sp(arena: &Arena) -> Result<ShortestPathEdges> {
    let d = dijkstra(arena, arena.initial(), &[])?.dist;
    let sources: Vec<(usize, i64)> = arena.finals().filter_map(|f| d[f].finite().map(|c| (f, -(c as i64)))).collect();
    if sources.is_empty() {
        return Err(Error::UnrealizableTask);
    }
    let g = dijkstra_offsets(&Reversed(arena), &sources)?;
    let mut on_path = Vec::with_capacity(arena.num_vertices());
    for v in 0..arena.num_vertices() {
        let mut row = Vec::with_capacity(arena.successors(v).len());
        for &(t, w) in arena.successors(v) {
            let slack = match (d[v], g[t]) {
                (ExtCost::Finite(dv), Some(gt)) => Some(dv as i64 + w as i64 + gt),
                _ => None,
            };
            if slack.is_some_and(|s| s < 0) {
                return Err(Error::Invariant(format!("negative slack on arena edge {v} -> {t}")));
            }
            row.push(slack == Some(0));
        }
        on_path.push(row);
    }
    Ok(ShortestPathEdges { d, g, on_path })
}

/// Arena weights as extended costs.
pub fn graph_weights(arena: &Arena) -> Vec<Vec<ExtCost>> {
    (0..arena.num_vertices()).map(|v| arena.successors(v).iter().map(|&(_, w)| ExtCost::Finite(w)).collect()).collect()
}

/// Regret weights. `br(k)` must return the hindsight cost for knowledge
/// set `k`.
pub fn build_mu(
    arena: &Arena,
    sp: &ShortestPathEdges,
    mut br: impl FnMut(KnowledgeId) -> Result<ExtCost>,
) -> Result<Vec<Vec<ExtCost>>> {
    let mut mu = Vec::with_capacity(arena.num_vertices());
    for v in 0..arena.num_vertices() {
        if arena.is_agent(v) {
            mu.push(vec![ExtCost::ZERO; arena.successors(v).len()]);
            continue;
        }
        let mut row = Vec::with_capacity(arena.successors(v).len());
        for (j, &(t, _)) in arena.successors(v).iter().enumerate() {
            let w = if !sp.on_path[v][j] {
                ExtCost::Infinite
            } else if !arena.is_final(t) {
                ExtCost::ZERO
            } else {
                let dt = sp.d[t].unwrap();
                match br(arena.vertex(t).k())? {
                    ExtCost::Finite(b) if b <= dt => ExtCost::Finite(dt - b),
                    b => {
                        return Err(Error::Invariant(format!(
                            "hindsight cost {b} exceeds arena distance {dt} at vertex {t}"
                        )))
                    }
                }
            };
            row.push(w);
        }
        mu.push(row);
    }
    Ok(mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Go(VertexId),
    Stop,
}

/// Agent choice per arena vertex: `Stop` at final vertices, the env vertex
/// to move to elsewhere, `None` where the agent cannot force a final.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalStrategy {
    pub choice: Vec<Option<Choice>>,
}

impl PositionalStrategy {
    /// Agent vertex reached from `e` under pattern choice `choice`.
    fn step(arena: &Arena, m: &Pkwts, e: VertexId, choice: &[usize]) -> (VertexId, u64) {
        arena.env_response(m, e, choice)
    }

    /// Play against a concrete environment, as arena vertices, with its cost.
    pub fn play(&self, arena: &Arena, m: &Pkwts, choice: &[usize]) -> Result<(Vec<VertexId>, u64)> {
        let mut v = arena.initial();
        let mut play = vec![v];
        let mut cost = 0;
        let limit = 4 * arena.num_vertices();
        while !arena.is_final(v) {
            if play.len() > limit {
                return Err(Error::NonTermination { steps: limit });
            }
            let Some(Choice::Go(e)) = self.choice[v] else {
                let vx = arena.vertex(v);
                return Err(Error::StrategyIncomplete { x: vx.x(), q: vx.q() });
            };
            let (t, w) = Self::step(arena, m, e, choice);
            play.push(e);
            play.push(t);
            cost += w;
            v = t;
        }
        Ok((play, cost))
    }

    /// Agent vertices reachable from the initial vertex when the agent
    /// follows this strategy and the environment may do anything.
    pub fn reachable_agents(&self, arena: &Arena) -> Vec<VertexId> {
        let mut seen = vec![false; arena.num_vertices()];
        let mut stack = vec![arena.initial()];
        let mut out = Vec::new();
        seen[arena.initial()] = true;
        while let Some(v) = stack.pop() {
            out.push(v);
            if let Some(Choice::Go(e)) = self.choice[v] {
                for &(t, _) in arena.successors(e) {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Checks that no play consistent with the strategy can cycle.
    pub fn check_terminates(&self, arena: &Arena) -> Result<()> {
        // 0 = unvisited, 1 = on stack, 2 = done.
        let mut state = vec![0u8; arena.num_vertices()];
        let mut stack: Vec<(VertexId, usize)> = vec![(arena.initial(), 0)];
        state[arena.initial()] = 1;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            let succ: &[(VertexId, u64)] = match self.choice[v] {
                Some(Choice::Go(e)) => arena.successors(e),
                _ => &[],
            };
            if *i < succ.len() {
                let t = succ[*i].0;
                *i += 1;
                match state[t] {
                    0 => {
                        state[t] = 1;
                        stack.push((t, 0));
                    }
                    1 => return Err(Error::NonTermination { steps: arena.num_vertices() }),
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
        Ok(())
    }

    /// Model-level strategy covering every agent vertex the strategy can
    /// reach.
    pub fn to_strategy(&self, arena: &Arena, objective: Objective, task: &str, a: &Dfa, value: ExtCost) -> Strategy {
        let mut decisions = std::collections::BTreeMap::new();
        for v in self.reachable_agents(arena) {
            let Vertex::Agent { x, q, k } = arena.vertex(v) else { unreachable!() };
            let d = match self.choice[v] {
                Some(Choice::Stop) => Decision::Stop,
                Some(Choice::Go(e)) => Decision::Go(match arena.vertex(e) {
                    Vertex::Env { next, .. } => next,
                    Vertex::Agent { .. } => unreachable!(),
                }),
                None => continue,
            };
            decisions.insert(DecisionKey { x, q, k: arena.knowledge(k).clone() }, d);
        }
        Strategy { objective, task: task.to_string(), atoms: a.atoms().to_vec(), value, decisions }
    }
}

/// Values and an optimal positional strategy of a min-max game.
#[derive(Debug, Clone)]
pub struct MinMax {
    pub values: Vec<ExtCost>,
    pub strategy: PositionalStrategy,
    pub sweeps: usize,
}

impl MinMax {
    pub fn value(&self) -> ExtCost {
        self.values[0]
    }
}

/// Solves the game where the agent minimizes and the environment maximizes
/// the total weight accumulated until a final vertex.
///
/// Values come from synchronous value iteration starting at 0 on final
/// vertices and infinity elsewhere. Because zero-weight moves can form
/// cycles, a plain argmin may loop forever, so the strategy is extracted
/// from the subgame of value-preserving agent moves: vertices are ranked by
/// how many rounds the agent needs to force a final vertex there, and each
/// agent vertex moves to a value-preserving successor of strictly smaller
/// rank, smallest vertex id first.
pub fn solve_minmax(arena: &Arena, weights: &[Vec<ExtCost>]) -> Result<MinMax> {
    solve_minmax_terminal(arena, weights, |_| 0)
}

/// [`solve_minmax`] where stopping at final vertex `v` is worth
/// `terminal(v)` instead of 0.
pub fn solve_minmax_terminal(
    arena: &Arena,
    weights: &[Vec<ExtCost>],
    terminal: impl Fn(VertexId) -> u64,
) -> Result<MinMax> {
    let n = arena.num_vertices();
    let term: Vec<ExtCost> =
        (0..n).map(|v| if arena.is_final(v) { ExtCost::Finite(terminal(v)) } else { ExtCost::Infinite }).collect();
    let mut values = term.clone();
    let mut sweeps = 0;
    let cap = n + 2;
    loop {
        sweeps += 1;
        if sweeps > cap {
            return Err(Error::Invariant(format!("value iteration did not converge in {cap} sweeps")));
        }
        let next: Vec<ExtCost> = (0..n)
            .map(|v| {
                if arena.is_final(v) {
                    return term[v];
                }
                let it = arena.successors(v).iter().zip(&weights[v]).map(|(&(t, _), &w)| values[t] + w);
                if arena.is_agent(v) {
                    it.min().unwrap_or(ExtCost::Infinite)
                } else {
                    it.max().unwrap_or(ExtCost::Infinite)
                }
            })
            .collect();
        if next == values {
            break;
        }
        values = next;
    }
    debug!("value iteration converged after {sweeps} sweeps on {n} vertices");

    // Attractor of the final vertices in the value-preserving subgame.
    let mut rank: Vec<Option<usize>> = vec![None; n];
    let mut pending: Vec<usize> = (0..n).map(|v| if arena.is_agent(v) { 1 } else { arena.successors(v).len() }).collect();
    let tight = |v: VertexId, j: usize| -> bool {
        let (t, _) = arena.successors(v)[j];
        values[v].is_finite() && values[t] + weights[v][j] == values[v]
    };
    let mut layer: Vec<VertexId> = arena.finals().collect();
    for &f in &layer {
        rank[f] = Some(0);
    }
    let mut r = 0;
    while !layer.is_empty() {
        r += 1;
        let mut next_layer = Vec::new();
        for &t in &layer {
            for &(p, _) in arena.predecessors(t) {
                if rank[p].is_some() {
                    continue;
                }
                let j = arena.successors(p).iter().position(|&(s, _)| s == t).unwrap();
                if arena.is_agent(p) {
                    if !tight(p, j) {
                        continue;
                    }
                    pending[p] = 0;
                } else {
                    pending[p] -= 1;
                }
                if pending[p] == 0 {
                    rank[p] = Some(r);
                    next_layer.push(p);
                }
            }
        }
        // Keep vertices within a layer independent of discovery order.
        next_layer.sort_unstable();
        layer = next_layer;
    }

    let mut choice = vec![None; n];
    for v in 0..n {
        if !arena.is_agent(v) {
            continue;
        }
        if arena.is_final(v) {
            choice[v] = Some(Choice::Stop);
            continue;
        }
        let (Some(rv), true) = (rank[v], values[v].is_finite()) else { continue };
        let pick = arena
            .successors(v)
            .iter()
            .enumerate()
            .find(|&(j, &(t, _))| tight(v, j) && rank[t].is_some_and(|rt| rt < rv))
            .map(|(_, &(t, _))| t);
        match pick {
            Some(t) => choice[v] = Some(Choice::Go(t)),
            None => return Err(Error::Invariant(format!("no ranked successor at finite-valued vertex {v}"))),
        }
    }
    for v in 0..n {
        if values[v].is_finite() && rank[v].is_none() {
            return Err(Error::Invariant(format!("finite-valued vertex {v} is outside the attractor")));
        }
    }
    let strategy = PositionalStrategy { choice };
    strategy.check_terminates(arena)?;
    Ok(MinMax { values, strategy, sweeps })
}

/// Game used for regret minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegretGame {
    /// Reweighted arena restricted to shortest plays (see the module docs).
    /// Exact for reachability of labeled states; for tasks whose automaton
    /// moves before acceptance it can miss strategies whose plays are not
    /// shortest to their final vertex.
    #[default]
    ShortestPlays,
    /// Original weights, with stopping at a final vertex `v` worth
    /// `-br(K_v)`. Exact for every task the arena supports.
    TerminalPayoff,
}

impl fmt::Display for RegretGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegretGame::ShortestPlays => "shortest-plays",
            RegretGame::TerminalPayoff => "terminal-payoff",
        })
    }
}

impl FromStr for RegretGame {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "shortest-plays" => Ok(RegretGame::ShortestPlays),
            "terminal-payoff" => Ok(RegretGame::TerminalPayoff),
            _ => Err(format!("unknown regret game `{s}` (expected shortest-plays or terminal-payoff)")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub br_mode: BrMode,
    pub arena_cap: usize,
    pub regret_game: RegretGame,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { br_mode: BrMode::Exact, arena_cap: DEFAULT_ARENA_CAP, regret_game: RegretGame::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub arena: Arena,
    pub game: MinMax,
    /// Game weights the solution was computed on.
    pub weights: Vec<Vec<ExtCost>>,
    /// Minimal regret or worst-case cost, depending on the objective.
    pub value: u64,
    /// Number of exact best responses that fell back to skeleton mode.
    pub br_fallbacks: usize,
}

impl Solution {
    pub fn strategy(&self, a: &Dfa, objective: Objective, task: &str) -> Strategy {
        self.game.strategy.to_strategy(&self.arena, objective, task, a, ExtCost::Finite(self.value))
    }
}

fn finish(arena: Arena, weights: Vec<Vec<ExtCost>>, br_fallbacks: usize) -> Result<Solution> {
    let game = solve_minmax(&arena, &weights)?;
    let value = game.value().finite().ok_or(Error::UnrealizableTask)?;
    Ok(Solution { arena, game, weights, value, br_fallbacks })
}

/// Minimal-regret strategy for `a` on `m`.
pub fn solve_regret(m: &Pkwts, a: &Dfa, opts: SolveOptions) -> Result<Solution> {
    solve_regret_on(Arena::build_capped(m, a, opts.arena_cap)?, m, a, opts)
}

/// [`solve_regret`] on a prebuilt arena for `m` and `a`.
pub fn solve_regret_on(arena: Arena, m: &Pkwts, a: &Dfa, opts: SolveOptions) -> Result<Solution> {
    let mut table = BrTable { m, a, mode: opts.br_mode, memo: HashMap::new(), fallbacks: 0 };
    match opts.regret_game {
        RegretGame::ShortestPlays => {
            let sp = compute_e_sp(&arena)?;
            let mu = build_mu(&arena, &sp, |k| table.get(&arena, k))?;
            let fallbacks = table.fallbacks;
            finish(arena, mu, fallbacks)
        }
        RegretGame::TerminalPayoff => {
            let mut br = vec![0u64; arena.num_vertices()];
            for f in arena.finals().collect::<Vec<_>>() {
                br[f] = table.get(&arena, arena.vertex(f).k())?.finite().ok_or_else(|| {
                    Error::Invariant(format!("final vertex {f} has no hindsight-optimal completion"))
                })?;
            }
            // Shift payoffs to stay non-negative.
            let top = br.iter().copied().max().unwrap_or(0);
            let game = solve_minmax_terminal(&arena, &graph_weights(&arena), |v| top - br[v])?;
            let shifted = game.value().finite().ok_or(Error::UnrealizableTask)?;
            let weights = graph_weights(&arena);
            let value = shifted.checked_sub(top).ok_or_else(|| Error::Invariant("negative regret".into()))?;
            Ok(Solution { arena, game, weights, value, br_fallbacks: table.fallbacks })
        }
    }
}

/// Strategy minimizing the largest cost over all environments.
pub fn solve_worst_case(m: &Pkwts, a: &Dfa, opts: SolveOptions) -> Result<Solution> {
    let arena = Arena::build_capped(m, a, opts.arena_cap)?;
    let w = graph_weights(&arena);
    finish(arena, w, 0)
}

/// Optimistic replanning: always follow a cheapest path of the skeleton of
/// the model refined by current knowledge, from the current state.
///
/// Plans are cheapest-path trees toward the accepting product states,
/// computed once per knowledge set. Following the tree until knowledge
/// changes is the same as replanning at every step, so decisions depend
/// only on `(x, q, K)`.
pub struct BestCasePolicy<'a> {
    m: &'a Pkwts,
    a: &'a Dfa,
    letters: Vec<Letter>,
    plans: HashMap<KnowledgeSet, Vec<Option<i64>>>,
}

impl<'a> BestCasePolicy<'a> {
    pub fn new(m: &'a Pkwts, a: &'a Dfa) -> Result<Self> {
        Ok(BestCasePolicy { m, a, letters: model_letters(m, a)?, plans: HashMap::new() })
    }

    fn nq(&self) -> usize {
        self.a.num_states()
    }

    /// Lexicographic key scale: cost first, then number of steps.
    fn scale(&self) -> i64 {
        (self.m.num_states() * self.nq() + 1) as i64
    }

    fn successors(&self, x: StateId, k: &KnowledgeSet) -> Vec<StateId> {
        match k.observed(self.m, x) {
            Some(o) => o.to_vec(),
            None => self.m.skeleton_successors(x),
        }
    }

    fn ensure_plan(&mut self, k: &KnowledgeSet) -> Result<()> {
        if !self.plans.contains_key(k) {
            let nq = self.nq();
            let scale = self.scale();
            let mut rev = Digraph::new(self.m.num_states() * nq);
            for x in 0..self.m.num_states() {
                for y in self.successors(x, k) {
                    let w = self.m.weight(x, y).expect("validated weight") as i64;
                    for q in 0..nq {
                        let q2 = self.a.step(q, self.letters[y]);
                        rev.add_edge(y * nq + q2, x * nq + q, w * scale + 1);
                    }
                }
            }
            let sources: Vec<(usize, i64)> =
                (0..self.m.num_states() * nq).filter(|v| self.a.is_accepting(v % nq)).map(|v| (v, 0)).collect();
            let h = dijkstra_offsets(&rev, &sources)?;
            self.plans.insert(k.clone(), h);
        }
        Ok(())
    }

    /// Optimistic cost of finishing the task from `(x, q)` with knowledge `k`.
    pub fn planned_cost(&mut self, x: StateId, q: usize, k: &KnowledgeSet) -> Result<ExtCost> {
        let scale = self.scale();
        let nq = self.nq();
        self.ensure_plan(k)?;
        Ok(match self.plans[k][x * nq + q] {
            Some(h) => ExtCost::Finite((h / scale) as u64),
            None => ExtCost::Infinite,
        })
    }
}

impl Controller for BestCasePolicy<'_> {
    fn decide(&mut self, x: StateId, q: usize, k: &KnowledgeSet) -> Result<Decision> {
        if self.a.is_accepting(q) {
            return Ok(Decision::Stop);
        }
        let nq = self.nq();
        let scale = self.scale();
        let succ = self.successors(x, k);
        self.ensure_plan(k)?;
        let h = &self.plans[k];
        if h[x * nq + q].is_none() {
            return Err(Error::StuckNoPath { x });
        }
        let mut best: Option<(i64, StateId)> = None;
        for y in succ {
            let q2 = self.a.step(q, self.letters[y]);
            if let Some(hy) = h[y * nq + q2] {
                let key = (self.m.weight(x, y).unwrap() as i64 * scale + 1 + hy, y);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        Ok(Decision::Go(best.expect("a finite plan has a next hop").1))
    }
}

/// The best-case policy written out as a strategy over every situation it
/// meets in some environment of `m`. Its value is the optimistic plan cost
/// from the start.
pub fn best_case_strategy(m: &Pkwts, a: &Dfa, task: &str) -> Result<Strategy> {
    let mut policy = BestCasePolicy::new(m, a)?;
    let mut decisions = std::collections::BTreeMap::new();
    for c in env_choices(m, MAX_ENUM_UNKNOWNS)? {
        let rec = exec::execute(&mut policy, m, a, &m.env(&c))?;
        for (key, d) in rec.decisions {
            decisions.insert(key, d);
        }
    }
    let q0 = a.step(a.initial(), model_letters(m, a)?[m.initial()]);
    let value = policy.planned_cost(m.initial(), q0, &KnowledgeSet::default())?;
    Ok(Strategy { objective: Objective::Best, task: task.to_string(), atoms: a.atoms().to_vec(), value, decisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn t3_best_responses() {
        let m = fixtures::t3();
        let a = fixtures::eventually_target();
        let k0 = KnowledgeSet::default();
        let k_no = KnowledgeSet::from_suffix(vec![(1, 1)]);
        for mode in [BrMode::Exact, BrMode::Skeleton] {
            assert_eq!(best_response(&m, &a, &k0, mode).unwrap(), ExtCost::Finite(2));
            assert_eq!(best_response(&m, &a, &k_no, mode).unwrap(), ExtCost::Finite(10));
        }
    }

    #[test]
    fn t3_values() {
        let m = fixtures::t3();
        let a = fixtures::eventually_target();
        assert_eq!(solve_regret(&m, &a, SolveOptions::default()).unwrap().value, 2);
        assert_eq!(solve_worst_case(&m, &a, SolveOptions::default()).unwrap().value, 10);
    }

    #[test]
    fn t3_mu_weights() {
        let m = fixtures::t3();
        let a = fixtures::eventually_target();
        let arena = Arena::build(&m, &a).unwrap();
        let sp = compute_e_sp(&arena).unwrap();
        let mu = build_mu(&arena, &sp, |k| best_response(&m, &a, arena.knowledge(k), BrMode::Exact)).unwrap();
        let mut finals: Vec<(u64, ExtCost)> = Vec::new();
        for v in 0..arena.num_vertices() {
            for (j, &(t, _)) in arena.successors(v).iter().enumerate() {
                if !arena.is_agent(v) && arena.is_final(t) && mu[v][j].is_finite() {
                    finals.push((sp.d[t].unwrap(), mu[v][j]));
                }
            }
        }
        finals.sort();
        finals.dedup();
        // Door open: cost 2, regret 0. Safe corridor: 10 - 2. Door closed,
        // then corridor: 12 - 10.
        assert_eq!(finals, vec![(2, ExtCost::Finite(0)), (10, ExtCost::Finite(8)), (12, ExtCost::Finite(2))]);
    }

    #[test]
    fn zero_weight_cycles_do_not_trap_the_strategy() {
        // State 1 carries `a` and idles for free; the task still needs `b`.
        // The self-loop keeps the value unchanged, so it ties with the real
        // move toward state 2.
        let labels = vec![vec![], vec!["a".to_string()], vec!["b".to_string()]];
        let m = Pkwts::new(
            0,
            vec![vec![vec![1]], vec![vec![1, 2]], vec![vec![2]]],
            [((0, 1), 1), ((1, 1), 0), ((1, 2), 3), ((2, 2), 0)],
            labels,
            1,
        )
        .unwrap();
        let a = crate::formula::compile(&crate::formula::parse("F a & F b").unwrap(), &["a", "b"]).unwrap();
        for sol in [solve_worst_case(&m, &a, SolveOptions::default()), solve_regret(&m, &a, SolveOptions::default())] {
            let sol = sol.unwrap();
            sol.game.strategy.check_terminates(&sol.arena).unwrap();
            let (_, cost) = sol.game.strategy.play(&sol.arena, &m, &[0, 0, 0]).unwrap();
            assert_eq!(cost, 4);
        }
    }

    #[test]
    fn best_case_plans_through_unknown_door() {
        let m = fixtures::t3();
        let a = fixtures::eventually_target();
        let mut p = BestCasePolicy::new(&m, &a).unwrap();
        assert_eq!(p.decide(0, 0, &KnowledgeSet::default()).unwrap(), Decision::Go(1));
        let closed = KnowledgeSet::from_suffix(vec![(1, 1)]);
        assert_eq!(p.decide(1, 0, &closed).unwrap(), Decision::Go(0));
        assert_eq!(p.planned_cost(0, 0, &KnowledgeSet::default()).unwrap(), ExtCost::Finite(2));
    }
}
