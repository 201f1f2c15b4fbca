//! Two-player game arena built from a model and a task automaton.
//!
//! Agent vertices `(x, q, K)` are positions where the agent picks a
//! successor allowed by its knowledge. Env vertices `(x, q, K, x')` are
//! positions where the environment reveals the successor set of `x'`,
//! which only branches when `x'` has not been explored yet. Moving from an
//! env vertex to an agent vertex costs `w(x, x')`; agent moves are free.
//!
//! Vertices are numbered in breadth-first discovery order from the initial
//! vertex (id 0), and every successor list is sorted by id.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::Dfa;
use crate::model::graph::WeightedGraph;
use crate::model::knowledge::{initial_knowledge, KnowledgeSet};
use crate::model::product::model_letters;
use crate::model::{Knowledge, Pkwts, StateId};

pub type VertexId = usize;

/// Index into the arena's table of interned knowledge sets.
pub type KnowledgeId = usize;

/// Default bound on the number of arena vertices.
pub const DEFAULT_ARENA_CAP: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Agent { x: StateId, q: usize, k: KnowledgeId },
    Env { x: StateId, q: usize, k: KnowledgeId, next: StateId },
}

impl Vertex {
    pub fn x(&self) -> StateId {
        match *self {
            Vertex::Agent { x, .. } | Vertex::Env { x, .. } => x,
        }
    }

    pub fn q(&self) -> usize {
        match *self {
            Vertex::Agent { q, .. } | Vertex::Env { q, .. } => q,
        }
    }

    pub fn k(&self) -> KnowledgeId {
        match *self {
            Vertex::Agent { k, .. } | Vertex::Env { k, .. } => k,
        }
    }

    pub fn is_agent(&self) -> bool {
        matches!(self, Vertex::Agent { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Arena {
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, VertexId>,
    succ: Vec<Vec<(VertexId, u64)>>,
    pred: Vec<Vec<(VertexId, u64)>>,
    knowledge: Vec<KnowledgeSet>,
    final_: Vec<bool>,
}

struct Builder {
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, VertexId>,
    knowledge: Vec<KnowledgeSet>,
    kindex: HashMap<KnowledgeSet, KnowledgeId>,
    queue: VecDeque<VertexId>,
    cap: usize,
}

impl Builder {
    fn intern_k(&mut self, k: KnowledgeSet) -> KnowledgeId {
        if let Some(&id) = self.kindex.get(&k) {
            return id;
        }
        let id = self.knowledge.len();
        self.knowledge.push(k.clone());
        self.kindex.insert(k, id);
        id
    }

    fn intern_v(&mut self, v: Vertex) -> Result<VertexId> {
        if let Some(&id) = self.index.get(&v) {
            return Ok(id);
        }
        if self.vertices.len() >= self.cap {
            return Err(Error::ArenaTooLarge { cap: self.cap });
        }
        let id = self.vertices.len();
        self.vertices.push(v);
        self.index.insert(v, id);
        self.queue.push_back(id);
        Ok(id)
    }
}

impl Arena {
    pub fn build(m: &Pkwts, a: &Dfa) -> Result<Arena> {
        Self::build_capped(m, a, DEFAULT_ARENA_CAP)
    }

    pub fn build_capped(m: &Pkwts, a: &Dfa, cap: usize) -> Result<Arena> {
        let letters = model_letters(m, a)?;
        let mut b = Builder {
            vertices: Vec::new(),
            index: HashMap::new(),
            knowledge: Vec::new(),
            kindex: HashMap::new(),
            queue: VecDeque::new(),
            cap,
        };
        let k0 = b.intern_k(initial_knowledge(m));
        let x0 = m.initial();
        b.intern_v(Vertex::Agent { x: x0, q: a.step(a.initial(), letters[x0]), k: k0 })?;
        let mut succ: Vec<Vec<(VertexId, u64)>> = Vec::new();
        while let Some(v) = b.queue.pop_front() {
            let mut out = Vec::new();
            match b.vertices[v] {
                Vertex::Agent { x, q, k } => {
                    let options = b.knowledge[k].observed(m, x).expect("agent state is always covered").to_vec();
                    for next in options {
                        out.push((b.intern_v(Vertex::Env { x, q, k, next })?, 0));
                    }
                }
                Vertex::Env { x, q, k, next } => {
                    let w = m.weight(x, next).expect("validated weight");
                    let q2 = a.step(q, letters[next]);
                    if b.knowledge[k].covers(m, next) {
                        out.push((b.intern_v(Vertex::Agent { x: next, q: q2, k })?, w));
                    } else {
                        for i in 0..m.patterns(next).len() {
                            let k2 = b.knowledge[k].extended(next, i);
                            let k2 = b.intern_k(k2);
                            out.push((b.intern_v(Vertex::Agent { x: next, q: q2, k: k2 })?, w));
                        }
                    }
                }
            }
            out.sort_unstable();
            succ.push(out);
        }
        let n = b.vertices.len();
        let mut pred = vec![Vec::new(); n];
        for (v, list) in succ.iter().enumerate() {
            for &(t, w) in list {
                pred[t].push((v, w));
            }
        }
        let final_ = b.vertices.iter().map(|v| v.is_agent() && a.is_accepting(v.q())).collect();
        Ok(Arena { vertices: b.vertices, index: b.index, succ, pred, knowledge: b.knowledge, final_ })
    }

    pub fn initial(&self) -> VertexId {
        0
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn vertex(&self, v: VertexId) -> Vertex {
        self.vertices[v]
    }

    pub fn is_agent(&self, v: VertexId) -> bool {
        self.vertices[v].is_agent()
    }

    /// Agent vertex whose automaton state is accepting.
    pub fn is_final(&self, v: VertexId) -> bool {
        self.final_[v]
    }

    pub fn finals(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.num_vertices()).filter(|&v| self.final_[v])
    }

    /// Sorted `(successor, weight)` pairs.
    pub fn successors(&self, v: VertexId) -> &[(VertexId, u64)] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: VertexId) -> &[(VertexId, u64)] {
        &self.pred[v]
    }

    pub fn knowledge(&self, k: KnowledgeId) -> &KnowledgeSet {
        &self.knowledge[k]
    }

    pub fn knowledge_of(&self, v: VertexId) -> &KnowledgeSet {
        &self.knowledge[self.vertices[v].k()]
    }

    pub fn num_knowledge_sets(&self) -> usize {
        self.knowledge.len()
    }

    pub fn find(&self, v: &Vertex) -> Option<VertexId> {
        self.index.get(v).copied()
    }

    pub fn find_agent(&self, x: StateId, q: usize, k: &KnowledgeSet) -> Option<VertexId> {
        let kid = self.knowledge.iter().position(|kk| kk == k)?;
        self.find(&Vertex::Agent { x, q, k: kid })
    }

    /// The agent vertex reached from env vertex `e` when the environment
    /// behaves like pattern choice `choice` (one pattern index per state).
    pub fn env_response(&self, m: &Pkwts, e: VertexId, choice: &[usize]) -> (VertexId, u64) {
        let Vertex::Env { next, .. } = self.vertices[e] else {
            panic!("env_response on an agent vertex");
        };
        let succ = &self.succ[e];
        if succ.len() == 1 {
            return succ[0];
        }
        let want = choice[next];
        *succ
            .iter()
            .find(|&&(t, _)| self.knowledge_of(t).pattern_of(m, next) == Some(want))
            .expect("every pattern has a successor")
    }

    /// Total weight of a play given as a vertex sequence.
    pub fn play_cost(&self, play: &[VertexId]) -> Result<u64> {
        let mut total = 0;
        for (i, w) in play.windows(2).enumerate() {
            match self.succ[w[0]].binary_search_by_key(&w[1], |&(t, _)| t) {
                Ok(j) => total += self.succ[w[0]][j].1,
                Err(_) => return Err(Error::NotAPlay { step: i }),
            }
        }
        Ok(total)
    }

    pub fn to_json(&self, m: &Pkwts) -> ArenaJson {
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(id, v)| {
                let ksuffix = self.knowledge[v.k()].suffix_knowledge(m).into_iter().map(|Knowledge { x, o }| (x, o)).collect();
                let (kind, next) = match *v {
                    Vertex::Agent { .. } => ("agent", None),
                    Vertex::Env { next, .. } => ("env", Some(next)),
                };
                VertexJson { id, kind, x: v.x(), q: v.q(), ksuffix, next, final_: self.final_[id] }
            })
            .collect();
        let edges = self
            .succ
            .iter()
            .enumerate()
            .flat_map(|(from, l)| l.iter().map(move |&(to, w)| EdgeJson { from, to, w }))
            .collect();
        ArenaJson { vertices, edges }
    }
}

impl WeightedGraph for Arena {
    fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    fn for_each_successor(&self, v: usize, f: &mut dyn FnMut(usize, i64)) {
        for &(t, w) in &self.succ[v] {
            f(t, w as i64);
        }
    }
}

/// The arena with every edge reversed.
pub struct Reversed<'a>(pub &'a Arena);

impl WeightedGraph for Reversed<'_> {
    fn num_vertices(&self) -> usize {
        self.0.vertices.len()
    }

    fn for_each_successor(&self, v: usize, f: &mut dyn FnMut(usize, i64)) {
        for &(t, w) in &self.0.pred[v] {
            f(t, w as i64);
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ArenaJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Serialize)]
pub struct VertexJson {
    pub id: VertexId,
    pub kind: &'static str,
    pub x: StateId,
    pub q: usize,
    pub ksuffix: Vec<(StateId, Vec<StateId>)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next: Option<StateId>,
    #[serde(rename = "final")]
    pub final_: bool,
}

#[derive(Debug, Serialize)]
pub struct EdgeJson {
    pub from: VertexId,
    pub to: VertexId,
    pub w: u64,
}

/// Upper bound on the arena size: `n! * P * |X| * |Q| * E` where `n` is the
/// number of unknown states, `P` the product of their pattern counts and `E`
/// the number of skeleton transitions.
pub fn size_bound(m: &Pkwts, a: &Dfa) -> u128 {
    let unknown = m.unknown_states();
    let fact: u128 = (1..=unknown.len() as u128).product();
    let pats: u128 = unknown.iter().map(|&x| m.patterns(x).len() as u128).product();
    let nx = m.num_states() as u128;
    let edges: u128 = (0..m.num_states()).map(|x| m.skeleton_successors(x).len() as u128).sum();
    fact.saturating_mul(pats).saturating_mul(nx).saturating_mul(a.num_states() as u128).saturating_mul(edges)
}
