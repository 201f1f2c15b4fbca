//! What the agent has learned about unknown states.

use serde::{Deserialize, Serialize};

use super::{Pkwts, StateId, Wts};
use crate::error::{Error, Result};

/// Default cap on unknown states for exhaustive enumeration.
pub const MAX_ENUM_UNKNOWNS: usize = 12;

/// One observation: state `x` turned out to have successors `o`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Knowledge {
    pub x: StateId,
    pub o: Vec<StateId>,
}

/// Knowledge accumulated during a run.
///
/// Known states are implicitly part of every knowledge set, listed in
/// ascending id order. Only the observations of unknown states are stored,
/// in the order they were made, as `(state, pattern index)` pairs. Equality
/// and hashing therefore compare exploration sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KnowledgeSet {
    explored: Vec<(StateId, usize)>,
}

impl KnowledgeSet {
    /// Exploration sequence as `(state, pattern index)` pairs.
    pub fn suffix(&self) -> &[(StateId, usize)] {
        &self.explored
    }

    pub fn from_suffix(explored: Vec<(StateId, usize)>) -> Self {
        KnowledgeSet { explored }
    }

    pub fn len_suffix(&self) -> usize {
        self.explored.len()
    }

    /// Pattern index of `x` if `x` is known or explored.
    pub fn pattern_of(&self, m: &Pkwts, x: StateId) -> Option<usize> {
        if m.is_known(x) {
            return Some(0);
        }
        self.explored.iter().find(|(y, _)| *y == x).map(|&(_, i)| i)
    }

    /// `o_K(x)`, if `x` is covered by this knowledge.
    pub fn observed<'m>(&self, m: &'m Pkwts, x: StateId) -> Option<&'m [StateId]> {
        self.pattern_of(m, x).map(|i| m.patterns(x)[i].as_slice())
    }

    pub fn covers(&self, m: &Pkwts, x: StateId) -> bool {
        self.pattern_of(m, x).is_some()
    }

    /// Copy with one more observation; the caller guarantees `x` is new.
    pub fn extended(&self, x: StateId, pattern: usize) -> KnowledgeSet {
        let mut explored = self.explored.clone();
        explored.push((x, pattern));
        KnowledgeSet { explored }
    }

    /// Explored observations with explicit successor sets.
    pub fn suffix_knowledge(&self, m: &Pkwts) -> Vec<Knowledge> {
        self.explored.iter().map(|&(x, i)| Knowledge { x, o: m.patterns(x)[i].clone() }).collect()
    }

    /// Full ordered knowledge: known states first, then explorations.
    pub fn entries(&self, m: &Pkwts) -> Vec<Knowledge> {
        let mut out: Vec<Knowledge> = (0..m.num_states())
            .filter(|&x| m.is_known(x))
            .map(|x| Knowledge { x, o: m.patterns(x)[0].clone() })
            .collect();
        out.extend(self.suffix_knowledge(m));
        out
    }

    /// Rebuilds a knowledge set from explicit observations.
    pub fn from_observations(m: &Pkwts, obs: &[Knowledge]) -> Result<KnowledgeSet> {
        obs.iter().try_fold(initial_knowledge(m), |k, kn| update(m, &k, kn))
    }
}

/// `K0`: only the known states.
pub fn initial_knowledge(_m: &Pkwts) -> KnowledgeSet {
    KnowledgeSet::default()
}

/// Adds an observation. Re-observing a covered state is a no-op when the
/// observation agrees and an error otherwise.
pub fn update(m: &Pkwts, k: &KnowledgeSet, kn: &Knowledge) -> Result<KnowledgeSet> {
    if kn.x >= m.num_states() {
        return Err(Error::InvalidKnowledge { state: kn.x });
    }
    let idx = m.pattern_index(kn.x, &kn.o).ok_or(Error::InvalidKnowledge { state: kn.x })?;
    match k.pattern_of(m, kn.x) {
        Some(i) if i == idx => Ok(k.clone()),
        Some(_) => Err(Error::InconsistentKnowledge { state: kn.x }),
        None => Ok(k.extended(kn.x, idx)),
    }
}

/// `m` with every explored state's patterns replaced by its observation.
pub fn refine(m: &Pkwts, k: &KnowledgeSet) -> Pkwts {
    let mut patterns: Vec<Vec<Vec<StateId>>> = (0..m.num_states()).map(|x| m.patterns(x).to_vec()).collect();
    for &(x, i) in k.suffix() {
        patterns[x] = vec![m.patterns(x)[i].clone()];
    }
    m.with_patterns(patterns)
}

/// Optimistic system: every state gets the union of its patterns.
pub fn skeleton(m: &Pkwts) -> Wts {
    let joined = m.with_patterns((0..m.num_states()).map(|x| vec![m.skeleton_successors(x)]).collect());
    joined.env(&vec![0; m.num_states()])
}

/// Pattern choice vectors of all environments, in lexicographic order over
/// the pattern indices of unknown states (lowest state id most significant).
pub fn env_choices(m: &Pkwts, cap: usize) -> Result<Vec<Vec<usize>>> {
    let unknown = m.unknown_states();
    if unknown.len() > cap {
        return Err(Error::TooManyUnknowns { count: unknown.len(), cap });
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; m.num_states()];
    loop {
        out.push(choice.clone());
        // Increment the mixed-radix counter, least significant digit last.
        let mut pos = unknown.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            let x = unknown[pos];
            choice[x] += 1;
            if choice[x] < m.patterns(x).len() {
                break;
            }
            choice[x] = 0;
        }
    }
}

/// Every concrete environment of `m`, see [`env_choices`] for the order.
pub fn compatible_envs(m: &Pkwts) -> Result<Vec<Wts>> {
    Ok(env_choices(m, MAX_ENUM_UNKNOWNS)?.iter().map(|c| m.env(c)).collect())
}
