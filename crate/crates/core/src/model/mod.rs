//! Transition systems with partially known dynamics.
//!
//! A [`Pkwts`] lists, for every state, the candidate successor sets
//! ("patterns") the real environment may exhibit. Known states have exactly
//! one pattern. A [`Wts`] is one concrete environment.
//!
//! Weights are positive integers counted in units of `1/denominator`. The
//! only zero-weight edges allowed are self-loops at labeled states, which
//! let a goal cell idle for free.

pub mod graph;
pub mod knowledge;
pub mod product;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use graph::{dijkstra, Digraph, ShortestPaths, WeightedGraph};
pub use knowledge::{compatible_envs, initial_knowledge, refine, skeleton, update, Knowledge, KnowledgeSet};
pub use product::{optimal_cost, product, Product};

pub type StateId = usize;

/// Fields shared by both model kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Common {
    initial: StateId,
    weights: Vec<BTreeMap<StateId, u64>>,
    labels: Vec<Vec<String>>,
    denominator: u64,
}

impl Common {
    fn check(&self, succ_union: &[BTreeSet<StateId>]) -> Result<()> {
        let n = succ_union.len();
        if n == 0 {
            return Err(Error::InvalidModel("model has no states".into()));
        }
        if self.initial >= n {
            return Err(Error::InvalidModel(format!("initial state {} out of range", self.initial)));
        }
        if self.denominator == 0 {
            return Err(Error::InvalidModel("denominator must be positive".into()));
        }
        for (x, succ) in succ_union.iter().enumerate() {
            for &y in succ {
                match self.weights[x].get(&y) {
                    None => return Err(Error::InvalidModel(format!("edge {x} -> {y} has no weight"))),
                    Some(0) if x != y || self.labels[x].is_empty() => {
                        return Err(Error::InvalidModel(format!(
                            "edge {x} -> {y} has zero weight; only self-loops at labeled states may be free"
                        )))
                    }
                    _ => {}
                }
            }
            if let Some((&y, _)) = self.weights[x].iter().find(|(y, _)| !succ.contains(y)) {
                return Err(Error::InvalidModel(format!("weight given for {x} -> {y}, which is not a transition")));
            }
        }
        Ok(())
    }
}

/// Partially known weighted transition system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pkwts {
    common: Common,
    patterns: Vec<Vec<Vec<StateId>>>,
}

/// Fully known weighted transition system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wts {
    common: Common,
    succ: Vec<Vec<StateId>>,
}

fn normalize_labels(labels: Vec<Vec<String>>) -> Vec<Vec<String>> {
    labels.into_iter().map(|l| l.into_iter().collect::<BTreeSet<_>>().into_iter().collect()).collect()
}

fn weight_rows(n: usize, weights: impl IntoIterator<Item = ((StateId, StateId), u64)>) -> Result<Vec<BTreeMap<StateId, u64>>> {
    let mut rows = vec![BTreeMap::new(); n];
    for ((x, y), w) in weights {
        if x >= n || y >= n {
            return Err(Error::InvalidModel(format!("weight on {x} -> {y} refers to a missing state")));
        }
        if rows[x].insert(y, w).is_some_and(|old| old != w) {
            return Err(Error::InvalidModel(format!("conflicting weights on {x} -> {y}")));
        }
    }
    Ok(rows)
}

impl Pkwts {
    /// Builds and validates a model. Patterns are sorted; their order is
    /// kept, since environment enumeration follows it.
    pub fn new(
        initial: StateId,
        patterns: Vec<Vec<Vec<StateId>>>,
        weights: impl IntoIterator<Item = ((StateId, StateId), u64)>,
        labels: Vec<Vec<String>>,
        denominator: u64,
    ) -> Result<Pkwts> {
        let n = patterns.len();
        if labels.len() != n {
            return Err(Error::InvalidModel("one label set per state is required".into()));
        }
        let mut norm = Vec::with_capacity(n);
        for (x, pats) in patterns.into_iter().enumerate() {
            if pats.is_empty() {
                return Err(Error::InvalidModel(format!("state {x} has no patterns")));
            }
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for p in pats {
                let p: Vec<StateId> = p.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
                if p.is_empty() {
                    return Err(Error::InvalidModel(format!("state {x} has an empty pattern")));
                }
                if let Some(&y) = p.iter().find(|&&y| y >= n) {
                    return Err(Error::InvalidModel(format!("state {x} has successor {y} out of range")));
                }
                if !seen.insert(p.clone()) {
                    return Err(Error::InvalidModel(format!("state {x} lists a pattern twice")));
                }
                out.push(p);
            }
            norm.push(out);
        }
        let common = Common { initial, weights: weight_rows(n, weights)?, labels: normalize_labels(labels), denominator };
        let m = Pkwts { common, patterns: norm };
        let union: Vec<BTreeSet<StateId>> = (0..n).map(|x| m.skeleton_successors(x).into_iter().collect()).collect();
        m.common.check(&union)?;
        if initial < n && !m.is_known(initial) {
            return Err(Error::InvalidModel("the initial state must be known".into()));
        }
        Ok(m)
    }

    pub fn num_states(&self) -> usize {
        self.patterns.len()
    }

    pub fn initial(&self) -> StateId {
        self.common.initial
    }

    pub fn patterns(&self, x: StateId) -> &[Vec<StateId>] {
        &self.patterns[x]
    }

    pub fn is_known(&self, x: StateId) -> bool {
        self.patterns[x].len() == 1
    }

    pub fn unknown_states(&self) -> Vec<StateId> {
        (0..self.num_states()).filter(|&x| !self.is_known(x)).collect()
    }

    /// Union of all patterns of `x`, sorted.
    pub fn skeleton_successors(&self, x: StateId) -> Vec<StateId> {
        self.patterns[x].iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn weight(&self, x: StateId, y: StateId) -> Option<u64> {
        self.common.weights[x].get(&y).copied()
    }

    pub fn label(&self, x: StateId) -> &[String] {
        &self.common.labels[x]
    }

    pub fn denominator(&self) -> u64 {
        self.common.denominator
    }

    /// All atoms appearing in labels.
    pub fn atoms(&self) -> BTreeSet<String> {
        self.common.labels.iter().flatten().cloned().collect()
    }

    /// Index of `o` among the patterns of `x`.
    pub fn pattern_index(&self, x: StateId, o: &[StateId]) -> Option<usize> {
        let o: Vec<StateId> = o.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        self.patterns[x].iter().position(|p| *p == o)
    }

    /// Number of unknown-state completions, saturating.
    pub fn completion_count(&self) -> u128 {
        self.patterns.iter().fold(1u128, |acc, p| acc.saturating_mul(p.len() as u128))
    }

    /// Concrete environment picking pattern `choice[x]` for each state.
    pub fn env(&self, choice: &[usize]) -> Wts {
        let succ: Vec<Vec<StateId>> = self.patterns.iter().zip(choice).map(|(p, &i)| p[i].clone()).collect();
        let mut common = self.common.clone();
        for (row, s) in common.weights.iter_mut().zip(&succ) {
            row.retain(|y, _| s.contains(y));
        }
        Wts { common, succ }
    }

    /// Same model with new pattern lists, which may only drop transitions.
    pub(crate) fn with_patterns(&self, patterns: Vec<Vec<Vec<StateId>>>) -> Pkwts {
        let mut common = self.common.clone();
        for (row, pats) in common.weights.iter_mut().zip(&patterns) {
            row.retain(|y, _| pats.iter().any(|p| p.contains(y)));
        }
        Pkwts { common, patterns }
    }

    /// Checks that `t` is one of this model's environments.
    pub fn check_compatible(&self, t: &Wts) -> Result<()> {
        let bad = |msg: String| Err(Error::IncompatibleEnvironment(msg));
        if t.num_states() != self.num_states() {
            return bad(format!("{} states instead of {}", t.num_states(), self.num_states()));
        }
        if t.initial() != self.initial() {
            return bad("different initial state".into());
        }
        for x in 0..self.num_states() {
            if t.label(x) != self.label(x) {
                return bad(format!("state {x} has different labels"));
            }
            if self.pattern_index(x, t.successors(x)).is_none() {
                return bad(format!("successors of state {x} match none of its patterns"));
            }
            for &y in t.successors(x) {
                if t.weight(x, y) != self.weight(x, y) {
                    return bad(format!("edge {x} -> {y} has a different weight"));
                }
            }
        }
        Ok(())
    }

    /// Pattern indices realized by `t`, assuming compatibility.
    pub fn choice_of(&self, t: &Wts) -> Result<Vec<usize>> {
        self.check_compatible(t)?;
        Ok((0..self.num_states()).map(|x| self.pattern_index(x, t.successors(x)).unwrap()).collect())
    }

    pub fn to_json(&self) -> ModelJson {
        let mut j = self.common.to_json(self.num_states());
        j.patterns = Some((0..self.num_states()).map(|x| (x.to_string(), self.patterns[x].clone())).collect());
        j
    }

    pub fn from_json(j: &ModelJson) -> Result<Pkwts> {
        let n = j.states;
        let Some(pats) = &j.patterns else {
            if j.successors.is_some() {
                // A fully known system is a valid model with singleton patterns.
                return Ok(Wts::from_json(j)?.as_pkwts());
            }
            return Err(Error::InvalidModel("`patterns` is missing".into()));
        };
        let mut patterns = vec![Vec::new(); n];
        for (k, v) in pats {
            let x = parse_state(k, n)?;
            patterns[x] = v.clone();
        }
        let (weights, labels, denominator) = j.common_parts()?;
        Pkwts::new(j.initial, patterns, weights, labels, denominator)
    }
}

impl Wts {
    pub fn new(
        initial: StateId,
        succ: Vec<Vec<StateId>>,
        weights: impl IntoIterator<Item = ((StateId, StateId), u64)>,
        labels: Vec<Vec<String>>,
        denominator: u64,
    ) -> Result<Wts> {
        let pk = Pkwts::new(initial, succ.into_iter().map(|s| vec![s]).collect(), weights, labels, denominator)?;
        Ok(pk.env(&vec![0; pk.num_states()]))
    }

    pub fn num_states(&self) -> usize {
        self.succ.len()
    }

    pub fn initial(&self) -> StateId {
        self.common.initial
    }

    pub fn successors(&self, x: StateId) -> &[StateId] {
        &self.succ[x]
    }

    pub fn weight(&self, x: StateId, y: StateId) -> Option<u64> {
        self.common.weights[x].get(&y).copied()
    }

    pub fn label(&self, x: StateId) -> &[String] {
        &self.common.labels[x]
    }

    pub fn denominator(&self) -> u64 {
        self.common.denominator
    }

    /// The same system seen as a model without unknown states.
    pub fn as_pkwts(&self) -> Pkwts {
        Pkwts { common: self.common.clone(), patterns: self.succ.iter().map(|s| vec![s.clone()]).collect() }
    }

    /// Cost of a state sequence, or `None` if a step is not a transition.
    pub fn path_cost(&self, path: &[StateId]) -> Option<u64> {
        path.windows(2).try_fold(0u64, |acc, w| {
            if self.succ[w[0]].contains(&w[1]) {
                self.weight(w[0], w[1]).map(|c| acc + c)
            } else {
                None
            }
        })
    }

    pub fn to_json(&self) -> ModelJson {
        let mut j = self.common.to_json(self.num_states());
        j.successors = Some((0..self.num_states()).map(|x| (x.to_string(), self.succ[x].clone())).collect());
        j
    }

    pub fn from_json(j: &ModelJson) -> Result<Wts> {
        let n = j.states;
        let mut succ = vec![Vec::new(); n];
        if let Some(s) = &j.successors {
            for (k, v) in s {
                succ[parse_state(k, n)?] = v.clone();
            }
        } else if let Some(p) = &j.patterns {
            for (k, v) in p {
                let x = parse_state(k, n)?;
                if v.len() != 1 {
                    return Err(Error::InvalidModel(format!("state {x} must have exactly one successor set")));
                }
                succ[x] = v[0].clone();
            }
        } else {
            return Err(Error::InvalidModel("`successors` is missing".into()));
        }
        let (weights, labels, denominator) = j.common_parts()?;
        Wts::new(j.initial, succ, weights, labels, denominator)
    }
}

// ---------------------------------------------------------------------------
// JSON

/// On-disk form of both model kinds. A model carries `patterns`, an
/// environment carries `successors`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelJson {
    pub states: usize,
    pub initial: StateId,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patterns: Option<BTreeMap<String, Vec<Vec<StateId>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub successors: Option<BTreeMap<String, Vec<StateId>>>,
    pub weights: Vec<WeightJson>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub denominator: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WeightJson {
    pub from: StateId,
    pub to: StateId,
    pub w: serde_json::Number,
}

fn one() -> u64 {
    1
}

fn is_one(d: &u64) -> bool {
    *d == 1
}

fn parse_state(k: &str, n: usize) -> Result<StateId> {
    match k.parse::<StateId>() {
        Ok(x) if x < n => Ok(x),
        _ => Err(Error::InvalidModel(format!("state key `{k}` is not a state id below {n}"))),
    }
}

/// Cost in model units as a JSON number: an integer when exact.
pub fn cost_number(units: u64, denominator: u64) -> serde_json::Number {
    if units % denominator == 0 {
        serde_json::Number::from(units / denominator)
    } else {
        serde_json::Number::from_f64(units as f64 / denominator as f64).expect("finite cost")
    }
}

fn units_of(w: &serde_json::Number, denominator: u64) -> Result<u64> {
    if let Some(u) = w.as_u64() {
        return u.checked_mul(denominator).ok_or_else(|| Error::InvalidModel("weight overflows".into()));
    }
    let f = w.as_f64().unwrap_or(f64::NAN);
    let scaled = f * denominator as f64;
    if !(scaled >= 0.0) || (scaled - scaled.round()).abs() > 1e-9 || scaled > u64::MAX as f64 {
        return Err(Error::InvalidModel(format!("weight {w} is not a nonnegative multiple of 1/{denominator}")));
    }
    Ok(scaled.round() as u64)
}

impl Common {
    fn to_json(&self, n: usize) -> ModelJson {
        let labels = (0..n)
            .filter(|&x| !self.labels[x].is_empty())
            .map(|x| (x.to_string(), self.labels[x].clone()))
            .collect();
        let weights = self
            .weights
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |(&y, &w)| (x, y, w)))
            .map(|(from, to, w)| WeightJson { from, to, w: cost_number(w, self.denominator) })
            .collect();
        ModelJson {
            states: n,
            initial: self.initial,
            labels,
            patterns: None,
            successors: None,
            weights,
            denominator: self.denominator,
        }
    }
}

type Parts = (Vec<((StateId, StateId), u64)>, Vec<Vec<String>>, u64);

impl ModelJson {
    fn common_parts(&self) -> Result<Parts> {
        let n = self.states;
        let mut labels = vec![Vec::new(); n];
        for (k, v) in &self.labels {
            labels[parse_state(k, n)?] = v.clone();
        }
        let weights = self
            .weights
            .iter()
            .map(|w| Ok(((w.from, w.to), units_of(&w.w, self.denominator)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((weights, labels, self.denominator))
    }
}
