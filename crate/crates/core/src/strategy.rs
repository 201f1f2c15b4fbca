//! Strategies expressed over model states rather than arena vertices.
//!
//! A decision is keyed by the current state, the automaton state and the
//! exploration sequence so far. This is exactly the information an arena
//! agent vertex carries, so positional arena strategies translate one to one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost::ExtCost;
use crate::error::{Error, Result};
use crate::model::{cost_number, Knowledge, KnowledgeSet, Pkwts, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Regret,
    Worst,
    Best,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Regret => "regret",
            Objective::Worst => "worst",
            Objective::Best => "best",
        })
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "regret" => Ok(Objective::Regret),
            "worst" => Ok(Objective::Worst),
            "best" => Ok(Objective::Best),
            _ => Err(format!("unknown objective `{s}` (expected regret, worst or best)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Go(StateId),
    Stop,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecisionKey {
    pub x: StateId,
    pub q: usize,
    pub k: KnowledgeSet,
}

/// Anything that can drive a run: it is asked for a move at every step.
pub trait Controller {
    fn decide(&mut self, x: StateId, q: usize, k: &KnowledgeSet) -> Result<Decision>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    pub objective: Objective,
    /// Task formula text.
    pub task: String,
    /// Automaton alphabet the `q` values refer to.
    pub atoms: Vec<String>,
    /// Objective value in weight units.
    pub value: ExtCost,
    pub decisions: BTreeMap<DecisionKey, Decision>,
}

impl Controller for Strategy {
    fn decide(&mut self, x: StateId, q: usize, k: &KnowledgeSet) -> Result<Decision> {
        self.decisions
            .get(&DecisionKey { x, q, k: k.clone() })
            .copied()
            .ok_or(Error::StrategyIncomplete { x, q })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GoJson {
    State(StateId),
    Stop(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionJson {
    pub x: StateId,
    pub q: usize,
    pub ksuffix: Vec<(StateId, Vec<StateId>)>,
    pub go: GoJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyJson {
    pub objective: Objective,
    pub task: String,
    pub atoms: Vec<String>,
    pub value: Option<serde_json::Number>,
    pub decisions: Vec<DecisionJson>,
}

impl Strategy {
    pub fn to_json(&self, m: &Pkwts) -> StrategyJson {
        let decisions = self
            .decisions
            .iter()
            .map(|(key, d)| DecisionJson {
                x: key.x,
                q: key.q,
                ksuffix: key.k.suffix_knowledge(m).into_iter().map(|Knowledge { x, o }| (x, o)).collect(),
                go: match d {
                    Decision::Go(y) => GoJson::State(*y),
                    Decision::Stop => GoJson::Stop("stop".into()),
                },
            })
            .collect();
        StrategyJson {
            objective: self.objective,
            task: self.task.clone(),
            atoms: self.atoms.clone(),
            value: self.value.finite().map(|v| cost_number(v, m.denominator())),
            decisions,
        }
    }

    pub fn from_json(j: &StrategyJson, m: &Pkwts) -> Result<Strategy> {
        let mut decisions = BTreeMap::new();
        for d in &j.decisions {
            let obs: Vec<Knowledge> = d.ksuffix.iter().map(|(x, o)| Knowledge { x: *x, o: o.clone() }).collect();
            let k = KnowledgeSet::from_observations(m, &obs)?;
            if k.len_suffix() != obs.len() {
                return Err(Error::InvalidModel("strategy knowledge lists a known or repeated state".into()));
            }
            let go = match &d.go {
                GoJson::State(y) => Decision::Go(*y),
                GoJson::Stop(s) if s == "stop" => Decision::Stop,
                GoJson::Stop(s) => return Err(Error::InvalidModel(format!("unknown decision `{s}`"))),
            };
            decisions.insert(DecisionKey { x: d.x, q: d.q, k }, go);
        }
        let value = match &j.value {
            None => ExtCost::Infinite,
            Some(n) => {
                let f = n.as_f64().unwrap_or(f64::NAN) * m.denominator() as f64;
                if !(f >= 0.0) {
                    return Err(Error::InvalidModel(format!("strategy value {n} is not a cost")));
                }
                ExtCost::Finite(f.round() as u64)
            }
        };
        Ok(Strategy { objective: j.objective, task: j.task.clone(), atoms: j.atoms.clone(), value, decisions })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn json_round_trip() {
        let m = fixtures::t3();
        let k = KnowledgeSet::from_suffix(vec![(1, 1)]);
        let mut decisions = BTreeMap::new();
        decisions.insert(DecisionKey { x: 0, q: 0, k: KnowledgeSet::default() }, Decision::Go(1));
        decisions.insert(DecisionKey { x: 1, q: 0, k: k.clone() }, Decision::Go(0));
        decisions.insert(DecisionKey { x: 3, q: 1, k }, Decision::Stop);
        let s = Strategy {
            objective: Objective::Regret,
            task: "F target".into(),
            atoms: vec!["target".into()],
            value: ExtCost::Finite(2),
            decisions,
        };
        let text = serde_json::to_string(&s.to_json(&m)).unwrap();
        assert!(text.contains(r#""ksuffix":[[1,[0]]]"#));
        assert!(text.contains(r#""go":"stop""#));
        let back = Strategy::from_json(&serde_json::from_str(&text).unwrap(), &m).unwrap();
        assert_eq!(back, s);
    }
}
