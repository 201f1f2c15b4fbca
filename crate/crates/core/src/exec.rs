//! Running strategies against concrete environments.

use std::collections::HashSet;

use serde::Serialize;

use crate::cost::ExtCost;
use crate::error::{Error, Result};
use crate::formula::Dfa;
use crate::model::knowledge::{env_choices, KnowledgeSet, MAX_ENUM_UNKNOWNS};
use crate::model::product::{model_letters, optimal_cost};
use crate::model::{Knowledge, Pkwts, StateId, Wts};
use crate::strategy::{Controller, Decision, DecisionKey, Strategy};

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub path: Vec<StateId>,
    /// Observations in the order they were made.
    pub history: Vec<Knowledge>,
    /// In weight units.
    pub cost: u64,
    pub satisfied: bool,
    #[serde(skip)]
    pub knowledge_final: KnowledgeSet,
    /// Every decision taken, keyed by the situation it was taken in.
    #[serde(skip)]
    pub decisions: Vec<(DecisionKey, Decision)>,
}

/// Runs `ctrl` in environment `actual` until the task is satisfied or the
/// controller stops. The automaton reads the label of every entered state.
pub fn execute(ctrl: &mut dyn Controller, m: &Pkwts, a: &Dfa, actual: &Wts) -> Result<RunRecord> {
    let choice = m.choice_of(actual)?;
    let letters = model_letters(m, a)?;
    let mut x = m.initial();
    let mut q = a.step(a.initial(), letters[x]);
    let mut k = KnowledgeSet::default();
    let mut rec = RunRecord {
        path: vec![x],
        history: Vec::new(),
        cost: 0,
        satisfied: false,
        knowledge_final: KnowledgeSet::default(),
        decisions: Vec::new(),
    };
    let mut seen: HashSet<DecisionKey> = HashSet::new();
    while !a.is_accepting(q) {
        let key = DecisionKey { x, q, k: k.clone() };
        if !seen.insert(key.clone()) {
            return Err(Error::NonTermination { steps: rec.path.len() });
        }
        let d = ctrl.decide(x, q, &k)?;
        rec.decisions.push((key, d));
        let Decision::Go(y) = d else { break };
        if !k.observed(m, x).is_some_and(|o| o.contains(&y)) {
            return Err(Error::IllegalMove { from: x, to: y });
        }
        rec.cost += m.weight(x, y).expect("validated weight");
        if !k.covers(m, y) {
            k = k.extended(y, choice[y]);
            rec.history.push(Knowledge { x: y, o: m.patterns(y)[choice[y]].clone() });
        }
        q = a.step(q, letters[y]);
        x = y;
        rec.path.push(y);
    }
    if a.is_accepting(q) {
        rec.decisions.push((DecisionKey { x, q, k: k.clone() }, Decision::Stop));
    }
    let word: Vec<_> = rec.path.iter().map(|&s| letters[s]).collect();
    rec.satisfied = a.accepts(&word);
    rec.knowledge_final = k;
    Ok(rec)
}

/// [`execute`] for a stored strategy.
pub fn run(strategy: &Strategy, m: &Pkwts, a: &Dfa, actual: &Wts) -> Result<RunRecord> {
    let mut s = strategy.clone();
    execute(&mut s, m, a, actual)
}

/// Outcome of a controller in one environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvOutcome {
    pub choice: Vec<usize>,
    /// `Infinite` when the run does not satisfy the task.
    pub cost: ExtCost,
    pub optimum: ExtCost,
    pub regret: ExtCost,
}

/// Cost, hindsight optimum and regret in every environment of `m`.
pub fn regret_table(ctrl: &mut dyn Controller, m: &Pkwts, a: &Dfa) -> Result<Vec<EnvOutcome>> {
    let mut out = Vec::new();
    for choice in env_choices(m, MAX_ENUM_UNKNOWNS)? {
        let t = m.env(&choice);
        let rec = execute(ctrl, m, a, &t)?;
        let optimum = optimal_cost(&t, a)?;
        let cost = if rec.satisfied { ExtCost::Finite(rec.cost) } else { ExtCost::Infinite };
        let regret = match (cost, optimum) {
            (ExtCost::Finite(c), ExtCost::Finite(o)) => ExtCost::Finite(c - o),
            _ => ExtCost::Infinite,
        };
        out.push(EnvOutcome { choice, cost, optimum, regret });
    }
    Ok(out)
}

/// Largest regret over all environments; infinite if some run fails.
pub fn regret_of(ctrl: &mut dyn Controller, m: &Pkwts, a: &Dfa) -> Result<ExtCost> {
    Ok(regret_table(ctrl, m, a)?.into_iter().map(|o| o.regret).max().unwrap_or(ExtCost::ZERO))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::solver::{solve_regret, SolveOptions};
    use crate::strategy::Objective;

    #[test]
    fn t3_regret_strategy_runs() {
        let m = fixtures::t3();
        let a = fixtures::eventually_target();
        let s = solve_regret(&m, &a, SolveOptions::default()).unwrap().strategy(&a, Objective::Regret, "F target");
        let yes = run(&s, &m, &a, &m.env(&[0, 0, 0, 0])).unwrap();
        assert_eq!((yes.path.clone(), yes.cost, yes.satisfied), (vec![0, 1, 3], 2, true));
        let no = run(&s, &m, &a, &m.env(&[0, 1, 0, 0])).unwrap();
        assert_eq!((no.path.clone(), no.cost), (vec![0, 1, 0, 2, 3], 12));
        assert_eq!(no.history, vec![Knowledge { x: 1, o: vec![0] }]);
        assert_eq!(regret_of(&mut s.clone(), &m, &a).unwrap(), ExtCost::Finite(2));
    }

    #[test]
    fn incomplete_and_incompatible() {
        let m = fixtures::t3();
        let a = fixtures::eventually_target();
        let empty = Strategy {
            objective: Objective::Regret,
            task: "F target".into(),
            atoms: vec!["target".into()],
            value: ExtCost::ZERO,
            decisions: Default::default(),
        };
        assert!(matches!(run(&empty, &m, &a, &m.env(&[0, 0, 0, 0])), Err(Error::StrategyIncomplete { x: 0, q: 0 })));
        let other = fixtures::t3_with_weight(3).env(&[0, 0, 0, 0]);
        assert!(matches!(run(&empty, &m, &a, &other), Err(Error::IncompatibleEnvironment(_))));
    }
}
