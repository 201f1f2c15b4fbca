//! The four-state door instance, end to end.

use regretplan::bench::sample_env;
use regretplan::exec::{regret_of, regret_table, run};
use regretplan::fixtures::{eventually_target, t3};
use regretplan::model::knowledge::KnowledgeSet;
use regretplan::oracle::{brute_force_optimal_regret, check_decomposition};
use regretplan::solver::{best_case_strategy, best_response, solve_regret, solve_worst_case, BrMode, SolveOptions};
use regretplan::strategy::{Objective, Strategy};
use regretplan::ExtCost;

const OPEN: [usize; 4] = [0, 0, 0, 0];
const CLOSED: [usize; 4] = [0, 1, 0, 0];

fn strategies() -> [Strategy; 3] {
    let m = t3();
    let a = eventually_target();
    let o = SolveOptions::default();
    [
        solve_regret(&m, &a, o).unwrap().strategy(&a, Objective::Regret, "F target"),
        solve_worst_case(&m, &a, o).unwrap().strategy(&a, Objective::Worst, "F target"),
        best_case_strategy(&m, &a, "F target").unwrap(),
    ]
}

fn realized(s: &Strategy) -> [(Vec<usize>, u64); 2] {
    let m = t3();
    let a = eventually_target();
    [OPEN, CLOSED].map(|c| {
        let r = run(s, &m, &a, &m.env(&c)).unwrap();
        assert!(r.satisfied);
        (r.path, r.cost)
    })
}

#[test]
fn oracle_certifies_the_regret_value() {
    let m = t3();
    let a = eventually_target();
    let oracle = brute_force_optimal_regret(&m, &a).unwrap();
    assert_eq!(oracle.value, ExtCost::Finite(2));
    assert_eq!(solve_regret(&m, &a, SolveOptions::default()).unwrap().value, 2);
    assert_eq!(solve_worst_case(&m, &a, SolveOptions::default()).unwrap().value, 10);
}

#[test]
fn realized_costs() {
    let [reg, worst, best] = strategies();
    assert_eq!(realized(&reg), [(vec![0, 1, 3], 2), (vec![0, 1, 0, 2, 3], 12)]);
    assert_eq!(realized(&worst), [(vec![0, 2, 3], 10), (vec![0, 2, 3], 10)]);
    assert_eq!(realized(&best), [(vec![0, 1, 3], 2), (vec![0, 1, 0, 2, 3], 12)]);
    assert_eq!((reg.value, worst.value, best.value), (ExtCost::Finite(2), ExtCost::Finite(10), ExtCost::Finite(2)));
}

#[test]
fn regret_of_each_strategy() {
    let m = t3();
    let a = eventually_target();
    let [mut reg, mut worst, mut best] = strategies();
    assert_eq!(regret_of(&mut reg, &m, &a).unwrap(), ExtCost::Finite(2));
    assert_eq!(regret_of(&mut worst, &m, &a).unwrap(), ExtCost::Finite(8));
    assert_eq!(regret_of(&mut best, &m, &a).unwrap(), ExtCost::Finite(2));
    let table = regret_table(&mut worst, &m, &a).unwrap();
    let optima: Vec<_> = table.iter().map(|o| o.optimum).collect();
    assert_eq!(optima, [ExtCost::Finite(2), ExtCost::Finite(10)]);
}

#[test]
fn best_responses() {
    let m = t3();
    let a = eventually_target();
    let k0 = KnowledgeSet::default();
    let open = k0.extended(1, 0);
    let closed = k0.extended(1, 1);
    for mode in [BrMode::Exact, BrMode::Skeleton] {
        assert_eq!(best_response(&m, &a, &k0, mode).unwrap(), ExtCost::Finite(2));
        assert_eq!(best_response(&m, &a, &open, mode).unwrap(), ExtCost::Finite(2));
        assert_eq!(best_response(&m, &a, &closed, mode).unwrap(), ExtCost::Finite(10));
    }
}

#[test]
fn decomposition_rows() {
    let m = t3();
    let a = eventually_target();
    let [mut reg, mut worst, _] = strategies();
    let rep = check_decomposition(&mut reg, &m, &a).unwrap();
    assert!(rep.holds());
    let rows: Vec<_> = rep.rows.iter().map(|r| (r.cost, r.optimum, r.regret, r.br_final, r.bound)).collect();
    assert_eq!(rows, [(2, 2, 0, 2, 0), (12, 10, 2, 10, 2)]);
    let rep = check_decomposition(&mut worst, &m, &a).unwrap();
    assert!(rep.holds());
    let rows: Vec<_> = rep.rows.iter().map(|r| (r.cost, r.optimum, r.regret, r.br_final, r.bound)).collect();
    // The direct route never learns the door, so the hindsight cost stays 2
    // and the bound is loose when the door is closed.
    assert_eq!(rows, [(10, 2, 8, 2, 8), (10, 10, 0, 2, 8)]);
}

#[test]
fn sampling_extremes() {
    let m = t3();
    for seed in 0..20 {
        assert_eq!(m.choice_of(&sample_env(&m, 0.0, seed)).unwrap(), OPEN);
        assert_eq!(m.choice_of(&sample_env(&m, 1.0, seed)).unwrap(), CLOSED);
    }
}
