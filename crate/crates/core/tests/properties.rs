//! Solver invariants on small random instances, checked against the
//! exhaustive search and against direct simulation.

use proptest::prelude::*;
use regretplan::arena::{size_bound, Arena};
use regretplan::bench::{generate_small, target_task};
use regretplan::exec::{regret_of, regret_table, run};
use regretplan::model::knowledge::{env_choices, MAX_ENUM_UNKNOWNS};
use regretplan::model::product::{optimal_cost, product};
use regretplan::oracle::{brute_force_optimal_regret, check_decomposition};
use regretplan::solver::{compute_e_sp, solve_regret, solve_worst_case, RegretGame, SolveOptions};
use regretplan::strategy::Objective;
use regretplan::{Error, ExtCost};

fn solver_value(r: &regretplan::Result<regretplan::solver::Solution>) -> ExtCost {
    match r {
        Ok(s) => ExtCost::Finite(s.value),
        Err(Error::UnrealizableTask) => ExtCost::Infinite,
        Err(e) => panic!("solver failed: {e}"),
    }
}

fn check_instance(n: usize, unknown: usize, seed: u64) -> Result<(), TestCaseError> {
    let m = generate_small(n, unknown, seed).unwrap();
    let a = target_task();
    let arena = Arena::build(&m, &a).unwrap();
    prop_assert!(arena.num_vertices() as u128 <= size_bound(&m, &a));

    let sol = solve_regret(&m, &a, SolveOptions::default());
    let oracle = brute_force_optimal_regret(&m, &a).unwrap();
    prop_assert_eq!(solver_value(&sol), oracle.value);
    let terminal = solve_regret(&m, &a, SolveOptions { regret_game: RegretGame::TerminalPayoff, ..Default::default() });
    prop_assert_eq!(solver_value(&terminal), oracle.value);
    let Ok(sol) = sol else { return Ok(()) };

    let mut reg = sol.strategy(&a, Objective::Regret, "F target");
    prop_assert_eq!(regret_of(&mut reg, &m, &a).unwrap(), ExtCost::Finite(sol.value));
    // Fails with an error if some run misses the target.
    let rep = check_decomposition(&mut reg, &m, &a).unwrap();
    prop_assert!(rep.holds(), "{:?}", rep.rows);

    // Every play of the regret strategy is a cheapest play to its final vertex.
    let sp = compute_e_sp(&sol.arena).unwrap();
    for choice in env_choices(&m, MAX_ENUM_UNKNOWNS).unwrap() {
        let (play, cost) = sol.game.strategy.play(&sol.arena, &m, &choice).unwrap();
        prop_assert_eq!(ExtCost::Finite(cost), sp.d[*play.last().unwrap()]);
        prop_assert_eq!(sol.arena.play_cost(&play).unwrap(), cost);
        // The model-level strategy walks the same play.
        prop_assert_eq!(run(&reg, &m, &a, &m.env(&choice)).unwrap().cost, cost);
    }

    let worst = solve_worst_case(&m, &a, SolveOptions::default()).unwrap();
    let mut ws = worst.strategy(&a, Objective::Worst, "F target");
    for o in regret_table(&mut ws, &m, &a).unwrap() {
        prop_assert!(o.cost <= ExtCost::Finite(worst.value));
    }
    prop_assert!(regret_of(&mut ws, &m, &a).unwrap() >= ExtCost::Finite(sol.value));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_invariants(n in 3usize..=8, unknown in 0usize..=2, seed in any::<u64>()) {
        check_instance(n, unknown.min(n - 1), seed)?;
    }

    #[test]
    fn fully_known_models(n in 3usize..=8, seed in any::<u64>()) {
        let m = generate_small(n, 0, seed).unwrap();
        let a = target_task();
        prop_assume!(m.unknown_states().is_empty());
        let t = m.env(&vec![0; n]);
        match optimal_cost(&t, &a).unwrap() {
            ExtCost::Infinite => {
                prop_assert!(matches!(solve_regret(&m, &a, SolveOptions::default()), Err(Error::UnrealizableTask)));
            }
            ExtCost::Finite(opt) => {
                let sol = solve_regret(&m, &a, SolveOptions::default()).unwrap();
                prop_assert_eq!(sol.value, 0);
                let r = run(&sol.strategy(&a, Objective::Regret, ""), &m, &a, &t).unwrap();
                prop_assert!(r.satisfied);
                prop_assert_eq!(r.cost, opt);
                let p = product(&t, &a).unwrap();
                let (d, path) = p.shortest_from(p.initial()).unwrap().unwrap();
                prop_assert_eq!(d, opt);
                prop_assert_eq!(t.path_cost(&path), Some(opt));
                prop_assert_eq!(t.path_cost(&r.path), Some(opt));
            }
        }
    }
}

#[test]
fn seeded_sweep() {
    for seed in 0..120u64 {
        check_instance(4 + (seed % 5) as usize, 1 + (seed % 2) as usize, seed).unwrap();
    }
}
