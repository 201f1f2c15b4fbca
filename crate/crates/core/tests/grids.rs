//! The two map fixtures: the three-by-three motivating map and the
//! fire/extinguisher case study.

use std::collections::BTreeSet;

use regretplan::exec::{regret_of, run, RunRecord};
use regretplan::fixtures::{CASE_STUDY_GRID, CASE_STUDY_TASK, FIG1_GRID};
use regretplan::formula::{compile, parse, Dfa};
use regretplan::grid::{grid_compile, GridMap};
use regretplan::model::StateId;
use regretplan::oracle::brute_force_optimal_regret;
use regretplan::solver::{best_case_strategy, solve_regret, solve_worst_case, SolveOptions};
use regretplan::strategy::{Objective, Strategy};
use regretplan::ExtCost;

fn task(g: &GridMap, src: &str) -> Dfa {
    let f = parse(src).unwrap();
    let mut atoms = g.model.atoms();
    atoms.extend(f.atoms());
    compile(&f, &atoms.into_iter().collect::<Vec<_>>()).unwrap()
}

/// Environment choice with the listed possible walls closed and every other
/// one open. Each unknown cell in these maps borders a single possible wall.
fn with_closed(g: &GridMap, closed: &[(StateId, StateId)]) -> Vec<usize> {
    let mut choice = vec![0; g.model.num_states()];
    for &(x, y) in &g.possible_walls {
        assert_eq!(g.model.patterns(x).len(), 2);
        assert_eq!(g.model.patterns(y).len(), 2);
        if closed.contains(&(x, y)) {
            choice[x] = 1;
            choice[y] = 1;
        }
    }
    choice
}

fn go(s: &Strategy, g: &GridMap, a: &Dfa, choice: &[usize]) -> RunRecord {
    let r = run(s, &g.model, a, &g.model.env(choice)).unwrap();
    assert!(r.satisfied);
    r
}

fn three(g: &GridMap, a: &Dfa, src: &str) -> [Strategy; 3] {
    let o = SolveOptions::default();
    [
        solve_regret(&g.model, a, o).unwrap().strategy(a, Objective::Regret, src),
        solve_worst_case(&g.model, a, o).unwrap().strategy(a, Objective::Worst, src),
        best_case_strategy(&g.model, a, src).unwrap(),
    ]
}

#[test]
fn motivating_map() {
    let g = grid_compile(FIG1_GRID).unwrap();
    let a = task(&g, "F f");
    let centre = g.state_at(1, 1).unwrap();
    assert_eq!(g.possible_walls, [(g.state_at(0, 1).unwrap(), centre)]);
    let oracle = brute_force_optimal_regret(&g.model, &a).unwrap();
    assert_eq!(oracle.value, ExtCost::Finite(2));

    let [reg, worst, _] = three(&g, &a, "F f");
    assert_eq!((reg.value, worst.value), (ExtCost::Finite(2), ExtCost::Finite(10)));
    let open = with_closed(&g, &[]);
    let closed = with_closed(&g, &g.possible_walls);

    let r_open = go(&reg, &g, &a, &open);
    let r_closed = go(&reg, &g, &a, &closed);
    let w_open = go(&worst, &g, &a, &open);
    let w_closed = go(&worst, &g, &a, &closed);
    assert_eq!((r_open.cost, r_closed.cost, w_open.cost, w_closed.cost), (3, 12, 10, 10));
    assert_eq!(w_open.cost as i64 - r_open.cost as i64, 7);
    assert_eq!(w_closed.cost as i64 - r_closed.cost as i64, -2);

    // The regret plan checks the centre cell before anything else.
    assert_eq!(r_open.history[0].x, centre);
    assert_eq!(r_closed.history[0].x, centre);
    assert!(!w_open.path.contains(&centre) && !w_closed.path.contains(&centre));

    assert_eq!(regret_of(&mut worst.clone(), &g.model, &a).unwrap(), ExtCost::Finite(7));
}

fn explored(r: &RunRecord, regions: &[BTreeSet<StateId>; 2]) -> [bool; 2] {
    let seen: BTreeSet<StateId> = r.history.iter().map(|k| k.x).collect();
    [0, 1].map(|i| !seen.is_disjoint(&regions[i]))
}

#[test]
fn case_study() {
    let g = grid_compile(CASE_STUDY_GRID).unwrap();
    let a = task(&g, CASE_STUDY_TASK);
    let [wall_a, wall_b] = <[_; 2]>::try_from(g.possible_walls.clone()).unwrap();
    assert_eq!(wall_a, (g.state_at(0, 2).unwrap(), g.state_at(0, 3).unwrap()));
    assert_eq!(wall_b, (g.state_at(0, 5).unwrap(), g.state_at(0, 6).unwrap()));
    let regions = [BTreeSet::from([wall_a.0, wall_a.1]), BTreeSet::from([wall_b.0, wall_b.1])];

    let [reg, worst, best] = three(&g, &a, CASE_STUDY_TASK);
    assert_eq!((reg.value, worst.value), (ExtCost::Finite(13), ExtCost::Finite(40)));

    // Region A open, region B closed.
    let t1 = with_closed(&g, &[wall_b]);
    let (r1, w1, b1) = (go(&reg, &g, &a, &t1), go(&worst, &g, &a, &t1), go(&best, &g, &a, &t1));
    assert_eq!((r1.cost, b1.cost, w1.cost), (26, 37, 40));
    assert!(r1.cost < b1.cost && b1.cost < w1.cost);
    assert_eq!(w1.cost - r1.cost, 14);

    // Both regions closed.
    let t2 = with_closed(&g, &[wall_a, wall_b]);
    let (r2, w2, b2) = (go(&reg, &g, &a, &t2), go(&worst, &g, &a, &t2), go(&best, &g, &a, &t2));
    assert_eq!((w2.cost, r2.cost, b2.cost), (40, 48, 59));
    assert!(w2.cost < r2.cost && r2.cost < b2.cost);
    assert_eq!(r2.cost - w2.cost, 8);

    for r in [&r1, &r2] {
        assert_eq!(explored(r, &regions), [true, false]);
    }
    for b in [&b1, &b2] {
        assert_eq!(explored(b, &regions), [true, true]);
    }
    for w in [&w1, &w2] {
        assert!(w.history.is_empty());
    }
}
