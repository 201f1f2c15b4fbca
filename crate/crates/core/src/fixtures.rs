//! Small hand-built instances shared by tests, examples and the CLI.

use crate::formula::{compile, parse, Dfa};
use crate::model::Pkwts;

fn labels(n: usize, labeled: &[(usize, &str)]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new(); n];
    for &(x, a) in labeled {
        out[x].push(a.to_string());
    }
    out
}

/// Four-state instance with one unknown state.
///
/// From `s0 = 0` the agent can take the cheap door `s1 = 1` or the safe
/// corridor `s2 = 2`. The door either leads to the goal `g = 3` or only back
/// to `s0`. The goal carries `target` and idles for free.
pub fn t3() -> Pkwts {
    t3_with_weight(1)
}

/// [`t3`] with a different weight on `s0 -> s1`.
pub fn t3_with_weight(w01: u64) -> Pkwts {
    Pkwts::new(
        0,
        vec![vec![vec![1, 2]], vec![vec![3], vec![0]], vec![vec![3]], vec![vec![3]]],
        [((0, 1), w01), ((1, 3), 1), ((1, 0), 1), ((0, 2), 5), ((2, 3), 5), ((3, 3), 0)],
        labels(4, &[(3, "target")]),
        1,
    )
    .expect("fixture is valid")
}

/// Two unknown doors with different approach costs in front of one goal.
pub fn two_unknowns() -> Pkwts {
    Pkwts::new(
        0,
        vec![
            vec![vec![1, 2, 4]],
            vec![vec![3], vec![0]],
            vec![vec![3], vec![0]],
            vec![vec![3]],
            vec![vec![3]],
        ],
        [
            ((0, 1), 1),
            ((0, 2), 2),
            ((0, 4), 6),
            ((1, 3), 1),
            ((1, 0), 1),
            ((2, 3), 1),
            ((2, 0), 1),
            ((4, 3), 6),
            ((3, 3), 0),
        ],
        labels(5, &[(3, "target")]),
        1,
    )
    .expect("fixture is valid")
}

/// Automaton for `F target`.
pub fn eventually_target() -> Dfa {
    compile(&parse("F target").unwrap(), &["target"]).unwrap()
}

/// Three-by-three grid: the agent in the top-left corner must reach `f`.
/// A wall of unknown status separates `f` from the centre cell.
pub const FIG1_GRID: &str = include_str!("../fixtures/fig1.grid");

/// Larger grid for the fire/extinguisher task with two unknown regions.
pub const CASE_STUDY_GRID: &str = include_str!("../fixtures/case_study.grid");

/// Task of [`CASE_STUDY_GRID`].
pub const CASE_STUDY_TASK: &str = "(!fire U extinguisher) & F fire";
