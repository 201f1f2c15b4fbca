//! Reference automata and structural checks shared by the automaton tests
//! and the acceptance run.

use std::collections::VecDeque;

use regretplan::formula::{Dfa, Letter};

/// Hand-built automata over atoms `a`, `b`.
pub const REFERENCE_FORMULAS: [&str; 3] = ["F a", "a U b", "(!a U b) & F a"];

pub fn words(letters: u32, max_len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..letters {
                let mut v: Vec<Letter> = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Table automaton: `delta[q][letter]`, accepting set, initial state 0.
pub struct Table {
    pub delta: Vec<[usize; 4]>,
    pub accepting: Vec<bool>,
}

impl Table {
    pub fn accepts(&self, w: &[Letter]) -> bool {
        let q = w.iter().fold(0, |q, &l| self.delta[q][l as usize]);
        self.accepting[q]
    }
}

pub fn reference(name: &str) -> Table {
    // Letter order: {}, {a}, {b}, {a,b}.
    match name {
        "F a" => Table { delta: vec![[0, 1, 0, 1], [1, 1, 1, 1]], accepting: vec![false, true] },
        "a U b" => Table { delta: vec![[2, 0, 1, 1], [1, 1, 1, 1], [2, 2, 2, 2]], accepting: vec![false, true, false] },
        // 0: start, 1: b seen before any violation but a still owed,
        // 2: accepted, 3: dead.
        "(!a U b) & F a" => Table {
            delta: vec![[0, 3, 1, 2], [1, 2, 1, 2], [2, 2, 2, 2], [3, 3, 3, 3]],
            accepting: vec![false, false, true, false],
        },
        _ => unreachable!(),
    }
}

pub fn check_closed_and_minimal(dfa: &Dfa) -> Result<(), String> {
    let n = dfa.num_states();
    let letters = dfa.num_letters() as Letter;
    for q in dfa.accepting_states() {
        if (0..letters).any(|l| dfa.step(q, l) != q) {
            return Err(format!("accepting state {q} is not absorbing"));
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([dfa.initial()]);
    seen[dfa.initial()] = true;
    while let Some(q) = queue.pop_front() {
        for l in 0..letters {
            let t = dfa.step(q, l);
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err("unreachable state".into());
    }
    // Pairwise distinguishability by backward propagation from pairs that
    // differ in acceptance.
    let mut dist = vec![vec![false; n]; n];
    for p in 0..n {
        for q in 0..n {
            dist[p][q] = dfa.is_accepting(p) != dfa.is_accepting(q);
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for p in 0..n {
            for q in 0..n {
                if !dist[p][q] && (0..letters).any(|l| dist[dfa.step(p, l)][dfa.step(q, l)]) {
                    dist[p][q] = true;
                    changed = true;
                }
            }
        }
    }
    for p in 0..n {
        for q in p + 1..n {
            if !dist[p][q] {
                return Err(format!("states {p} and {q} are equivalent"));
            }
        }
    }
    Ok(())
}
