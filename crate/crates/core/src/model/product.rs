//! Synchronous product of a transition system with a task automaton.
//!
//! The automaton reads the label of every state the run enters, the initial
//! state included: the product starts in `(x0, f(q0, L(x0)))` and an edge
//! `x -> x'` moves the automaton on `L(x')`. Product vertex `(x, q)` has id
//! `x * |Q| + q`.

use super::graph::{dijkstra, WeightedGraph};
use super::{Pkwts, StateId, Wts};
use crate::cost::ExtCost;
use crate::error::Result;
use crate::formula::{Dfa, Letter};

/// Letter of every state's label.
pub fn label_letters<'a>(labels: impl Iterator<Item = &'a [String]>, a: &Dfa) -> Result<Vec<Letter>> {
    labels.map(|l| a.letter(l)).collect()
}

pub fn model_letters(m: &Pkwts, a: &Dfa) -> Result<Vec<Letter>> {
    label_letters((0..m.num_states()).map(|x| m.label(x)), a)
}

#[derive(Debug, Clone)]
pub struct Product<'a> {
    t: &'a Wts,
    a: &'a Dfa,
    letters: Vec<Letter>,
}

impl<'a> Product<'a> {
    pub fn id(&self, x: StateId, q: usize) -> usize {
        x * self.a.num_states() + q
    }

    pub fn split(&self, v: usize) -> (StateId, usize) {
        (v / self.a.num_states(), v % self.a.num_states())
    }

    pub fn initial(&self) -> usize {
        let x0 = self.t.initial();
        self.id(x0, self.a.step(self.a.initial(), self.letters[x0]))
    }

    pub fn is_accepting(&self, v: usize) -> bool {
        self.a.is_accepting(v % self.a.num_states())
    }

    pub fn accepting(&self) -> Vec<usize> {
        (0..self.num_vertices()).filter(|&v| self.is_accepting(v)).collect()
    }

    pub fn letter(&self, x: StateId) -> Letter {
        self.letters[x]
    }

    /// Cheapest accepting run from product vertex `from`, with the state
    /// sequence it visits.
    pub fn shortest_from(&self, from: usize) -> Result<Option<(u64, Vec<StateId>)>> {
        let targets = self.accepting();
        let sp = dijkstra(self, from, &targets)?;
        Ok(sp.nearest(targets).map(|(t, c)| {
            let states = sp.path_to(t).unwrap().into_iter().map(|v| self.split(v).0).collect();
            (c, states)
        }))
    }
}

impl WeightedGraph for Product<'_> {
    fn num_vertices(&self) -> usize {
        self.t.num_states() * self.a.num_states()
    }

    fn for_each_successor(&self, v: usize, f: &mut dyn FnMut(usize, i64)) {
        let (x, q) = self.split(v);
        for &y in self.t.successors(x) {
            let w = self.t.weight(x, y).expect("validated weight");
            f(self.id(y, self.a.step(q, self.letters[y])), w as i64);
        }
    }
}

/// Builds `t ⊗ a`. Fails if a label uses an atom outside the automaton's
/// alphabet.
pub fn product<'a>(t: &'a Wts, a: &'a Dfa) -> Result<Product<'a>> {
    let letters = label_letters((0..t.num_states()).map(|x| t.label(x)), a)?;
    Ok(Product { t, a, letters })
}

/// Cost of the cheapest run of `t` satisfying the task.
pub fn optimal_cost(t: &Wts, a: &Dfa) -> Result<ExtCost> {
    let p = product(t, a)?;
    Ok(p.shortest_from(p.initial())?.map_or(ExtCost::Infinite, |(c, _)| ExtCost::Finite(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn t3_optima() {
        let m = fixtures::t3();
        let a = fixtures::eventually_target();
        assert_eq!(optimal_cost(&m.env(&[0, 0, 0, 0]), &a).unwrap(), ExtCost::Finite(2));
        assert_eq!(optimal_cost(&m.env(&[0, 1, 0, 0]), &a).unwrap(), ExtCost::Finite(10));
        let t = m.env(&[0, 0, 0, 0]);
        let p = product(&t, &a).unwrap();
        assert_eq!(p.shortest_from(p.initial()).unwrap().unwrap().1, vec![0, 1, 3]);
    }

    #[test]
    fn initial_label_is_read() {
        // The run starts on the target, so the empty run already satisfies F target.
        let t = Wts::new(0, vec![vec![0]], [((0, 0), 0)], vec![vec!["target".into()]], 1).unwrap();
        let a = fixtures::eventually_target();
        assert_eq!(optimal_cost(&t, &a).unwrap(), ExtCost::ZERO);
    }

    #[test]
    fn label_outside_alphabet() {
        let t = fixtures::t3().env(&[0, 0, 0, 0]);
        let a = crate::formula::compile(&crate::formula::parse("F other").unwrap(), &["other"]).unwrap();
        assert!(matches!(product(&t, &a), Err(crate::error::Error::AtomMismatch(_))));
    }
}
