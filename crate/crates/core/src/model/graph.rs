//! Shortest paths over small weighted digraphs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::cost::ExtCost;
use crate::error::{Error, Result};

/// Read-only adjacency view used by [`dijkstra`].
pub trait WeightedGraph {
    fn num_vertices(&self) -> usize;
    fn for_each_successor(&self, v: usize, f: &mut dyn FnMut(usize, i64));
}

/// Plain adjacency-list digraph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Digraph {
    pub succ: Vec<Vec<(usize, i64)>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph { succ: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, w: i64) {
        self.succ[from].push((to, w));
    }
}

impl WeightedGraph for Digraph {
    fn num_vertices(&self) -> usize {
        self.succ.len()
    }

    fn for_each_successor(&self, v: usize, f: &mut dyn FnMut(usize, i64)) {
        for &(t, w) in &self.succ[v] {
            f(t, w);
        }
    }
}

/// Single-source distances with predecessor links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<ExtCost>,
    pub pred: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Vertex sequence from the source to `t`, if `t` was reached.
    pub fn path_to(&self, t: usize) -> Option<Vec<usize>> {
        if !self.dist[t].is_finite() {
            return None;
        }
        let mut path = vec![t];
        let mut v = t;
        while let Some(p) = self.pred[v] {
            path.push(p);
            v = p;
        }
        path.reverse();
        Some(path)
    }

    /// Closest target; ties go to the smallest vertex id.
    pub fn nearest(&self, targets: impl IntoIterator<Item = usize>) -> Option<(usize, u64)> {
        targets
            .into_iter()
            .filter_map(|t| self.dist[t].finite().map(|d| (d, t)))
            .min()
            .map(|(d, t)| (t, d))
    }
}

/// Dijkstra from `source`. Vertices are settled in `(distance, id)` order,
/// so equal-cost alternatives resolve to the smallest id. The search stops
/// once every vertex of `targets` is settled; pass an empty slice to settle
/// everything reachable.
pub fn dijkstra<G: WeightedGraph + ?Sized>(g: &G, source: usize, targets: &[usize]) -> Result<ShortestPaths> {
    let n = g.num_vertices();
    let mut dist = vec![ExtCost::Infinite; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut is_target = vec![false; n];
    let mut pending = 0usize;
    for &t in targets {
        if !is_target[t] {
            is_target[t] = true;
            pending += 1;
        }
    }
    let mut heap = BinaryHeap::new();
    dist[source] = ExtCost::ZERO;
    heap.push(Reverse((0u64, source)));
    let mut negative = None;
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if is_target[v] {
            pending -= 1;
            if pending == 0 {
                break;
            }
        }
        g.for_each_successor(v, &mut |t, w| {
            if w < 0 {
                negative.get_or_insert((v, t));
                return;
            }
            let nd = ExtCost::Finite(d) + w as u64;
            if nd < dist[t] {
                dist[t] = nd;
                pred[t] = Some(v);
                if let ExtCost::Finite(c) = nd {
                    heap.push(Reverse((c, t)));
                }
            }
        });
        if let Some((from, to)) = negative {
            return Err(Error::NegativeWeight { from, to });
        }
    }
    Ok(ShortestPaths { source, dist, pred })
}

/// Multi-source Dijkstra where source `s` starts with label `offset`
/// (offsets may be negative). Returns the least `offset(s) + dist(s, v)`
/// over all sources, or `None` when no source reaches `v`.
pub fn dijkstra_offsets<G: WeightedGraph + ?Sized>(g: &G, sources: &[(usize, i64)]) -> Result<Vec<Option<i64>>> {
    let n = g.num_vertices();
    let mut label: Vec<Option<i64>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &(s, off) in sources {
        if label[s].is_none_or(|l| off < l) {
            label[s] = Some(off);
            heap.push(Reverse((off, s)));
        }
    }
    let mut negative = None;
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        g.for_each_successor(v, &mut |t, w| {
            if w < 0 {
                negative.get_or_insert((v, t));
                return;
            }
            let nd = d.saturating_add(w);
            if label[t].is_none_or(|l| nd < l) {
                label[t] = Some(nd);
                heap.push(Reverse((nd, t)));
            }
        });
        if let Some((from, to)) = negative {
            return Err(Error::NegativeWeight { from, to });
        }
    }
    Ok(label)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Digraph {
        let mut g = Digraph::new(4);
        g.add_edge(0, 1, 1);
        g.add_edge(0, 2, 1);
        g.add_edge(1, 3, 1);
        g.add_edge(2, 3, 1);
        g
    }

    #[test]
    fn ties_prefer_smaller_ids() {
        let sp = dijkstra(&diamond(), 0, &[]).unwrap();
        assert_eq!(sp.dist[3], ExtCost::Finite(2));
        assert_eq!(sp.path_to(3).unwrap(), vec![0, 1, 3]);
        assert_eq!(sp.nearest([2, 1]), Some((1, 1)));
    }

    #[test]
    fn unreachable_and_source_target() {
        let mut g = diamond();
        g.succ.push(Vec::new());
        let sp = dijkstra(&g, 0, &[0]).unwrap();
        assert_eq!(sp.dist[0], ExtCost::ZERO);
        let full = dijkstra(&g, 0, &[]).unwrap();
        assert_eq!(full.dist[4], ExtCost::Infinite);
        assert!(full.path_to(4).is_none());
    }

    #[test]
    fn negative_weight_is_rejected() {
        let mut g = Digraph::new(2);
        g.add_edge(0, 1, -1);
        assert!(matches!(dijkstra(&g, 0, &[]), Err(Error::NegativeWeight { from: 0, to: 1 })));
    }

    #[test]
    fn offsets_take_minimum() {
        let g = diamond();
        let l = dijkstra_offsets(&g, &[(1, -5), (2, 0)]).unwrap();
        assert_eq!(l[3], Some(-4));
        assert_eq!(l[0], None);
    }
}
