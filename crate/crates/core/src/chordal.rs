//! Chordal completion by vertex elimination, chordality checks and tree-width.
//!
//! Heuristic orders break ties by the lowest vertex index, so completions are
//! reproducible. The exact tree-width routine is a subset dynamic program
//! meant for small fixtures.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Heuristic {
    /// Eliminate the vertex whose elimination adds the fewest edges.
    MinFill,
    /// Eliminate the vertex with the fewest remaining neighbors.
    MinDegree,
    /// Eliminate in the given order.
    GivenOrder(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordalCompletion {
    base: InteractionGraph,
    filled: InteractionGraph,
    fill_edges: Vec<(usize, usize)>,
    elimination_order: Vec<usize>,
}

impl ChordalCompletion {
    pub fn base(&self) -> &InteractionGraph {
        &self.base
    }

    /// Base graph plus fill edges.
    pub fn graph(&self) -> &InteractionGraph {
        &self.filled
    }

    /// Added edges as `(u, v)` with `u < v`, sorted.
    pub fn fill_edges(&self) -> &[(usize, usize)] {
        &self.fill_edges
    }

    pub fn elimination_order(&self) -> &[usize] {
        &self.elimination_order
    }

    /// Largest clique of the completed graph minus one.
    pub fn width(&self) -> usize {
        elimination_width(&self.filled, &self.elimination_order)
    }
}

pub fn triangulate(graph: &InteractionGraph, heuristic: &Heuristic) -> Result<ChordalCompletion> {
    let n = graph.n();
    if let Heuristic::GivenOrder(order) = heuristic {
        check_permutation(order, n)?;
    }
    let mut work: Vec<BTreeSet<usize>> = (0..n).map(|v| graph.neighbors(v).clone()).collect();
    let mut eliminated = vec![false; n];
    let mut filled = graph.clone();
    let mut fill_edges = Vec::new();
    let mut order = Vec::with_capacity(n);

    for step in 0..n {
        let v = match heuristic {
            Heuristic::GivenOrder(given) => given[step],
            Heuristic::MinDegree => (0..n)
                .filter(|&v| !eliminated[v])
                .min_by_key(|&v| (work[v].len(), v))
                .expect("a vertex remains"),
            Heuristic::MinFill => (0..n)
                .filter(|&v| !eliminated[v])
                .min_by_key(|&v| (fill_count(&work, v), v))
                .expect("a vertex remains"),
        };
        let nbrs: Vec<usize> = work[v].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if work[a].insert(b) {
                    work[b].insert(a);
                    filled.add_edge(a, b)?;
                    fill_edges.push((a.min(b), a.max(b)));
                }
            }
        }
        for &a in &nbrs {
            work[a].remove(&v);
        }
        work[v].clear();
        eliminated[v] = true;
        order.push(v);
    }
    fill_edges.sort_unstable();
    debug_assert!(is_perfect_elimination_order(&filled, &order));
    Ok(ChordalCompletion {
        base: graph.clone(),
        filled,
        fill_edges,
        elimination_order: order,
    })
}

fn fill_count(work: &[BTreeSet<usize>], v: usize) -> usize {
    let nbrs: Vec<usize> = work[v].iter().copied().collect();
    nbrs.iter()
        .enumerate()
        .map(|(i, &a)| nbrs[i + 1..].iter().filter(|&&b| !work[a].contains(&b)).count())
        .sum()
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Structural(format!(
            "elimination order has {} entries for {n} vertices",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::Structural(format!(
                "elimination order is not a permutation (at {v})"
            )));
        }
    }
    Ok(())
}

/// True when eliminating `order` on `graph` adds no edge, i.e. each vertex's
/// later neighbors form a clique.
pub fn is_perfect_elimination_order(graph: &InteractionGraph, order: &[usize]) -> bool {
    if check_permutation(order, graph.n()).is_err() {
        return false;
    }
    let mut position = vec![0; graph.n()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    order.iter().all(|&v| {
        let later: Vec<usize> = graph
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| position[u] > position[v])
            .collect();
        graph.is_clique(&later)
    })
}

/// Maximum cardinality search order (lowest index wins ties), reversed so
/// that it is a perfect elimination order whenever the graph is chordal.
pub fn mcs_elimination_order(graph: &InteractionGraph) -> Vec<usize> {
    let n = graph.n();
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut visit = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !visited[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("a vertex remains");
        visited[v] = true;
        visit.push(v);
        for &u in graph.neighbors(v) {
            if !visited[u] {
                weight[u] += 1;
            }
        }
    }
    visit.reverse();
    visit
}

pub fn is_chordal(graph: &InteractionGraph) -> bool {
    is_perfect_elimination_order(graph, &mcs_elimination_order(graph))
}

fn elimination_width(filled: &InteractionGraph, order: &[usize]) -> usize {
    let mut position = vec![0; filled.n()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    order
        .iter()
        .map(|&v| {
            filled
                .neighbors(v)
                .iter()
                .filter(|&&u| position[u] > position[v])
                .count()
        })
        .max()
        .unwrap_or(0)
}

/// Upper bound on tree-width: largest clique of the heuristic completion minus one.
pub fn treewidth_estimate(graph: &InteractionGraph, heuristic: &Heuristic) -> Result<usize> {
    Ok(triangulate(graph, heuristic)?.width())
}

/// Largest graph accepted by [`exact_treewidth`].
pub const EXACT_TREEWIDTH_LIMIT: usize = 16;

/// Exact tree-width by dynamic programming over vertex subsets,
/// `TW(S) = min_{v in S} max(TW(S \ v), |Q(S \ v, v)|)`, where `Q(S, v)` is the
/// set of vertices outside `S ∪ {v}` reachable from `v` through `S`.
pub fn exact_treewidth(graph: &InteractionGraph) -> Result<usize> {
    let n = graph.n();
    if n > EXACT_TREEWIDTH_LIMIT {
        return Err(Error::Capacity {
            n,
            limit: EXACT_TREEWIDTH_LIMIT,
        });
    }
    if n == 0 {
        return Ok(0);
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let full = (1u32 << n) - 1;
    // tw[S] stores the best width for eliminating S first; -1 encodes the empty set.
    let mut tw = vec![i32::MAX; 1 << n];
    tw[0] = -1;
    for set in 1..=full {
        let mut best = i32::MAX;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let without = set & !(1 << v);
            let q = reachable_outside(&adj, without, v, full).count_ones() as i32;
            best = best.min(tw[without as usize].max(q));
        }
        tw[set as usize] = best;
    }
    Ok(tw[full as usize].max(0) as usize)
}

fn reachable_outside(adj: &[u32], inner: u32, start: usize, full: u32) -> u32 {
    let mut seen = 1u32 << start;
    let mut frontier = VecDeque::from([start]);
    let mut outside = 0u32;
    while let Some(v) = frontier.pop_front() {
        let mut nb = adj[v] & full & !seen;
        seen |= nb;
        while nb != 0 {
            let u = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            if inner & (1 << u) != 0 {
                frontier.push_back(u);
            } else {
                outside |= 1 << u;
            }
        }
    }
    outside
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_vig;
    use crate::worked_example;

    fn cycle(n: usize) -> InteractionGraph {
        InteractionGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn triangle_needs_no_fill() {
        let g = InteractionGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        for h in [
            Heuristic::MinFill,
            Heuristic::MinDegree,
            Heuristic::GivenOrder(vec![2, 0, 1]),
        ] {
            let c = triangulate(&g, &h).unwrap();
            assert!(c.fill_edges().is_empty());
            assert_eq!(c.width(), 2);
        }
    }

    #[test]
    fn reference_fill_from_given_order() {
        let g = build_vig(&worked_example::instance()).unwrap();
        let c = triangulate(&g, &Heuristic::GivenOrder(worked_example::elimination_order())).unwrap();
        let mut expected = worked_example::FILL_EDGES.to_vec();
        expected.sort_unstable();
        assert_eq!(c.fill_edges(), expected.as_slice());
        assert!(is_chordal(c.graph()));
        assert_eq!(c.width(), 4);
    }

    #[test]
    fn min_fill_on_worked_example() {
        let g = build_vig(&worked_example::instance()).unwrap();
        let c = triangulate(&g, &Heuristic::MinFill).unwrap();
        assert!(is_chordal(c.graph()));
        assert!(is_perfect_elimination_order(c.graph(), c.elimination_order()));
        assert_eq!(c.width() + 1, 5);
    }

    #[test]
    fn cycle_is_not_chordal_until_filled() {
        let g = cycle(6);
        assert!(!is_chordal(&g));
        let c = triangulate(&g, &Heuristic::MinDegree).unwrap();
        assert_eq!(c.fill_edges().len(), 3);
        assert!(is_chordal(c.graph()));
        assert_eq!(exact_treewidth(&g).unwrap(), 2);
    }

    #[test]
    fn exact_treewidth_small_graphs() {
        assert_eq!(exact_treewidth(&InteractionGraph::new(4)).unwrap(), 0);
        let path = InteractionGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(exact_treewidth(&path).unwrap(), 1);
        let k5 = InteractionGraph::from_edges(5, (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v)))).unwrap();
        assert_eq!(exact_treewidth(&k5).unwrap(), 4);
        // 3x3 grid has tree-width 3
        let grid = InteractionGraph::from_edges(
            9,
            (0..9).flat_map(|v| {
                let mut e = Vec::new();
                if v % 3 < 2 {
                    e.push((v, v + 1));
                }
                if v < 6 {
                    e.push((v, v + 3));
                }
                e
            }),
        )
        .unwrap();
        assert_eq!(exact_treewidth(&grid).unwrap(), 3);
    }

    #[test]
    fn worked_example_exact_treewidth() {
        let g = build_vig(&worked_example::instance()).unwrap();
        assert_eq!(exact_treewidth(&g).unwrap(), 4);
        assert_eq!(treewidth_estimate(&g, &Heuristic::MinFill).unwrap(), 4);
    }

    #[test]
    fn given_order_must_be_permutation() {
        let g = cycle(4);
        assert!(triangulate(&g, &Heuristic::GivenOrder(vec![0, 1, 1, 2])).is_err());
        assert!(triangulate(&g, &Heuristic::GivenOrder(vec![0, 1])).is_err());
    }

    #[test]
    fn exact_limit() {
        assert!(matches!(
            exact_treewidth(&InteractionGraph::new(EXACT_TREEWIDTH_LIMIT + 1)),
            Err(Error::Capacity { .. })
        ));
    }
}
