//! Junction trees over chordal completions and the ordered factorizations
//! read off them.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chordal::{is_perfect_elimination_order, ChordalCompletion};
use crate::error::{Error, Result};
use crate::graph::InteractionGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub separator: Vec<usize>,
}

/// Maximal cliques of a chordal graph joined by a maximum-weight spanning tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JunctionTree {
    n: usize,
    cliques: Vec<Vec<usize>>,
    edges: Vec<TreeEdge>,
    treewidth: usize,
}

impl JunctionTree {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cliques, each sorted, in lexicographic order.
    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn treewidth(&self) -> usize {
        self.treewidth
    }

    pub fn clique_index(&self, clique: &[usize]) -> Option<usize> {
        let mut sorted = clique.to_vec();
        sorted.sort_unstable();
        self.cliques.iter().position(|c| *c == sorted)
    }

    /// For every vertex, the cliques containing it induce a connected subtree.
    pub fn has_running_intersection(&self) -> bool {
        (0..self.n).all(|v| {
            let containing = self.cliques.iter().filter(|c| c.binary_search(&v).is_ok()).count();
            let linking = self
                .edges
                .iter()
                .filter(|e| self.cliques[e.a].binary_search(&v).is_ok() && self.cliques[e.b].binary_search(&v).is_ok())
                .count();
            containing >= 1 && linking + 1 == containing
        })
    }

    /// Every edge of `graph` lies inside some clique.
    pub fn covers_edges_of(&self, graph: &InteractionGraph) -> bool {
        graph.edges().into_iter().all(|(u, v)| {
            self.cliques
                .iter()
                .any(|c| c.binary_search(&u).is_ok() && c.binary_search(&v).is_ok())
        })
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.cliques.len()];
        for (idx, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, idx));
            adj[e.b].push((e.a, idx));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Builds the junction tree of a completion. Fails if the completion's
/// elimination order leaves the graph non-chordal.
pub fn junction_tree(completion: &ChordalCompletion) -> Result<JunctionTree> {
    let graph = completion.graph();
    let order = completion.elimination_order();
    if !is_perfect_elimination_order(graph, order) {
        return Err(Error::Structural(
            "completion is not chordal under its elimination order".into(),
        ));
    }
    Ok(build_from_peo(graph, order))
}

/// Junction tree of an arbitrary chordal graph.
pub fn junction_tree_of_chordal(graph: &InteractionGraph) -> Result<JunctionTree> {
    let order = crate::chordal::mcs_elimination_order(graph);
    if !is_perfect_elimination_order(graph, &order) {
        return Err(Error::Structural("graph is not chordal".into()));
    }
    Ok(build_from_peo(graph, &order))
}

fn build_from_peo(graph: &InteractionGraph, order: &[usize]) -> JunctionTree {
    let n = graph.n();
    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut candidates: Vec<Vec<usize>> = order
        .iter()
        .map(|&v| {
            let mut c: Vec<usize> = std::iter::once(v)
                .chain(
                    graph
                        .neighbors(v)
                        .iter()
                        .copied()
                        .filter(|&u| position[u] > position[v]),
                )
                .collect();
            c.sort_unstable();
            c
        })
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    let cliques: Vec<Vec<usize>> = candidates
        .iter()
        .filter(|c| !candidates.iter().any(|d| d.len() > c.len() && is_subset(c, d)))
        .cloned()
        .collect();

    let mut pairs = Vec::new();
    for i in 0..cliques.len() {
        for j in i + 1..cliques.len() {
            pairs.push((intersection(&cliques[i], &cliques[j]), i, j));
        }
    }
    pairs.sort_by(|x, y| y.0.len().cmp(&x.0.len()).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut parent: Vec<usize> = (0..cliques.len()).collect();
    let mut edges = Vec::new();
    for (sep, i, j) in pairs {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            edges.push(TreeEdge {
                a: i,
                b: j,
                separator: sep,
            });
        }
    }
    let treewidth = cliques.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1);
    JunctionTree {
        n,
        cliques,
        edges,
        treewidth,
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn is_subset(small: &[usize], large: &[usize]) -> bool {
    small.iter().all(|v| large.binary_search(v).is_ok())
}

fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|v| b.binary_search(v).is_ok()).collect()
}

/// One term `p(new | conditioning)` of a factorization. Both lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub new: Vec<usize>,
    #[serde(default)]
    pub conditioning: Vec<usize>,
}

impl Factor {
    /// Conditioning variables followed by new variables; table index layout.
    pub fn scope(&self) -> Vec<usize> {
        self.conditioning.iter().chain(&self.new).copied().collect()
    }
}

/// Ordered product of conditional factors in which every variable is
/// introduced exactly once and conditioning variables are introduced earlier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    n: usize,
    factors: Vec<Factor>,
}

impl Factorization {
    pub fn new(n: usize, mut factors: Vec<Factor>) -> Result<Self> {
        for f in &mut factors {
            f.new.sort_unstable();
            f.conditioning.sort_unstable();
        }
        let fz = Factorization { n, factors };
        fz.validate()?;
        Ok(fz)
    }

    /// Product of independent single-variable marginals.
    pub fn univariate(n: usize) -> Self {
        Factorization {
            n,
            factors: (0..n)
                .map(|v| Factor {
                    new: vec![v],
                    conditioning: vec![],
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn validate(&self) -> Result<()> {
        let mut introduced = vec![false; self.n];
        for (i, f) in self.factors.iter().enumerate() {
            if f.new.is_empty() {
                return Err(Error::Structural(format!("factor {i} introduces no variable")));
            }
            if f.new.len() + f.conditioning.len() > 30 {
                return Err(Error::Structural(format!(
                    "factor {i} is too large for an explicit table"
                )));
            }
            for &c in &f.conditioning {
                if c >= self.n || !introduced[c] {
                    return Err(Error::Structural(format!(
                        "factor {i} conditions on variable {c} before it is introduced"
                    )));
                }
            }
            for &v in &f.new {
                if v >= self.n {
                    return Err(Error::Structural(format!("factor {i} references variable {v} >= n")));
                }
                if std::mem::replace(&mut introduced[v], true) {
                    return Err(Error::Structural(format!("variable {v} is introduced twice")));
                }
            }
        }
        if let Some(v) = introduced.iter().position(|&b| !b) {
            return Err(Error::Structural(format!("variable {v} is never introduced")));
        }
        Ok(())
    }

    pub fn from_json(document: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            factors: Vec<Factor>,
        }
        let raw: Raw = serde_json::from_str(document).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        Factorization::new(raw.n, raw.factors)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("factorization is always serializable")
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = |vs: &[usize]| vs.iter().map(|v| format!("x{v}")).collect::<String>();
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            if factor.conditioning.is_empty() {
                write!(f, "p({})", vars(&factor.new))?;
            } else {
                write!(f, "p({}|{})", vars(&factor.new), vars(&factor.conditioning))?;
            }
        }
        Ok(())
    }
}

/// Factorization rooted at clique `root`: the root contributes its full
/// joint, every other clique contributes `p(clique \ sep | sep)` where `sep`
/// is the separator to its parent. Cliques are visited breadth first with
/// children in ascending index order; disconnected components are rooted at
/// their lowest clique.
pub fn factorization_from_jt(jt: &JunctionTree, root: usize) -> Result<Factorization> {
    if root >= jt.cliques.len() {
        return Err(Error::Structural(format!(
            "root clique {root} out of range ({} cliques)",
            jt.cliques.len()
        )));
    }
    let adj = jt.adjacency();
    let mut visited = vec![false; jt.cliques.len()];
    let mut factors = Vec::with_capacity(jt.cliques.len());
    let roots = std::iter::once(root).chain(0..jt.cliques.len());
    for start in roots {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut queue = VecDeque::from([(start, None::<usize>)]);
        while let Some((c, via)) = queue.pop_front() {
            let conditioning = via.map(|e| jt.edges[e].separator.clone()).unwrap_or_default();
            let new = jt.cliques[c]
                .iter()
                .copied()
                .filter(|v| conditioning.binary_search(v).is_err())
                .collect();
            factors.push(Factor { new, conditioning });
            for &(child, e) in &adj[c] {
                if !visited[child] {
                    visited[child] = true;
                    queue.push_back((child, Some(e)));
                }
            }
        }
    }
    Factorization::new(jt.n, factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::{triangulate, Heuristic};
    use crate::graph::build_vig;
    use crate::worked_example;

    fn factor(new: &[usize], cond: &[usize]) -> Factor {
        Factor {
            new: new.to_vec(),
            conditioning: cond.to_vec(),
        }
    }

    #[test]
    fn chain_graph() {
        let g = InteractionGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let jt = junction_tree(&triangulate(&g, &Heuristic::MinFill).unwrap()).unwrap();
        assert_eq!(jt.cliques(), &[vec![0, 1], vec![1, 2]]);
        assert_eq!(jt.edges()[0].separator, vec![1]);
        let fz = factorization_from_jt(&jt, 0).unwrap();
        assert_eq!(fz.factors(), &[factor(&[0, 1], &[]), factor(&[2], &[1])]);
        assert_eq!(fz.to_string(), "p(x0x1)·p(x2|x1)");
    }

    #[test]
    fn worked_example_tree() {
        let g = build_vig(&worked_example::instance()).unwrap();
        let c = triangulate(&g, &Heuristic::GivenOrder(worked_example::elimination_order())).unwrap();
        let jt = junction_tree(&c).unwrap();
        let expected: Vec<Vec<usize>> = worked_example::CLIQUES.iter().map(|c| c.to_vec()).collect();
        assert_eq!(jt.cliques(), expected.as_slice());
        assert_eq!(jt.treewidth(), 4);
        assert!(jt.has_running_intersection());
        assert!(jt.covers_edges_of(c.graph()));
        let root = jt.clique_index(&[0, 1, 2, 8, 9]).unwrap();
        let fz = factorization_from_jt(&jt, root).unwrap();
        assert_eq!(
            fz.to_string(),
            "p(x0x1x2x8x9)·p(x3|x1x2x8x9)·p(x4|x2x3x8x9)·p(x5|x3x4x8x9)·p(x6|x4x5x8x9)·p(x7|x5x6x8x9)"
        );
    }

    #[test]
    fn separable_blocks_are_independent() {
        let g = InteractionGraph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap();
        let jt = junction_tree(&triangulate(&g, &Heuristic::MinDegree).unwrap()).unwrap();
        assert_eq!(jt.cliques().len(), 2);
        assert!(jt.edges()[0].separator.is_empty());
        assert_eq!(jt.treewidth(), 2);
        let fz = factorization_from_jt(&jt, 1).unwrap();
        assert_eq!(fz.factors(), &[factor(&[3, 4, 5], &[]), factor(&[0, 1, 2], &[])]);
    }

    #[test]
    fn invalid_root() {
        let g = InteractionGraph::from_edges(2, [(0, 1)]).unwrap();
        let jt = junction_tree(&triangulate(&g, &Heuristic::MinFill).unwrap()).unwrap();
        assert!(matches!(factorization_from_jt(&jt, 3), Err(Error::Structural(_))));
    }

    #[test]
    fn non_chordal_input_rejected() {
        let cycle = InteractionGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(junction_tree_of_chordal(&cycle).is_err());
    }

    #[test]
    fn factorization_validation() {
        assert!(Factorization::new(2, vec![factor(&[1], &[0]), factor(&[0], &[])]).is_err());
        assert!(Factorization::new(2, vec![factor(&[0, 1], &[]), factor(&[1], &[])]).is_err());
        assert!(Factorization::new(3, vec![factor(&[0, 1], &[])]).is_err());
        let ok = Factorization::new(2, vec![factor(&[0], &[]), factor(&[1], &[0])]).unwrap();
        assert_eq!(Factorization::from_json(&ok.to_json()).unwrap(), ok);
    }
}
