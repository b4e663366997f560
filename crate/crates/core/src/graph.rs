//! Variable interaction graphs and factor graphs.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::adf::AdfInstance;
use crate::error::{Error, Result};

/// Undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionGraph {
    adjacency: Vec<BTreeSet<usize>>,
}

impl InteractionGraph {
    pub fn new(n: usize) -> Self {
        InteractionGraph {
            adjacency: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = InteractionGraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds `{u, v}`; returns whether the edge was new.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::Structural(format!("edge ({u}, {v}) out of range for n = {n}")));
        }
        if u == v {
            return Err(Error::Structural(format!("self-loop on vertex {u}")));
        }
        self.adjacency[v].insert(u);
        Ok(self.adjacency[u].insert(v))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u).is_some_and(|a| a.contains(&v))
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.range(u + 1..).map(move |&v| (u, v)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &u)| vertices[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }
}

/// Interaction graph: `{u, v}` is an edge iff `u != v` share a subfunction scope.
pub fn build_vig(instance: &AdfInstance) -> Result<InteractionGraph> {
    instance.require_white_structure()?;
    let mut g = InteractionGraph::new(instance.n());
    for sub in instance.subfunctions() {
        let scope = sub.scope();
        for (i, &u) in scope.iter().enumerate() {
            for &v in &scope[i + 1..] {
                g.add_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

/// Bipartite graph of variable nodes and one factor node per subfunction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorGraph {
    pub n_variables: usize,
    /// Scope of each factor node, in subfunction order.
    pub factors: Vec<Vec<usize>>,
}

impl FactorGraph {
    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor_degree(&self, factor: usize) -> usize {
        self.factors[factor].len()
    }

    /// Factor nodes adjacent to a variable.
    pub fn variable_factors(&self, variable: usize) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, scope)| scope.contains(&variable))
            .map(|(a, _)| a)
            .collect()
    }

    /// Incidence edges `(variable, factor)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.factors
            .iter()
            .enumerate()
            .flat_map(|(a, scope)| scope.iter().map(move |&v| (v, a)))
            .collect()
    }
}

pub fn build_factor_graph(instance: &AdfInstance) -> Result<FactorGraph> {
    instance.require_white_structure()?;
    Ok(FactorGraph {
        n_variables: instance.n(),
        factors: instance.subfunctions().iter().map(|s| s.scope().to_vec()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adf::{Subfunction, Visibility, Wgb};
    use crate::worked_example;

    fn inst(n: usize, scopes: &[&[usize]]) -> AdfInstance {
        AdfInstance::new(
            n,
            scopes
                .iter()
                .map(|s| Subfunction::new(s.to_vec(), vec![0.0; 1 << s.len()]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn worked_example_vig() {
        let g = build_vig(&worked_example::instance()).unwrap();
        assert_eq!(g.edge_count(), 20);
        for v in 0..10 {
            let expected: BTreeSet<usize> = [1, 2, 8, 9].iter().map(|d| (v + d) % 10).collect();
            assert_eq!(g.neighbors(v), &expected, "vertex {v}");
        }
    }

    #[test]
    fn single_scope_triangle() {
        let g = build_vig(&inst(3, &[&[0, 1, 2]])).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn separable_triangles() {
        let g = build_vig(&inst(6, &[&[0, 1, 2], &[3, 4, 5]])).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]);
    }

    #[test]
    fn factor_graphs_distinguish_same_vig() {
        let pairwise = build_factor_graph(&inst(3, &[&[0, 1], &[1, 2], &[0, 2]])).unwrap();
        assert_eq!(pairwise.num_factors(), 3);
        assert!((0..3).all(|a| pairwise.factor_degree(a) == 2));
        let triple = build_factor_graph(&inst(3, &[&[0, 1, 2]])).unwrap();
        assert_eq!(triple.num_factors(), 1);
        assert_eq!(triple.factor_degree(0), 3);
        assert_eq!(
            build_vig(&inst(3, &[&[0, 1], &[1, 2], &[0, 2]])).unwrap(),
            build_vig(&inst(3, &[&[0, 1, 2]])).unwrap()
        );
    }

    #[test]
    fn worked_example_factor_graph() {
        let fg = build_factor_graph(&worked_example::instance()).unwrap();
        assert_eq!(fg.num_factors(), 10);
        assert!((0..10).all(|a| fg.factor_degree(a) == 3));
        assert_eq!(fg.edges().len(), 30);
        assert_eq!(fg.variable_factors(0), vec![0, 8, 9]);
    }

    #[test]
    fn gray_structure_refused() {
        let mut i = inst(2, &[&[0, 1]]);
        i.set_wgb(Wgb {
            structure: Visibility::Black,
            subfunctions: Visibility::Black,
        });
        assert!(matches!(build_vig(&i), Err(Error::Visibility(_))));
        assert!(matches!(build_factor_graph(&i), Err(Error::Visibility(_))));
    }

    #[test]
    fn rejects_self_loops() {
        let mut g = InteractionGraph::new(3);
        assert!(g.add_edge(1, 1).is_err());
        assert!(g.add_edge(0, 3).is_err());
    }
}
