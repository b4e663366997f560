//! Graphviz DOT export.

use std::fmt::Write as _;

use crate::chordal::ChordalCompletion;
use crate::graph::{FactorGraph, InteractionGraph};
use crate::junction::JunctionTree;

pub fn interaction_graph(graph: &InteractionGraph) -> String {
    let mut out = String::from("graph vig {\n");
    for v in 0..graph.n() {
        writeln!(out, "  {v};").unwrap();
    }
    for (u, v) in graph.edges() {
        writeln!(out, "  {u} -- {v};").unwrap();
    }
    out.push_str("}\n");
    out
}

/// Completed graph; fill edges are dashed.
pub fn chordal_completion(completion: &ChordalCompletion) -> String {
    let mut out = String::from("graph chordal {\n");
    for v in 0..completion.base().n() {
        writeln!(out, "  {v};").unwrap();
    }
    for (u, v) in completion.base().edges() {
        writeln!(out, "  {u} -- {v};").unwrap();
    }
    for (u, v) in completion.fill_edges() {
        writeln!(out, "  {u} -- {v} [style=dashed];").unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn factor_graph(fg: &FactorGraph) -> String {
    let mut out = String::from("graph factors {\n");
    for v in 0..fg.n_variables {
        writeln!(out, "  x{v} [shape=circle];").unwrap();
    }
    for a in 0..fg.num_factors() {
        writeln!(out, "  f{a} [shape=box];").unwrap();
    }
    for (v, a) in fg.edges() {
        writeln!(out, "  x{v} -- f{a};").unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn junction_tree(jt: &JunctionTree) -> String {
    let join = |vs: &[usize]| vs.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let mut out = String::from("graph junction_tree {\n");
    for (i, c) in jt.cliques().iter().enumerate() {
        writeln!(out, "  c{i} [shape=ellipse, label=\"{{{}}}\"];", join(c)).unwrap();
    }
    for e in jt.edges() {
        writeln!(out, "  c{} -- c{} [label=\"{{{}}}\"];", e.a, e.b, join(&e.separator)).unwrap();
    }
    out.push_str("}\n");
    out
}
