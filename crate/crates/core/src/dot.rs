//! Graphviz export.

use std::fmt::Write as _;

use crate::diagram::{BratteliDiagram, VertexId};

fn node_name(v: VertexId) -> String {
    format!("v{}_{}", v.level, v.index)
}

/// Deterministic DOT digraph: one `rank=same` group per level, marked
/// vertices drawn as boxes, one edge statement per parallel edge.
pub fn to_dot(d: &BratteliDiagram) -> String {
    let mut out = String::from("digraph bratteli {\n  rankdir=TB;\n  node [shape=circle];\n");
    for level in 1..=d.num_levels() {
        let _ = writeln!(out, "  subgraph level_{level} {{\n    rank=same;");
        for v in d.level_vertices(level) {
            let shape = if d.is_marked(v) { ", shape=box" } else { "" };
            let _ = writeln!(out, "    {} [label=\"d={}\"{shape}];", node_name(v), d.label(v));
        }
        out.push_str("  }\n");
    }
    for e in d.edges() {
        let _ = writeln!(out, "  {} -> {};", node_name(e.source()), node_name(e.range()));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::fixtures::*;
    use crate::kumjian::complete;
    use std::collections::BTreeSet;

    fn count(dot: &str) -> (usize, usize) {
        let nodes = dot.lines().filter(|l| l.contains("[label=")).count();
        let edges = dot.lines().filter(|l| l.contains(" -> ")).count();
        (nodes, edges)
    }

    #[test]
    fn example_a_completion() {
        let dot = to_dot(complete(&example_a()).unwrap().ke());
        assert_eq!(count(&dot), (3, 3));
        assert!(dot.contains("v1_0 [label=\"d=1\", shape=box];"));
        assert_eq!(dot.matches("v2_0 -> v3_0;").count(), 2);
    }

    #[test]
    fn single_vertex() {
        let d = BratteliDiagram::from_parts(vec![vec![4]], vec![], BTreeSet::new());
        assert_eq!(count(&to_dot(&d)), (1, 0));
    }

    #[test]
    fn fibonacci_completion_has_seven_nodes() {
        let dot = to_dot(complete(&fibonacci()).unwrap().ke());
        assert_eq!(count(&dot).0, 7);
        assert_eq!(dot, to_dot(complete(&fibonacci()).unwrap().ke()));
    }
}
