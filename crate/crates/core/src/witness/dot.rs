//! Graphviz export.

use std::fmt::Write;

use super::graph::LabeledGraph;
use super::zigzag::{Extension, Zigzag};

/// Renders the graph, and the extension's additions as dashed edges. Edge
/// labels show the label's short hash, degree and color; zigzag edges are bold.
pub fn to_dot(g: &LabeledGraph, zigzag: Option<&Zigzag>, ext: Option<&Extension>) -> String {
    let mut out = String::from("digraph witness {\n  node [shape=circle];\n");
    for (i, n) in g.nodes().iter().enumerate() {
        let _ = writeln!(out, "  n{i} [label=\"{i}\\np{} d{}\"];", n.point, n.depth);
    }
    let on_zigzag = |e| zigzag.is_some_and(|z| z.edges.contains(&e));
    for (&(x, y), d) in g.edges() {
        let style = if on_zigzag((x, y)) { ", style=bold" } else { "" };
        let _ = writeln!(
            out,
            "  n{x} -> n{y} [label=\"{} d{} {}\"{style}];",
            d.label.short_id(),
            d.depth,
            d.label.color()
        );
    }
    if let Some(ext) = ext {
        if ext.fresh_node() {
            out.push_str("  h [label=\"h\", shape=doublecircle];\n");
        }
        let name = |end: Option<usize>| end.map_or("h".to_string(), |x| format!("n{x}"));
        for a in &ext.edges {
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{} d{} {}\", style=dashed, color=red];",
                name(a.from),
                name(a.to),
                a.label.short_id(),
                a.depth,
                a.label.color()
            );
        }
    }
    out.push_str("}\n");
    out
}
