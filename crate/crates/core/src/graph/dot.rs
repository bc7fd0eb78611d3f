use std::fmt::Write;

use super::callgraph::{CallEdgeKind, CallGraph};
use super::cfg::{Cfg, EdgeKind};

fn esc(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering of the call graph. External stubs are drawn dashed.
pub fn call_graph_dot(cg: &CallGraph) -> String {
    let mut out = String::from("digraph callgraph {\n  node [shape=box];\n");
    for (i, n) in cg.nodes().iter().enumerate() {
        let style = if n.external { ", style=dashed" } else { "" };
        let _ = writeln!(out, "  n{i} [label=\"{}\"{style}];", esc(&n.method.to_string()));
    }
    for e in cg.edges() {
        let style = match e.kind {
            CallEdgeKind::Call => "",
            CallEdgeKind::Callback => " [style=dotted, label=\"callback\"]",
            CallEdgeKind::Transition => " [color=blue, label=\"intent\"]",
        };
        let _ = writeln!(out, "  n{} -> n{}{style};", e.caller, e.callee);
    }
    out.push_str("}\n");
    out
}

/// Graphviz rendering of a control-flow graph with block instruction ranges.
pub fn cfg_dot(cfg: &Cfg) -> String {
    let mut out = format!("digraph \"{}\" {{\n  node [shape=box];\n", esc(&cfg.method.to_string()));
    for (i, b) in cfg.blocks.iter().enumerate() {
        let label = if b.start == b.end { "entry".to_string() } else { format!("{}..{}", b.start, b.end - 1) };
        let _ = writeln!(out, "  b{i} [label=\"{label}\"];");
    }
    for (a, b, k) in &cfg.edges {
        let style = match k {
            EdgeKind::Exception => " [style=dashed]",
            EdgeKind::Branch => " [color=blue]",
            _ => "",
        };
        let _ = writeln!(out, "  b{a} -> b{b}{style};");
    }
    out.push_str("}\n");
    out
}
