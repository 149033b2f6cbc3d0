//! Graphviz export.

use std::fmt::Write;

use crate::netlist::{Circuit, SignalRef};

fn node(s: SignalRef) -> String {
    s.to_string()
}

/// Directed graph with inputs as sources, gates labelled by function, and
/// outputs `y<j>` and rails `z0`, `z1` as sinks. Rails are drawn as
/// diamonds. Dead gates are dashed.
pub fn export_dot(c: &Circuit) -> String {
    let live = c.live_mask();
    let mut s = String::from("digraph circuit {\n  rankdir=LR;\n");
    for i in 0..c.inputs {
        let _ = writeln!(s, "  x{i} [shape=box, label=\"x{i}\"];");
    }
    for (i, gate) in c.gates.iter().enumerate() {
        let style = if live[i] { "" } else { ", style=dashed" };
        let _ = writeln!(
            s,
            "  g{i} [shape=ellipse, label=\"g{i}\\n{}\"{style}];",
            gate.tt.name()
        );
    }
    for j in 0..c.outputs.len() {
        let _ = writeln!(s, "  y{j} [shape=doublecircle, label=\"y{j}\"];");
    }
    if c.rails.is_some() {
        for k in 0..2 {
            let _ = writeln!(s, "  z{k} [shape=diamond, label=\"z{k}\"];");
        }
    }
    for (i, gate) in c.gates.iter().enumerate() {
        let _ = writeln!(s, "  {} -> g{i} [label=\"a\"];", node(gate.a));
        let _ = writeln!(s, "  {} -> g{i} [label=\"b\"];", node(gate.b));
    }
    for (j, &y) in c.outputs.iter().enumerate() {
        let _ = writeln!(s, "  {} -> y{j};", node(y));
    }
    if let Some(rails) = c.rails {
        for (k, &z) in rails.iter().enumerate() {
            let _ = writeln!(s, "  {} -> z{k} [style=bold];", node(z));
        }
    }
    s.push_str("}\n");
    s
}
