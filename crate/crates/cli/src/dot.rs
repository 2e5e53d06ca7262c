use std::fmt::Write;

use rflx_core::model::{Expr, FieldId, MessageGraph};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph with one node per field and sentinel and one edge per model
/// edge, labeled `(condition, length, first)`. `⊤` marks an always-true
/// condition and `∗` the default first bit (end of the source field).
pub fn to_dot(g: &MessageGraph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(g.name())).unwrap();
    writeln!(out, "    node [shape=box];").unwrap();
    for node in g.nodes() {
        let label = match &node {
            FieldId::Field(name) => format!("{name} : {}", g.field(&node).map_or("?", |f| f.type_name.as_str())),
            sentinel => sentinel.to_string(),
        };
        let shape = if node.is_sentinel() { ", shape=ellipse" } else { "" };
        writeln!(out, "    {} [label={}{shape}];", quote(&node.to_string()), quote(&label)).unwrap();
    }
    for (i, e) in g.edges().iter().enumerate() {
        let condition = if e.condition == Expr::True { "⊤".to_string() } else { e.condition.to_string() };
        let first = if e.has_default_first() { "∗".to_string() } else { e.first.to_string() };
        let label = format!("{i}: ({condition}, {}, {first})", e.length);
        writeln!(out, "    {} -> {} [label={}];", quote(&e.source.to_string()), quote(&e.target.to_string()), quote(&label))
            .unwrap();
    }
    out.push_str("}\n");
    out
}
