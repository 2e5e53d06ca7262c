mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rflx_core::derive::paths_to;
use rflx_core::model::{type_check_expression, validate_graph, Edge, Expr, FieldId, MessageGraph, ModelError, Sort};

const GRAPHS: [&str; 2] = ["Ethernet.Frame", "TLS_Heartbeat.Heartbeat_Message"];

fn with_edges(g: &MessageGraph, edges: Vec<Edge>) -> MessageGraph {
    MessageGraph::new(g.name(), g.fields().clone(), edges)
}

/// Fields that lie on every path to `node`, including `node` itself.
fn dominators(g: &MessageGraph, node: &FieldId) -> BTreeSet<String> {
    let paths = paths_to(g, node);
    let on = |p: &rflx_core::derive::Path| -> BTreeSet<String> {
        p.edges().iter().filter_map(|&i| g.edge(i).target.name().map(str::to_string)).collect()
    };
    let mut sets = paths.iter().map(on);
    let first = sets.next().unwrap_or_default();
    sets.fold(first, |acc, s| acc.intersection(&s).cloned().collect())
}

fn cycle_mutants(g: &MessageGraph) -> Vec<MessageGraph> {
    let fields: Vec<FieldId> = g.fields().keys().map(|n| FieldId::named(n)).collect();
    let mut out = Vec::new();
    for (i, later) in fields.iter().enumerate() {
        for earlier in &fields[..=i] {
            let mut edges = g.edges().to_vec();
            edges.push(Edge::new(later.clone(), earlier.clone(), Expr::Const(8)));
            out.push(with_edges(g, edges));
        }
    }
    out
}

fn forward_reference_mutants(g: &MessageGraph) -> Vec<MessageGraph> {
    let mut out = Vec::new();
    for (i, edge) in g.edges().iter().enumerate() {
        let allowed = dominators(g, &edge.source);
        for field in g.fields().keys().filter(|f| !allowed.contains(*f)) {
            let mut edges = g.edges().to_vec();
            edges[i].condition = Expr::eq(Expr::first(field), Expr::Const(0));
            out.push(with_edges(g, edges));
        }
    }
    out
}

#[test]
fn bundled_graphs_validate() {
    for name in GRAPHS {
        assert_eq!(validate_graph(&common::graph(name)), vec![], "{name}");
    }
}

#[test]
fn cycle_mutants_are_rejected() {
    for name in GRAPHS {
        let mutants = cycle_mutants(&common::graph(name));
        for m in &mutants {
            let errors = validate_graph(m);
            assert!(errors.iter().any(|e| matches!(e, ModelError::Cycle { .. })), "{name}: {errors:?}");
        }
    }
}

#[test]
fn forward_reference_mutants_are_rejected() {
    for name in GRAPHS {
        for m in forward_reference_mutants(&common::graph(name)) {
            let errors = validate_graph(&m);
            assert!(errors.iter().any(|e| matches!(e, ModelError::ForwardReference { .. })), "{name}: {errors:?}");
        }
    }
}

#[test]
fn at_least_twenty_mutants_per_graph() {
    for name in GRAPHS {
        let g = common::graph(name);
        let n = cycle_mutants(&g).len() + forward_reference_mutants(&g).len();
        assert!(n >= 20, "{name}: {n}");
    }
}

#[test]
fn type_check_examples() {
    let scope: BTreeSet<FieldId> = [FieldId::named("Type_Length")].into();
    assert_eq!(type_check_expression(&Expr::mul(Expr::value("Type_Length"), Expr::Const(8)), &scope), Ok(Sort::Arithmetic));
    assert_eq!(type_check_expression(&Expr::True, &BTreeSet::new()), Ok(Sort::Boolean));
    assert!(type_check_expression(&Expr::and(Expr::Const(1), Expr::True), &scope).is_err());
}

proptest! {
    // Any extra edge from Padding back into the chain closes a cycle.
    #[test]
    fn heartbeat_back_edges_are_cycles(target in 0usize..4, length in 0u128..64) {
        let g = common::graph("TLS_Heartbeat.Heartbeat_Message");
        let fields: Vec<&String> = g.fields().keys().collect();
        let mut edges = g.edges().to_vec();
        edges.push(Edge::new(FieldId::named("Padding"), FieldId::named(fields[target]), Expr::Const(length)));
        let cyclic = validate_graph(&with_edges(&g, edges)).iter().any(|e| matches!(e, ModelError::Cycle { .. }));
        prop_assert!(cyclic);
    }
}
