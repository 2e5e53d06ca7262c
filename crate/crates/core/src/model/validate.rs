use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::expr::{type_check_expression, Sort, TypeError, TypeErrorKind};
use super::{FieldId, MessageGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeAttribute {
    Condition,
    Length,
    First,
}

impl fmt::Display for EdgeAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeAttribute::Condition => "condition",
            EdgeAttribute::Length => "length",
            EdgeAttribute::First => "first",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("field with empty name")]
    EmptyFieldName,
    #[error("invalid type for field `{field}`: {reason}")]
    InvalidType { field: String, reason: String },
    #[error("edge {edge} refers to unknown node `{node}`")]
    UnknownNode { edge: usize, node: FieldId },
    #[error("edge {edge} leads into the initial node")]
    InitialHasIncoming { edge: usize },
    #[error("edge {edge} leaves the final node")]
    FinalHasOutgoing { edge: usize },
    #[error("cycle found: {}", display_cycle(.fields))]
    Cycle { fields: Vec<FieldId> },
    #[error("`{field}` is unreachable from the initial node")]
    Unreachable { field: FieldId },
    #[error("final node is unreachable from `{field}`")]
    DeadEnd { field: FieldId },
    #[error("dangling reference to `{field}` in {attribute} of edge {edge}")]
    DanglingReference { edge: usize, attribute: EdgeAttribute, field: FieldId },
    #[error("forward reference to `{field}` in {attribute} of edge {edge}")]
    ForwardReference { edge: usize, attribute: EdgeAttribute, field: FieldId },
    #[error("value of opaque field `{field}` used in {attribute} of edge {edge}")]
    OpaqueValue { edge: usize, attribute: EdgeAttribute, field: FieldId },
    #[error("type error in {attribute} of edge {edge}: {error}")]
    Type { edge: usize, attribute: EdgeAttribute, error: TypeError },
    #[error("refined field `{field}` does not exist")]
    UnknownRefinedField { field: FieldId },
    #[error("refined field `{field}` is not of type Payload")]
    RefinedFieldNotOpaque { field: FieldId },
    #[error("type error in refinement condition: {0}")]
    RefinementCondition(TypeError),
}

impl ModelError {
    /// Edge the error was found on, if any.
    pub fn edge(&self) -> Option<usize> {
        match self {
            ModelError::UnknownNode { edge, .. }
            | ModelError::InitialHasIncoming { edge }
            | ModelError::FinalHasOutgoing { edge }
            | ModelError::DanglingReference { edge, .. }
            | ModelError::ForwardReference { edge, .. }
            | ModelError::OpaqueValue { edge, .. }
            | ModelError::Type { edge, .. } => Some(*edge),
            _ => None,
        }
    }
}

fn display_cycle(fields: &[FieldId]) -> String {
    fields.iter().map(ToString::to_string).collect::<Vec<_>>().join(" -> ")
}

/// Checks every structural invariant of `graph` and that each edge only
/// refers to fields preceding its target on every path through it.
pub fn validate_graph(graph: &MessageGraph) -> Vec<ModelError> {
    let mut errors = Vec::new();

    for (name, spec) in graph.fields() {
        if name.is_empty() {
            errors.push(ModelError::EmptyFieldName);
        }
        if let Err(reason) = spec.ty.check() {
            errors.push(ModelError::InvalidType { field: name.clone(), reason });
        }
    }

    let mut structural = false;
    for (i, e) in graph.edges().iter().enumerate() {
        for node in [&e.source, &e.target] {
            if !graph.contains_node(node) {
                errors.push(ModelError::UnknownNode { edge: i, node: node.clone() });
                structural = true;
            }
        }
        if e.target == FieldId::Initial {
            errors.push(ModelError::InitialHasIncoming { edge: i });
            structural = true;
        }
        if e.source == FieldId::Final {
            errors.push(ModelError::FinalHasOutgoing { edge: i });
            structural = true;
        }
    }
    if structural {
        return errors;
    }

    let nodes = graph.nodes();
    let Some(order) = topological_order(graph, &nodes, &mut errors) else {
        return errors;
    };

    let forward = reachable(graph, &FieldId::Initial, true);
    let backward = reachable(graph, &FieldId::Final, false);
    for n in &nodes {
        if !forward.contains(n) {
            errors.push(ModelError::Unreachable { field: n.clone() });
        } else if !backward.contains(n) && n != &FieldId::Final {
            errors.push(ModelError::DeadEnd { field: n.clone() });
        }
    }

    let dominators = dominators(graph, &order, &forward);
    let declared: BTreeSet<FieldId> = graph.fields().keys().map(|n| FieldId::named(n)).collect();

    for (i, e) in graph.edges().iter().enumerate() {
        let attributes = [
            (EdgeAttribute::Condition, &e.condition, Sort::Boolean),
            (EdgeAttribute::Length, &e.length, Sort::Arithmetic),
            (EdgeAttribute::First, &e.first, Sort::Arithmetic),
        ];
        let preceding = dominators.get(&e.source);
        for (attribute, expr, expected) in attributes {
            let refs = expr.field_refs();
            for f in &refs {
                if f.is_sentinel() {
                    continue; // reported by the type check below
                }
                if !declared.contains(f) {
                    errors.push(ModelError::DanglingReference { edge: i, attribute, field: f.clone() });
                } else if preceding.is_some_and(|p| !p.contains(f)) {
                    errors.push(ModelError::ForwardReference { edge: i, attribute, field: f.clone() });
                }
            }
            for f in expr.value_refs() {
                if graph.field(&f).is_some_and(|s| s.ty.is_opaque()) {
                    errors.push(ModelError::OpaqueValue { edge: i, attribute, field: f });
                }
            }
            // Scope problems are reported above; only sorts are checked here.
            let scope: BTreeSet<FieldId> = declared.union(&refs).cloned().collect();
            match type_check_expression(expr, &scope) {
                Ok(found) if found != expected => errors.push(ModelError::Type {
                    edge: i,
                    attribute,
                    error: TypeError {
                        expr: expr.clone(),
                        kind: TypeErrorKind::SortMismatch { expected, found },
                    },
                }),
                Ok(_) => {}
                Err(error) => errors.push(ModelError::Type { edge: i, attribute, error }),
            }
        }
    }
    errors
}

/// Topological order of all nodes, or `None` after recording a cycle.
fn topological_order(graph: &MessageGraph, nodes: &[FieldId], errors: &mut Vec<ModelError>) -> Option<Vec<FieldId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut marks: BTreeMap<&FieldId, Mark> = nodes.iter().map(|n| (n, Mark::New)).collect();
    let mut post = Vec::new();

    // Iterative DFS so that the active stack doubles as the cycle witness.
    for root in nodes {
        if marks[root] != Mark::New {
            continue;
        }
        let mut stack: Vec<(&FieldId, Vec<usize>)> = vec![(root, graph.outgoing(root).collect())];
        marks.insert(root, Mark::Active);
        while let Some((node, pending)) = stack.last_mut() {
            let node = *node;
            match pending.pop() {
                Some(edge) => {
                    let next = &graph.edge(edge).target;
                    match marks[next] {
                        Mark::New => {
                            marks.insert(next, Mark::Active);
                            let mut out: Vec<usize> = graph.outgoing(next).collect();
                            out.reverse();
                            stack.push((next, out));
                        }
                        Mark::Active => {
                            let start = stack.iter().position(|(n, _)| *n == next).unwrap_or(0);
                            let mut fields: Vec<FieldId> = stack[start..].iter().map(|(n, _)| (*n).clone()).collect();
                            fields.push(next.clone());
                            errors.push(ModelError::Cycle { fields });
                            return None;
                        }
                        Mark::Done => {}
                    }
                }
                None => {
                    marks.insert(node, Mark::Done);
                    post.push(node.clone());
                    stack.pop();
                }
            }
        }
    }
    post.reverse();
    Some(post)
}

fn reachable(graph: &MessageGraph, from: &FieldId, forward: bool) -> BTreeSet<FieldId> {
    let mut seen = BTreeSet::from([from.clone()]);
    let mut work = vec![from.clone()];
    while let Some(n) = work.pop() {
        for e in graph.edges() {
            let (here, there) = if forward { (&e.source, &e.target) } else { (&e.target, &e.source) };
            if here == &n && seen.insert(there.clone()) {
                work.push(there.clone());
            }
        }
    }
    seen
}

/// For each reachable node, the user fields that lie on every path from the
/// initial node to it (the node itself included).
fn dominators(
    graph: &MessageGraph,
    order: &[FieldId],
    reachable: &BTreeSet<FieldId>,
) -> BTreeMap<FieldId, BTreeSet<FieldId>> {
    let mut dom: BTreeMap<FieldId, BTreeSet<FieldId>> = BTreeMap::new();
    for node in order.iter().filter(|n| reachable.contains(*n)) {
        let mut preds = graph.incoming(node).map(|i| &graph.edge(i).source).filter(|s| dom.contains_key(*s));
        let mut set = match preds.next() {
            Some(first) => {
                let mut acc = dom[first].clone();
                for p in preds {
                    acc = acc.intersection(&dom[p]).cloned().collect();
                }
                acc
            }
            None => BTreeSet::new(),
        };
        if !node.is_sentinel() {
            set.insert(node.clone());
        }
        dom.insert(node.clone(), set);
    }
    dom
}
