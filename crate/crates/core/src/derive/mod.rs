//! Derivation of the parser from a message graph.
//!
//! For every path from the initial node (a *variant*), the condition, length
//! and first-bit expressions of its last edge are closed over the path. Each
//! variant gets a validation function and an accessor. Per field, the
//! validation function is the disjunction of its variants, each conjoined with
//! the disjunction of the field's outgoing conditions; the accessor picks the
//! first valid variant.

mod paths;

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;

use crate::model::{Expr, FieldId, MessageGraph};

pub use paths::{path_edges, paths_to, subs, Path};

/// Closed attributes of the last edge of `path`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathAttributes {
    pub path: Path,
    pub target: FieldId,
    pub condition: Expr,
    pub length: Expr,
    pub first: Expr,
}

/// Body of a validation function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    /// Closed boolean expression; an evaluation error counts as false.
    Condition(Expr),
    /// `first + length <= Message'Length`.
    InBounds { first: Expr, length: Expr },
    VariantValid(Path),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    False,
}

impl Formula {
    /// Right-nested conjunction; panics on an empty list.
    fn all(mut parts: Vec<Formula>) -> Formula {
        let mut acc = parts.pop().expect("conjunction of at least one formula");
        while let Some(p) = parts.pop() {
            acc = Formula::And(Box::new(p), Box::new(acc));
        }
        acc
    }

    fn any(parts: Vec<Formula>) -> Formula {
        parts.into_iter().reduce(|a, b| Formula::Or(Box::new(a), Box::new(b))).unwrap_or(Formula::False)
    }

    /// Variant paths called from this formula.
    pub fn calls(&self) -> Vec<&Path> {
        match self {
            Formula::VariantValid(p) => vec![p],
            Formula::And(a, b) | Formula::Or(a, b) => {
                let mut v = a.calls();
                v.extend(b.calls());
                v
            }
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Condition(e) => write!(f, "({e})"),
            Formula::InBounds { first, length } => write!(f, "In_Bounds ({first}, {length})"),
            Formula::VariantValid(p) => write!(f, "Variant_Valid {p}"),
            Formula::And(a, b) => write!(f, "{a} and then {b}"),
            Formula::Or(a, b) => write!(f, "({a}) or else ({b})"),
            Formula::False => f.write_str("False"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantValidFunc {
    pub path: Path,
    pub field: FieldId,
    pub body: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantAccessFunc {
    pub path: Path,
    pub field: FieldId,
    pub first: Expr,
    pub length: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldValidFunc {
    pub field: FieldId,
    pub body: Formula,
}

/// Nested conditional over the variants of a field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccessBody {
    If { valid: Path, access: Path, otherwise: Box<AccessBody> },
    /// No variant is valid; reaching this is a contract violation.
    Undefined,
}

impl AccessBody {
    /// Branches in evaluation order.
    pub fn branches(&self) -> Vec<(&Path, &Path)> {
        let mut out = Vec::new();
        let mut cur = self;
        while let AccessBody::If { valid, access, otherwise } = cur {
            out.push((valid, access));
            cur = otherwise;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldAccessFunc {
    pub field: FieldId,
    pub body: AccessBody,
}

pub type NodePaths = IndexMap<FieldId, Vec<(Path, Expr)>>;

/// Variant and field functions of one message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedParser {
    pub graph: MessageGraph,
    pub variant_valid: BTreeMap<Path, VariantValidFunc>,
    pub variant_access: BTreeMap<Path, VariantAccessFunc>,
    pub field_valid: IndexMap<FieldId, FieldValidFunc>,
    pub field_access: IndexMap<FieldId, FieldAccessFunc>,
    /// Paths from the initial to the final node, one per message variant.
    pub final_paths: Vec<Path>,
}

/// Attributes for every path from the initial node to any other node.
pub fn path_attrs(graph: &MessageGraph) -> Vec<PathAttributes> {
    let mut out: Vec<PathAttributes> = graph
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(i, edge)| {
            paths_to(graph, &edge.source).into_iter().map(move |p| {
                let prefix = p.edges().to_vec();
                PathAttributes {
                    path: p.extended(i),
                    target: edge.target.clone(),
                    condition: subs(graph, &prefix, &edge.condition),
                    length: subs(graph, &prefix, &edge.length),
                    first: subs(graph, &prefix, &edge.first),
                }
            })
        })
        .collect();
    out.sort_by(|a, b| a.path.cmp(&b.path));
    out
}

/// Validation and accessor function per variant. The declared value range
/// of the target's type is part of each variant's validity.
pub fn variant_functions(
    graph: &MessageGraph,
    attrs: &[PathAttributes],
) -> (BTreeMap<Path, VariantValidFunc>, BTreeMap<Path, VariantAccessFunc>) {
    let mut valid = BTreeMap::new();
    let mut access = BTreeMap::new();
    for a in attrs {
        let mut parts = vec![
            Formula::InBounds { first: a.first.clone(), length: a.length.clone() },
            Formula::Condition(a.condition.clone()),
        ];
        if let Some(membership) = graph
            .field(&a.target)
            .and_then(|spec| spec.ty.membership(&Expr::read(a.first.clone(), a.length.clone())))
        {
            parts.push(Formula::Condition(membership));
        }
        if a.path.len() > 1 {
            parts.push(Formula::VariantValid(a.path.init()));
        }
        valid.insert(
            a.path.clone(),
            VariantValidFunc { path: a.path.clone(), field: a.target.clone(), body: Formula::all(parts) },
        );
        access.insert(
            a.path.clone(),
            VariantAccessFunc {
                path: a.path.clone(),
                field: a.target.clone(),
                first: a.first.clone(),
                length: a.length.clone(),
            },
        );
    }
    (valid, access)
}

/// For each user field, its variants with the closed disjunction of the
/// conditions on its outgoing edges.
pub fn node_paths(graph: &MessageGraph) -> NodePaths {
    let mut out = IndexMap::new();
    for node in graph.nodes().into_iter().filter(|n| !n.is_sentinel()) {
        let outgoing: Vec<usize> = graph.outgoing(&node).collect();
        let mut entries: Vec<(Path, Expr)> = paths_to(graph, &node)
            .into_iter()
            .map(|path| {
                let conds = outgoing.iter().map(|&o| subs(graph, path.edges(), &graph.edge(o).condition));
                let cond = Expr::any(conds);
                (path, cond)
            })
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        out.insert(node, entries);
    }
    out
}

pub fn field_functions(
    node_paths: &NodePaths,
    variant_valid: &BTreeMap<Path, VariantValidFunc>,
) -> (IndexMap<FieldId, FieldValidFunc>, IndexMap<FieldId, FieldAccessFunc>) {
    let mut valid = IndexMap::new();
    let mut access = IndexMap::new();
    for (field, entries) in node_paths {
        debug_assert!(entries.iter().all(|(p, _)| variant_valid.contains_key(p)));
        let calls = entries
            .iter()
            .map(|(p, cond)| {
                Formula::And(Box::new(Formula::VariantValid(p.clone())), Box::new(Formula::Condition(cond.clone())))
            })
            .collect();
        valid.insert(field.clone(), FieldValidFunc { field: field.clone(), body: Formula::any(calls) });

        let body = entries.iter().rev().fold(AccessBody::Undefined, |otherwise, (p, _)| AccessBody::If {
            valid: p.clone(),
            access: p.clone(),
            otherwise: Box::new(otherwise),
        });
        access.insert(field.clone(), FieldAccessFunc { field: field.clone(), body });
    }
    (valid, access)
}

/// Derives the complete parser. `graph` must satisfy
/// [`validate_graph`](crate::model::validate_graph).
pub fn derive_parser(graph: &MessageGraph) -> DerivedParser {
    let attrs = path_attrs(graph);
    let (variant_valid, variant_access) = variant_functions(graph, &attrs);
    let nodes = node_paths(graph);
    let (field_valid, field_access) = field_functions(&nodes, &variant_valid);
    DerivedParser {
        graph: graph.clone(),
        variant_valid,
        variant_access,
        field_valid,
        field_access,
        final_paths: paths_to(graph, &FieldId::Final),
    }
}
