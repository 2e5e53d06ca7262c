//! Graph-based message model.
//!
//! A message is a DAG whose nodes are fields and whose edges carry the
//! condition under which the target follows the source, plus the length and
//! first-bit position of the target. Two virtual nodes, [`FieldId::Initial`]
//! and [`FieldId::Final`], mark the start and the end of every message variant.

mod expr;
mod validate;

use std::fmt;

use indexmap::IndexMap;

pub use expr::{type_check_expression, BinOp, Expr, Sort, TypeError, TypeErrorKind};
pub use validate::{validate_graph, EdgeAttribute, ModelError};

/// Widest scalar field the model accepts, in bits.
pub const MAX_SCALAR_BITS: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldId {
    Initial,
    Final,
    Field(String),
}

impl FieldId {
    pub fn named(name: &str) -> FieldId {
        FieldId::Field(name.to_string())
    }

    pub fn is_sentinel(&self) -> bool {
        !matches!(self, FieldId::Field(_))
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            FieldId::Field(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for FieldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldId::Initial => f.write_str("Initial"),
            FieldId::Final => f.write_str("Final"),
            FieldId::Field(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldType {
    /// Values `0 .. modulus - 1`, `log2(modulus)` bits wide.
    Modular { modulus: u128 },
    Range { lower: u128, upper: u128, size: u32 },
    Enumeration { literals: Vec<(String, u128)>, size: u32 },
    /// Variable-length opaque data; the only refinable type.
    Opaque,
}

impl FieldType {
    /// Declared bit size; `None` for opaque fields.
    pub fn size(&self) -> Option<u32> {
        match self {
            FieldType::Modular { modulus } => Some(modulus.trailing_zeros()),
            FieldType::Range { size, .. } | FieldType::Enumeration { size, .. } => Some(*size),
            FieldType::Opaque => None,
        }
    }

    pub fn is_opaque(&self) -> bool {
        matches!(self, FieldType::Opaque)
    }

    /// Condition a decoded `value` must satisfy to be a member of the type, or
    /// `None` if every value of the declared size is a member.
    pub fn membership(&self, value: &Expr) -> Option<Expr> {
        match self {
            FieldType::Modular { .. } | FieldType::Opaque => None,
            FieldType::Range { lower, upper, size } => {
                let mut parts = Vec::new();
                if *lower > 0 {
                    parts.push(Expr::ge(value.clone(), Expr::Const(*lower)));
                }
                if *size >= 128 || *upper < (1u128 << size) - 1 {
                    parts.push(Expr::le(value.clone(), Expr::Const(*upper)));
                }
                (!parts.is_empty()).then(|| Expr::all(parts))
            }
            FieldType::Enumeration { literals, .. } => {
                Some(Expr::any(literals.iter().map(|(_, v)| Expr::eq(value.clone(), Expr::Const(*v)))))
            }
        }
    }

    /// Checks the type's own invariants; returns a description of the first
    /// violation.
    pub fn check(&self) -> Result<(), String> {
        match self {
            FieldType::Modular { modulus } => {
                if *modulus < 2 || !modulus.is_power_of_two() {
                    return Err(format!("modulus {modulus} is not a power of two >= 2"));
                }
                let bits = modulus.trailing_zeros();
                if bits > MAX_SCALAR_BITS {
                    return Err(format!("size {bits} exceeds {MAX_SCALAR_BITS} bits"));
                }
                Ok(())
            }
            FieldType::Range { lower, upper, size } => {
                check_size(*size)?;
                if lower > upper {
                    return Err(format!("empty range {lower} .. {upper}"));
                }
                if *upper >= 1u128 << size {
                    return Err(format!("upper bound {upper} does not fit in {size} bits"));
                }
                Ok(())
            }
            FieldType::Enumeration { literals, size } => {
                check_size(*size)?;
                if literals.is_empty() {
                    return Err("enumeration without literals".into());
                }
                for (i, (name, value)) in literals.iter().enumerate() {
                    if *value >= 1u128 << size {
                        return Err(format!("value {value} of `{name}` does not fit in {size} bits"));
                    }
                    if let Some((other, _)) = literals[..i].iter().find(|(_, v)| v == value) {
                        return Err(format!("`{name}` and `{other}` share the value {value}"));
                    }
                    if literals[..i].iter().any(|(n, _)| n.eq_ignore_ascii_case(name)) {
                        return Err(format!("duplicate literal `{name}`"));
                    }
                }
                Ok(())
            }
            FieldType::Opaque => Ok(()),
        }
    }
}

fn check_size(size: u32) -> Result<(), String> {
    if size == 0 || size > MAX_SCALAR_BITS {
        Err(format!("size {size} is outside 1 .. {MAX_SCALAR_BITS}"))
    } else {
        Ok(())
    }
}

/// A field together with the name of its declared type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub type_name: String,
    pub ty: FieldType,
}

impl FieldSpec {
    pub fn new(type_name: impl Into<String>, ty: FieldType) -> Self {
        FieldSpec { type_name: type_name.into(), ty }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: FieldId,
    pub target: FieldId,
    pub condition: Expr,
    pub length: Expr,
    pub first: Expr,
}

impl Edge {
    /// Edge with the default attributes: always taken, target starts right
    /// after the source.
    pub fn new(source: FieldId, target: FieldId, length: Expr) -> Edge {
        let first = default_first(&source);
        Edge { source, target, condition: Expr::True, length, first }
    }

    pub fn when(mut self, condition: Expr) -> Edge {
        self.condition = condition;
        self
    }

    pub fn at(mut self, first: Expr) -> Edge {
        self.first = first;
        self
    }

    /// True when `first` is the implicit `source'First + source'Length`.
    pub fn has_default_first(&self) -> bool {
        self.first == default_first(&self.source)
    }
}

/// Position directly after `source`; bit 0 for the initial node.
pub fn default_first(source: &FieldId) -> Expr {
    match source {
        FieldId::Field(_) => Expr::add(Expr::FieldFirst(source.clone()), Expr::FieldLength(source.clone())),
        _ => Expr::Const(0),
    }
}

/// Message format as a DAG. Edges are identified by their position in
/// [`MessageGraph::edges`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageGraph {
    name: String,
    fields: IndexMap<String, FieldSpec>,
    edges: Vec<Edge>,
}

impl MessageGraph {
    /// Builds a graph without checking it; see [`validate_graph`].
    pub fn new(name: impl Into<String>, fields: IndexMap<String, FieldSpec>, edges: Vec<Edge>) -> Self {
        MessageGraph { name: name.into(), fields, edges }
    }

    /// Qualified name, `Package.Message`.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fields(&self) -> &IndexMap<String, FieldSpec> {
        &self.fields
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &Edge {
        &self.edges[index]
    }

    pub fn field(&self, id: &FieldId) -> Option<&FieldSpec> {
        id.name().and_then(|n| self.fields.get(n))
    }

    /// Initial, the user fields in declaration order, then Final.
    pub fn nodes(&self) -> Vec<FieldId> {
        std::iter::once(FieldId::Initial)
            .chain(self.fields.keys().map(|n| FieldId::named(n)))
            .chain(std::iter::once(FieldId::Final))
            .collect()
    }

    pub fn contains_node(&self, id: &FieldId) -> bool {
        id.is_sentinel() || self.field(id).is_some()
    }

    pub fn incoming<'a>(&'a self, node: &'a FieldId) -> impl Iterator<Item = usize> + 'a {
        self.edges.iter().enumerate().filter(move |(_, e)| &e.target == node).map(|(i, _)| i)
    }

    pub fn outgoing<'a>(&'a self, node: &'a FieldId) -> impl Iterator<Item = usize> + 'a {
        self.edges.iter().enumerate().filter(move |(_, e)| &e.source == node).map(|(i, _)| i)
    }

    pub fn into_parts(self) -> (String, IndexMap<String, FieldSpec>, Vec<Edge>) {
        (self.name, self.fields, self.edges)
    }
}

/// States that `payload_field` of `outer_message` holds an `inner_message`
/// whenever `condition` (over the outer fields) is true.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub name: String,
    pub outer_message: String,
    pub payload_field: String,
    pub inner_message: String,
    pub condition: Expr,
}

impl Refinement {
    /// Checks that the refined field exists and is opaque and that the
    /// condition is a boolean over the outer message's fields.
    pub fn new(
        name: impl Into<String>,
        outer: &MessageGraph,
        payload_field: &str,
        inner_message: impl Into<String>,
        condition: Expr,
    ) -> Result<Refinement, ModelError> {
        let field = FieldId::named(payload_field);
        match outer.field(&field) {
            None => return Err(ModelError::UnknownRefinedField { field }),
            Some(spec) if !spec.ty.is_opaque() => return Err(ModelError::RefinedFieldNotOpaque { field }),
            Some(_) => {}
        }
        let scope = outer.fields.keys().map(|n| FieldId::named(n)).collect();
        match type_check_expression(&condition, &scope) {
            Ok(Sort::Boolean) => {}
            Ok(found) => {
                return Err(ModelError::RefinementCondition(TypeError {
                    expr: condition,
                    kind: TypeErrorKind::SortMismatch { expected: Sort::Boolean, found },
                }))
            }
            Err(e) => return Err(ModelError::RefinementCondition(e)),
        }
        Ok(Refinement {
            name: name.into(),
            outer_message: outer.name.clone(),
            payload_field: payload_field.to_string(),
            inner_message: inner_message.into(),
            condition,
        })
    }
}
