//! Interpretation of derived parsers against byte buffers.
//!
//! Buffers carry a label naming the message they are claimed to hold. Every
//! query checks the label first and refuses to answer for a buffer that was
//! never labeled or labeled for another message.

mod eval;
pub mod vectors;

use std::cell::RefCell;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::derive::{derive_parser, AccessBody, DerivedParser, Formula, Path};
use crate::model::{Expr, FieldId, FieldType, MessageGraph, Refinement};

pub use eval::{eval, eval_bool, eval_int, read_bits, EvalError, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageBuffer<'a> {
    bytes: &'a [u8],
    label: Option<String>,
}

impl<'a> MessageBuffer<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        MessageBuffer { bytes, label: None }
    }

    /// Buffer claimed to hold the message `label` by an external source.
    pub fn labeled(bytes: &'a [u8], label: impl Into<String>) -> Self {
        MessageBuffer { bytes, label: Some(label.into()) }
    }

    pub fn bytes(&self) -> &'a [u8] {
        self.bytes
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = Some(label.into());
    }

    pub fn message_length(&self) -> u128 {
        self.bytes.len() as u128 * 8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldSlice {
    pub first: u128,
    pub length: u128,
    /// Decoded value; absent for opaque fields.
    pub value: Option<u64>,
}

impl FieldSlice {
    /// Byte range of a byte-aligned slice.
    pub fn byte_range(&self) -> Option<std::ops::Range<usize>> {
        (self.first.is_multiple_of(8) && self.length.is_multiple_of(8))
            .then(|| (self.first / 8) as usize..((self.first + self.length) / 8) as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ContractViolation {
    #[error("buffer is not labeled, expected `{expected}`")]
    Unlabeled { expected: String },
    #[error("buffer is labeled `{found}`, expected `{expected}`")]
    Mislabeled { expected: String, found: String },
    #[error("`{message}` has no field `{field}`")]
    UnknownField { message: String, field: String },
    #[error("`{message}` has no variant {path}")]
    UnknownVariant { message: String, path: Path },
    #[error("field `{field}` is not valid")]
    InvalidField { field: String },
    #[error("buffer does not hold a valid `{message}`")]
    InvalidMessage { message: String },
    #[error("refinement `{refinement}` applies to `{expected}`, not `{found}`")]
    WrongRefinement { refinement: String, expected: String, found: String },
    #[error("payload `{field}` at bit {first} with {length} bits is not byte aligned")]
    Misaligned { field: String, first: u128, length: u128 },
}

/// Interpreter for one message.
#[derive(Clone, Debug)]
pub struct MessageParser {
    derived: DerivedParser,
    index: BTreeMap<Path, usize>,
}

impl MessageParser {
    pub fn new(derived: DerivedParser) -> Self {
        let index = derived.variant_valid.keys().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        MessageParser { derived, index }
    }

    pub fn from_graph(graph: &MessageGraph) -> Self {
        Self::new(derive_parser(graph))
    }

    pub fn derived(&self) -> &DerivedParser {
        &self.derived
    }

    pub fn graph(&self) -> &MessageGraph {
        &self.derived.graph
    }

    /// Qualified message name, which is also the label this parser expects.
    pub fn message(&self) -> &str {
        self.derived.graph.name()
    }

    pub fn label(&self, buffer: &mut MessageBuffer<'_>) {
        buffer.set_label(self.message());
    }

    pub fn is_contained(&self, buffer: &MessageBuffer<'_>) -> bool {
        buffer.label() == Some(self.message())
    }

    /// Checks the label and opens an evaluation session that caches variant
    /// results for this buffer.
    pub fn session<'p, 'b>(&'p self, buffer: &MessageBuffer<'b>) -> Result<Session<'p, 'b>, ContractViolation> {
        match buffer.label() {
            None => Err(ContractViolation::Unlabeled { expected: self.message().to_string() }),
            Some(l) if l != self.message() => {
                Err(ContractViolation::Mislabeled { expected: self.message().to_string(), found: l.to_string() })
            }
            Some(_) => Ok(Session { parser: self, bytes: buffer.bytes(), memo: RefCell::new(vec![None; self.index.len()]) }),
        }
    }

    pub fn variant_valid(&self, path: &Path, buffer: &MessageBuffer<'_>) -> Result<bool, ContractViolation> {
        self.session(buffer)?.variant_valid(path)
    }

    pub fn field_valid(&self, field: &str, buffer: &MessageBuffer<'_>) -> Result<bool, ContractViolation> {
        self.session(buffer)?.field_valid(field)
    }

    pub fn field_access(&self, field: &str, buffer: &MessageBuffer<'_>) -> Result<FieldSlice, ContractViolation> {
        self.session(buffer)?.field_access(field)
    }

    pub fn is_valid(&self, buffer: &MessageBuffer<'_>) -> Result<bool, ContractViolation> {
        Ok(self.session(buffer)?.is_valid())
    }

    /// Enumeration literal named by `value` if `field` has an enumeration type.
    pub fn literal(&self, field: &str, value: u64) -> Option<&str> {
        match &self.graph().field(&FieldId::named(field))?.ty {
            FieldType::Enumeration { literals, .. } => {
                literals.iter().find(|(_, v)| *v == value as u128).map(|(n, _)| n.as_str())
            }
            _ => None,
        }
    }

    fn field_id(&self, field: &str) -> Result<FieldId, ContractViolation> {
        let id = FieldId::named(field);
        if self.derived.field_valid.contains_key(&id) {
            Ok(id)
        } else {
            Err(ContractViolation::UnknownField { message: self.message().to_string(), field: field.to_string() })
        }
    }
}

/// Queries against one labeled buffer.
pub struct Session<'p, 'b> {
    parser: &'p MessageParser,
    bytes: &'b [u8],
    memo: RefCell<Vec<Option<bool>>>,
}

impl<'p, 'b> Session<'p, 'b> {
    pub fn bytes(&self) -> &'b [u8] {
        self.bytes
    }

    pub fn variant_valid(&self, path: &Path) -> Result<bool, ContractViolation> {
        if !self.parser.index.contains_key(path) {
            return Err(ContractViolation::UnknownVariant {
                message: self.parser.message().to_string(),
                path: path.clone(),
            });
        }
        Ok(self.variant(path))
    }

    fn variant(&self, path: &Path) -> bool {
        let i = self.parser.index[path];
        if let Some(v) = self.memo.borrow()[i] {
            return v;
        }
        let v = self.formula(&self.parser.derived.variant_valid[path].body);
        self.memo.borrow_mut()[i] = Some(v);
        v
    }

    fn formula(&self, f: &Formula) -> bool {
        match f {
            Formula::Condition(e) => eval_bool(e, self.bytes).unwrap_or(false),
            Formula::InBounds { first, length } => match (eval_int(first, self.bytes), eval_int(length, self.bytes)) {
                (Ok(a), Ok(b)) => a.checked_add(b).is_some_and(|end| end <= self.bytes.len() as u128 * 8),
                _ => false,
            },
            Formula::VariantValid(p) => self.variant(p),
            Formula::And(a, b) => self.formula(a) && self.formula(b),
            Formula::Or(a, b) => self.formula(a) || self.formula(b),
            Formula::False => false,
        }
    }

    pub fn field_valid(&self, field: &str) -> Result<bool, ContractViolation> {
        let id = self.parser.field_id(field)?;
        Ok(self.formula(&self.parser.derived.field_valid[&id].body))
    }

    pub fn field_access(&self, field: &str) -> Result<FieldSlice, ContractViolation> {
        let id = self.parser.field_id(field)?;
        if !self.formula(&self.parser.derived.field_valid[&id].body) {
            return Err(ContractViolation::InvalidField { field: field.to_string() });
        }
        let mut body = &self.parser.derived.field_access[&id].body;
        let path = loop {
            match body {
                AccessBody::If { valid, access, otherwise } => {
                    if self.variant(valid) {
                        break access;
                    }
                    body = otherwise;
                }
                AccessBody::Undefined => return Err(ContractViolation::InvalidField { field: field.to_string() }),
            }
        };
        let acc = &self.parser.derived.variant_access[path];
        let invalid = || ContractViolation::InvalidField { field: field.to_string() };
        let first = eval_int(&acc.first, self.bytes).map_err(|_| invalid())?;
        let length = eval_int(&acc.length, self.bytes).map_err(|_| invalid())?;
        let opaque = matches!(self.parser.graph().field(&id).map(|s| &s.ty), Some(FieldType::Opaque));
        let value = if opaque { None } else { Some(read_bits(self.bytes, first, length).map_err(|_| invalid())?) };
        debug_assert!(first + length <= self.bytes.len() as u128 * 8);
        debug_assert!(value.is_none_or(|v| length >= 64 || (v as u128) < (1u128 << length)));
        Ok(FieldSlice { first, length, value })
    }

    /// Number of fully valid paths from the initial to the final node.
    pub fn valid_paths(&self) -> usize {
        self.parser.derived.final_paths.iter().filter(|p| self.variant(p)).count()
    }

    pub fn is_valid(&self) -> bool {
        self.valid_paths() == 1
    }
}

/// Checks whether the payload of a valid outer message holds the refined
/// inner message and, if so, returns the payload as a buffer labeled with
/// the inner message.
pub fn contains<'b>(
    refinement: &Refinement,
    outer: &MessageParser,
    buffer: &MessageBuffer<'b>,
) -> Result<Option<MessageBuffer<'b>>, ContractViolation> {
    if refinement.outer_message != outer.message() {
        return Err(ContractViolation::WrongRefinement {
            refinement: refinement.name.clone(),
            expected: refinement.outer_message.clone(),
            found: outer.message().to_string(),
        });
    }
    let session = outer.session(buffer)?;
    if !session.is_valid() {
        return Err(ContractViolation::InvalidMessage { message: outer.message().to_string() });
    }
    let Some(condition) = close_over_fields(&session, &refinement.condition) else {
        return Ok(None);
    };
    if !eval_bool(&condition, buffer.bytes()).unwrap_or(false) {
        return Ok(None);
    }
    let payload = refinement.payload_field.as_str();
    let slice = match session.field_access(payload) {
        Ok(s) => s,
        Err(ContractViolation::InvalidField { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let range = slice.byte_range().ok_or_else(|| ContractViolation::Misaligned {
        field: payload.to_string(),
        first: slice.first,
        length: slice.length,
    })?;
    Ok(Some(MessageBuffer::labeled(&buffer.bytes()[range], refinement.inner_message.clone())))
}

/// Replaces field references by the values and locations given by the field
/// accessors. `None` if a referenced field is not valid.
fn close_over_fields(session: &Session<'_, '_>, expr: &Expr) -> Option<Expr> {
    let mut missing = false;
    let closed = expr.map(&mut |e| {
        let slice = match &e {
            Expr::FieldValue(f) | Expr::FieldFirst(f) | Expr::FieldLength(f) => f.name().and_then(|n| session.field_access(n).ok()),
            _ => return e,
        };
        let Some(s) = slice else {
            missing = true;
            return e;
        };
        match e {
            Expr::FieldValue(_) => s.value.map_or_else(
                || {
                    missing = true;
                    Expr::False
                },
                |v| Expr::Const(v as u128),
            ),
            Expr::FieldFirst(_) => Expr::Const(s.first),
            _ => Expr::Const(s.length),
        }
    });
    (!missing).then_some(closed)
}
