// Runtime support for generated message parsers. Generated by rflx; do not edit.
//
// Integer expressions are `Option<u128>` and boolean expressions
// `Option<bool>`; `None` marks a failed evaluation (out-of-bounds read,
// underflow, overflow, division by zero). Helpers take evaluated operands,
// so a failure anywhere in an expression makes the whole expression fail.

use std::fmt;

/// Byte buffer with the message it is claimed to hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Buffer<'a> {
    bytes: &'a [u8],
    label: Option<&'static str>,
}

impl<'a> Buffer<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Buffer { bytes, label: None }
    }

    pub fn labeled(bytes: &'a [u8], label: &'static str) -> Self {
        Buffer { bytes, label: Some(label) }
    }

    pub fn bytes(&self) -> &'a [u8] {
        self.bytes
    }

    pub fn label(&self) -> Option<&'static str> {
        self.label
    }

    pub fn set_label(&mut self, label: &'static str) {
        self.label = Some(label);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractViolation {
    Unlabeled { expected: &'static str },
    Mislabeled { expected: &'static str, found: &'static str },
    InvalidField { field: &'static str },
    InvalidMessage { message: &'static str },
    Misaligned { field: &'static str, first: u128, length: u128 },
}

impl fmt::Display for ContractViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContractViolation::Unlabeled { expected } => write!(f, "buffer is not labeled, expected `{expected}`"),
            ContractViolation::Mislabeled { expected, found } => {
                write!(f, "buffer is labeled `{found}`, expected `{expected}`")
            }
            ContractViolation::InvalidField { field } => write!(f, "field `{field}` is not valid"),
            ContractViolation::InvalidMessage { message } => write!(f, "buffer does not hold a valid `{message}`"),
            ContractViolation::Misaligned { field, first, length } => {
                write!(f, "payload `{field}` at bit {first} with {length} bits is not byte aligned")
            }
        }
    }
}

impl std::error::Error for ContractViolation {}

/// Location of an opaque field in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slice {
    pub first: u128,
    pub length: u128,
}

impl Slice {
    /// Last bit; `None` for an empty slice starting at bit 0.
    pub fn last(&self) -> Option<u128> {
        (self.first + self.length).checked_sub(1)
    }

    /// The slice's bytes, if it is byte aligned.
    pub fn bytes<'a>(&self, buffer: &Buffer<'a>) -> Option<&'a [u8]> {
        if !self.first.is_multiple_of(8) || !self.length.is_multiple_of(8) {
            return None;
        }
        buffer.bytes().get((self.first / 8) as usize..((self.first + self.length) / 8) as usize)
    }
}

/// Bytes of `buffer` if it is labeled `message`.
pub fn check<'a>(buffer: &Buffer<'a>, message: &'static str) -> Result<&'a [u8], ContractViolation> {
    match buffer.label() {
        None => Err(ContractViolation::Unlabeled { expected: message }),
        Some(l) if l != message => Err(ContractViolation::Mislabeled { expected: message, found: l }),
        Some(_) => Ok(buffer.bytes()),
    }
}

pub fn length(b: &[u8]) -> Option<u128> {
    (b.len() as u128).checked_mul(8)
}

pub fn last(b: &[u8]) -> Option<u128> {
    length(b)?.checked_sub(1)
}

/// Big-endian read of at most 64 bits.
pub fn read(b: &[u8], first: Option<u128>, length: Option<u128>) -> Option<u128> {
    let (first, length) = (first?, length?);
    if length > 64 || !in_bounds(b, Some(first), Some(length)) {
        return None;
    }
    if length == 0 {
        return Some(0);
    }
    let (first, length) = (first as usize, length as usize);
    let end = (first + length).div_ceil(8);
    let acc = b[first / 8..end].iter().fold(0u128, |acc, &x| (acc << 8) | x as u128);
    Some((acc >> (end * 8 - first - length)) & ((1u128 << length) - 1))
}

pub fn in_bounds(b: &[u8], first: Option<u128>, length: Option<u128>) -> bool {
    match (first, length, self::length(b)) {
        (Some(f), Some(l), Some(total)) => f.checked_add(l).is_some_and(|end| end <= total),
        _ => false,
    }
}

pub fn holds(c: Option<bool>) -> bool {
    c == Some(true)
}

pub fn add(a: Option<u128>, b: Option<u128>) -> Option<u128> {
    a?.checked_add(b?)
}

pub fn sub(a: Option<u128>, b: Option<u128>) -> Option<u128> {
    a?.checked_sub(b?)
}

pub fn mul(a: Option<u128>, b: Option<u128>) -> Option<u128> {
    a?.checked_mul(b?)
}

pub fn div(a: Option<u128>, b: Option<u128>) -> Option<u128> {
    a?.checked_div(b?)
}

pub fn eq(a: Option<u128>, b: Option<u128>) -> Option<bool> {
    Some(a? == b?)
}

pub fn ne(a: Option<u128>, b: Option<u128>) -> Option<bool> {
    Some(a? != b?)
}

pub fn le(a: Option<u128>, b: Option<u128>) -> Option<bool> {
    Some(a? <= b?)
}

pub fn ge(a: Option<u128>, b: Option<u128>) -> Option<bool> {
    Some(a? >= b?)
}

pub fn lt(a: Option<u128>, b: Option<u128>) -> Option<bool> {
    Some(a? < b?)
}

pub fn gt(a: Option<u128>, b: Option<u128>) -> Option<bool> {
    Some(a? > b?)
}

pub fn and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    Some(a? && b?)
}

pub fn or(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    Some(a? || b?)
}

pub fn not(a: Option<bool>) -> Option<bool> {
    Some(!a?)
}
