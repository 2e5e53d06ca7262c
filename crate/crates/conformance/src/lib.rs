//! Parsers generated at build time from the bundled specifications, and a
//! uniform table over them for differential testing against the
//! interpreter.

pub mod generated {
    include!(concat!(env!("OUT_DIR"), "/generated/mod.rs"));
}

pub use generated::rflx_support::{Buffer, ContractViolation};

/// Field value as returned by a generated accessor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Scalar(u64),
    Opaque { first: u128, length: u128 },
}

type Valid = fn(&Buffer<'_>) -> Result<bool, ContractViolation>;

pub struct Field {
    pub name: &'static str,
    pub valid: Valid,
    pub get: fn(&Buffer<'_>) -> Result<Value, ContractViolation>,
}

pub struct Message {
    pub name: &'static str,
    pub is_valid: Valid,
    pub fields: &'static [Field],
}

include!(concat!(env!("OUT_DIR"), "/dispatch.rs"));

pub fn message(name: &str) -> Option<&'static Message> {
    MESSAGES.iter().find(|m| m.name == name)
}
