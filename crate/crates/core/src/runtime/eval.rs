use thiserror::Error;

use crate::model::{BinOp, Expr, FieldId, MAX_SCALAR_BITS};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("subtraction below zero")]
    Underflow,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("read of bits {first} .. +{length} outside a buffer of {available} bits")]
    OutOfBounds { first: u128, length: u128, available: u128 },
    #[error("read of {0} bits exceeds the {MAX_SCALAR_BITS}-bit limit")]
    TooWide(u128),
    #[error("operand of the wrong sort")]
    Sort,
    #[error("unsubstituted reference to `{0}`")]
    OpenReference(FieldId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Int(u128),
    Bool(bool),
}

/// Reads `length` bits starting at bit `first`, most significant bit first.
pub fn read_bits(bytes: &[u8], first: u128, length: u128) -> Result<u64, EvalError> {
    let available = bytes.len() as u128 * 8;
    if length > MAX_SCALAR_BITS as u128 {
        return Err(EvalError::TooWide(length));
    }
    match first.checked_add(length) {
        Some(end) if end <= available => {}
        _ => return Err(EvalError::OutOfBounds { first, length, available }),
    }
    if length == 0 {
        return Ok(0);
    }
    let (first, length) = (first as usize, length as usize);
    let start = first / 8;
    let end = (first + length).div_ceil(8);
    // At most 9 bytes are touched for a 64-bit read.
    let mut acc: u128 = 0;
    for &b in &bytes[start..end] {
        acc = (acc << 8) | b as u128;
    }
    let trailing = end * 8 - (first + length);
    let mask = if length == 128 { u128::MAX } else { (1u128 << length) - 1 };
    Ok(((acc >> trailing) & mask) as u64)
}

/// Evaluates a closed expression against `bytes`. Both operands of every
/// operator are evaluated, so an error anywhere makes the whole expression
/// fail.
pub fn eval(expr: &Expr, bytes: &[u8]) -> Result<Value, EvalError> {
    Ok(match expr {
        Expr::True => Value::Bool(true),
        Expr::False => Value::Bool(false),
        Expr::Not(e) => Value::Bool(!eval_bool(e, bytes)?),
        Expr::Binary(op, l, r) if op.signature().0 == crate::model::Sort::Boolean => {
            let (a, b) = (eval_bool(l, bytes)?, eval_bool(r, bytes)?);
            Value::Bool(if *op == BinOp::And { a && b } else { a || b })
        }
        Expr::Binary(op, l, r) if op.signature().1 == crate::model::Sort::Boolean => {
            let (a, b) = (eval_int(l, bytes)?, eval_int(r, bytes)?);
            Value::Bool(match op {
                BinOp::Eq => a == b,
                BinOp::Ne => a != b,
                BinOp::Le => a <= b,
                BinOp::Ge => a >= b,
                BinOp::Lt => a < b,
                _ => a > b,
            })
        }
        other => Value::Int(eval_int(other, bytes)?),
    })
}

pub fn eval_int(expr: &Expr, bytes: &[u8]) -> Result<u128, EvalError> {
    match expr {
        Expr::Const(v) => Ok(*v),
        Expr::MessageLength => Ok(bytes.len() as u128 * 8),
        Expr::MessageLast => (bytes.len() as u128 * 8).checked_sub(1).ok_or(EvalError::Underflow),
        Expr::Read { first, length } => {
            let (first, length) = (eval_int(first, bytes)?, eval_int(length, bytes)?);
            read_bits(bytes, first, length).map(u128::from)
        }
        Expr::Binary(op, l, r) => {
            let (a, b) = (eval_int(l, bytes)?, eval_int(r, bytes)?);
            match op {
                BinOp::Add => a.checked_add(b).ok_or(EvalError::Overflow),
                BinOp::Sub => a.checked_sub(b).ok_or(EvalError::Underflow),
                BinOp::Mul => a.checked_mul(b).ok_or(EvalError::Overflow),
                BinOp::Div => a.checked_div(b).ok_or(EvalError::DivisionByZero),
                _ => Err(EvalError::Sort),
            }
        }
        Expr::FieldValue(f) | Expr::FieldFirst(f) | Expr::FieldLength(f) => Err(EvalError::OpenReference(f.clone())),
        Expr::True | Expr::False | Expr::Not(_) => Err(EvalError::Sort),
    }
}

pub fn eval_bool(expr: &Expr, bytes: &[u8]) -> Result<bool, EvalError> {
    match eval(expr, bytes)? {
        Value::Bool(b) => Ok(b),
        Value::Int(_) => Err(EvalError::Sort),
    }
}
