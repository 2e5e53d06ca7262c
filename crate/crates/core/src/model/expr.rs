use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::FieldId;

/// Binary operators of the expression language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    And,
    Or,
}

impl BinOp {
    /// Sort of both operands and sort of the result.
    pub fn signature(self) -> (Sort, Sort) {
        use BinOp::*;
        match self {
            Add | Sub | Mul | Div => (Sort::Arithmetic, Sort::Arithmetic),
            Eq | Ne | Le | Ge | Lt | Gt => (Sort::Arithmetic, Sort::Boolean),
            And | Or => (Sort::Boolean, Sort::Boolean),
        }
    }

    pub fn symbol(self) -> &'static str {
        use BinOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Eq => "=",
            Ne => "/=",
            Le => "<=",
            Ge => ">=",
            Lt => "<",
            Gt => ">",
            And => "and",
            Or => "or",
        }
    }

    /// Binding strength used when printing; higher binds tighter.
    pub(crate) fn precedence(self) -> u8 {
        use BinOp::*;
        match self {
            Or => 1,
            And => 2,
            Eq | Ne | Le | Ge | Lt | Gt => 4,
            Add | Sub => 5,
            Mul | Div => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Arithmetic,
    Boolean,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Arithmetic => f.write_str("arithmetic"),
            Sort::Boolean => f.write_str("boolean"),
        }
    }
}

/// Deep-embedded expression over field references and buffer bounds.
///
/// Integers are unsigned. `Read` only appears after substitution, where it
/// stands for the value of a field located at a closed first/length pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(u128),
    FieldValue(FieldId),
    FieldFirst(FieldId),
    FieldLength(FieldId),
    MessageLength,
    MessageLast,
    Read { first: Box<Expr>, length: Box<Expr> },
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    True,
    False,
}

macro_rules! binary_ctor {
    ($($name:ident => $op:ident),* $(,)?) => {
        $(
            #[allow(clippy::should_implement_trait)]
            pub fn $name(lhs: Expr, rhs: Expr) -> Expr {
                Expr::Binary(BinOp::$op, Box::new(lhs), Box::new(rhs))
            }
        )*
    };
}

impl Expr {
    binary_ctor! {
        add => Add, sub => Sub, mul => Mul, div => Div,
        eq => Eq, ne => Ne, le => Le, ge => Ge, lt => Lt, gt => Gt,
        and => And, or => Or,
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(operand: Expr) -> Expr {
        Expr::Not(Box::new(operand))
    }

    pub fn value(field: &str) -> Expr {
        Expr::FieldValue(FieldId::named(field))
    }

    pub fn first(field: &str) -> Expr {
        Expr::FieldFirst(FieldId::named(field))
    }

    pub fn length(field: &str) -> Expr {
        Expr::FieldLength(FieldId::named(field))
    }

    pub fn read(first: Expr, length: Expr) -> Expr {
        Expr::Read { first: Box::new(first), length: Box::new(length) }
    }

    /// `field'Last`, i.e. `field'First + field'Length - 1`.
    pub fn last(field: &str) -> Expr {
        Expr::sub(Expr::add(Expr::first(field), Expr::length(field)), Expr::Const(1))
    }

    /// Disjunction of all operands; `False` when empty.
    pub fn any(operands: impl IntoIterator<Item = Expr>) -> Expr {
        operands.into_iter().reduce(Expr::or).unwrap_or(Expr::False)
    }

    /// Conjunction of all operands; `True` when empty.
    pub fn all(operands: impl IntoIterator<Item = Expr>) -> Expr {
        operands.into_iter().reduce(Expr::and).unwrap_or(Expr::True)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Read { first, length } => vec![first, length],
            Expr::Binary(_, l, r) => vec![l, r],
            Expr::Not(e) => vec![e],
            _ => Vec::new(),
        }
    }

    /// Every field named by a `FieldValue`, `FieldFirst` or `FieldLength` node.
    pub fn field_refs(&self) -> BTreeSet<FieldId> {
        let mut out = BTreeSet::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut BTreeSet<FieldId>) {
        match self {
            Expr::FieldValue(f) | Expr::FieldFirst(f) | Expr::FieldLength(f) => {
                out.insert(f.clone());
            }
            other => other.children().into_iter().for_each(|c| c.collect_refs(out)),
        }
    }

    /// Fields whose value (not just position) is referenced.
    pub fn value_refs(&self) -> BTreeSet<FieldId> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::FieldValue(f) = e {
                out.insert(f.clone());
            }
        });
        out
    }

    pub fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        for c in self.children() {
            c.walk(visit);
        }
    }

    /// True when no field-reference constructor remains.
    pub fn is_closed(&self) -> bool {
        self.field_refs().is_empty()
    }

    /// Bottom-up rewrite; `f` sees children that were already rewritten.
    pub fn map(&self, f: &mut impl FnMut(Expr) -> Expr) -> Expr {
        let rebuilt = match self {
            Expr::Read { first, length } => Expr::read(first.map(f), length.map(f)),
            Expr::Binary(op, l, r) => Expr::Binary(*op, Box::new(l.map(f)), Box::new(r.map(f))),
            Expr::Not(e) => Expr::not(e.map(f)),
            leaf => leaf.clone(),
        };
        f(rebuilt)
    }

    /// Folds operators whose operands are literals. Operations that would fail
    /// at runtime (underflow, division by zero, overflow) are left in place so
    /// evaluation reports them.
    pub fn fold(&self) -> Expr {
        self.map(&mut |e| match e {
            Expr::Binary(op, l, r) => match (op, l.as_ref(), r.as_ref()) {
                (_, Expr::Const(a), Expr::Const(b)) => {
                    let (a, b) = (*a, *b);
                    let folded = match op {
                        BinOp::Add => a.checked_add(b).map(Expr::Const),
                        BinOp::Sub => a.checked_sub(b).map(Expr::Const),
                        BinOp::Mul => a.checked_mul(b).map(Expr::Const),
                        BinOp::Div => a.checked_div(b).map(Expr::Const),
                        BinOp::Eq => Some(Expr::bool(a == b)),
                        BinOp::Ne => Some(Expr::bool(a != b)),
                        BinOp::Le => Some(Expr::bool(a <= b)),
                        BinOp::Ge => Some(Expr::bool(a >= b)),
                        BinOp::Lt => Some(Expr::bool(a < b)),
                        BinOp::Gt => Some(Expr::bool(a > b)),
                        BinOp::And | BinOp::Or => None,
                    };
                    folded.unwrap_or(Expr::Binary(op, l, r))
                }
                (BinOp::And, Expr::True, Expr::True) => Expr::True,
                (BinOp::And, Expr::False | Expr::True, Expr::False | Expr::True) => Expr::False,
                (BinOp::Or, Expr::False, Expr::False) => Expr::False,
                (BinOp::Or, Expr::False | Expr::True, Expr::False | Expr::True) => Expr::True,
                _ => Expr::Binary(op, l, r),
            },
            Expr::Not(inner) => match *inner {
                Expr::True => Expr::False,
                Expr::False => Expr::True,
                other => Expr::not(other),
            },
            other => other,
        })
    }

    pub fn bool(b: bool) -> Expr {
        if b {
            Expr::True
        } else {
            Expr::False
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Not(_) => 3,
            _ => 9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    #[error("expected {expected} operand, found {found}")]
    SortMismatch { expected: Sort, found: Sort },
    #[error("reference to `{0}` which is not in scope")]
    OutOfScope(FieldId),
    #[error("reference to sentinel node `{0}`")]
    SentinelReference(FieldId),
}

/// Type error together with the offending subexpression.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} in `{expr}`")]
pub struct TypeError {
    pub expr: Expr,
    pub kind: TypeErrorKind,
}

/// Computes the sort of `expr`, requiring every field reference to be in
/// `in_scope`.
pub fn type_check_expression(expr: &Expr, in_scope: &BTreeSet<FieldId>) -> Result<Sort, TypeError> {
    let err = |kind| Err(TypeError { expr: expr.clone(), kind });
    match expr {
        Expr::Const(_) | Expr::MessageLength | Expr::MessageLast => Ok(Sort::Arithmetic),
        Expr::True | Expr::False => Ok(Sort::Boolean),
        Expr::FieldValue(f) | Expr::FieldFirst(f) | Expr::FieldLength(f) => {
            if f.is_sentinel() {
                err(TypeErrorKind::SentinelReference(f.clone()))
            } else if !in_scope.contains(f) {
                err(TypeErrorKind::OutOfScope(f.clone()))
            } else {
                Ok(Sort::Arithmetic)
            }
        }
        Expr::Read { first, length } => {
            expect_sort(first, Sort::Arithmetic, in_scope)?;
            expect_sort(length, Sort::Arithmetic, in_scope)?;
            Ok(Sort::Arithmetic)
        }
        Expr::Binary(op, l, r) => {
            let (operand, result) = op.signature();
            expect_sort(l, operand, in_scope)?;
            expect_sort(r, operand, in_scope)?;
            Ok(result)
        }
        Expr::Not(e) => {
            expect_sort(e, Sort::Boolean, in_scope)?;
            Ok(Sort::Boolean)
        }
    }
}

fn expect_sort(expr: &Expr, expected: Sort, in_scope: &BTreeSet<FieldId>) -> Result<(), TypeError> {
    let found = type_check_expression(expr, in_scope)?;
    if found == expected {
        Ok(())
    } else {
        Err(TypeError { expr: expr.clone(), kind: TypeErrorKind::SortMismatch { expected, found } })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::FieldValue(id) => write!(f, "{id}"),
            Expr::FieldFirst(id) => write!(f, "{id}'First"),
            Expr::FieldLength(id) => write!(f, "{id}'Length"),
            Expr::MessageLength => f.write_str("Message'Length"),
            Expr::MessageLast => f.write_str("Message'Last"),
            Expr::Read { first, length } => write!(f, "Read ({first}, {length})"),
            Expr::True => f.write_str("True"),
            Expr::False => f.write_str("False"),
            Expr::Not(e) => {
                f.write_str("not ")?;
                write_operand(f, e, self.precedence() + 1)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                write_operand(f, l, p)?;
                write!(f, " {} ", op.symbol())?;
                // Right operands need strictly tighter binding: a - (b - c).
                write_operand(f, r, p + 1)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}
