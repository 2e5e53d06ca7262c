//! Surface syntax tree. Equality ignores source positions so that a
//! pretty-printed and re-parsed file compares equal to the original.

use std::fmt;

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Ident {
        Ident { name: name.into(), span: Span::default() }
    }

    pub fn matches(&self, other: &str) -> bool {
        self.name.eq_ignore_ascii_case(other)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `Name` or `Package.Name`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QualifiedName {
    pub package: Option<Ident>,
    pub name: Ident,
}

impl QualifiedName {
    pub fn span(&self) -> Span {
        self.package.as_ref().map_or(self.name.span, |p| p.span)
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.package {
            Some(p) => write!(f, "{p}.{}", self.name),
            None => write!(f, "{}", self.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecFile {
    pub package: Ident,
    pub declarations: Vec<TypeDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: Ident,
    pub definition: TypeDef,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeDef {
    Modular { modulus: Expr },
    Range { lower: Expr, upper: Expr, size: Expr },
    Enumeration { literals: Vec<(Ident, Expr)>, size: Expr },
    Message(MessageDecl),
    Refinement(RefinementDecl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageDecl {
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: Ident,
    pub type_name: QualifiedName,
    pub then_clauses: Vec<ThenClause>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThenClause {
    /// `None` for `then null`.
    pub target: Option<Ident>,
    pub first: Option<Expr>,
    pub length: Option<Expr>,
    pub condition: Option<Expr>,
    pub span: Span,
}

/// `type N is new Outer.Message (Field => Inner.Message) if Condition;`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementDecl {
    pub outer: QualifiedName,
    pub field: Ident,
    pub inner: QualifiedName,
    pub condition: Option<Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    And,
    Or,
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        use Operator::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Pow => "**",
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

    pub(crate) fn precedence(self) -> u8 {
        use Operator::*;
        match self {
            Or => 1,
            And => 2,
            Eq | Ne | Le | Ge | Lt | Gt => 4,
            Add | Sub => 5,
            Mul | Div => 6,
            Pow => 7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Attribute {
    First,
    Last,
    Length,
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attribute::First => "First",
            Attribute::Last => "Last",
            Attribute::Length => "Length",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Numeric literal; `base` is set for Ada based literals like `16#8100#`.
    Number { value: u128, base: Option<u32>, span: Span },
    Name(Ident),
    Attribute { prefix: Ident, attribute: Attribute },
    Binary { op: Operator, lhs: Box<Expr>, rhs: Box<Expr> },
    Not(Box<Expr>, Span),
}

impl Expr {
    pub fn number(value: u128) -> Expr {
        Expr::Number { value, base: None, span: Span::default() }
    }

    pub fn name(n: &str) -> Expr {
        Expr::Name(Ident::new(n))
    }

    pub fn binary(op: Operator, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn span(&self) -> Span {
        match self {
            Expr::Number { span, .. } | Expr::Not(_, span) => *span,
            Expr::Name(i) | Expr::Attribute { prefix: i, .. } => i.span,
            Expr::Binary { lhs, .. } => lhs.span(),
        }
    }

    pub(crate) fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Not(..) => 3,
            _ => 9,
        }
    }
}
