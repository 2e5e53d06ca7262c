use std::fmt::{self, Write};

use super::ast::*;

/// Canonical text of `spec`; parsing it yields a value equal to `spec`.
pub fn pretty_print(spec: &SpecFile) -> String {
    let mut out = String::new();
    writeln!(out, "package {} is", spec.package).unwrap();
    for decl in &spec.declarations {
        out.push('\n');
        write_decl(&mut out, decl);
    }
    if !spec.declarations.is_empty() {
        out.push('\n');
    }
    writeln!(out, "end {};", spec.package).unwrap();
    out
}

fn write_decl(out: &mut String, decl: &TypeDecl) {
    let name = &decl.name;
    match &decl.definition {
        TypeDef::Modular { modulus } => {
            writeln!(out, "   type {name} is mod {modulus};").unwrap();
        }
        TypeDef::Range { lower, upper, size } => {
            writeln!(out, "   type {name} is range {lower} .. {upper} with Size => {size};").unwrap();
        }
        TypeDef::Enumeration { literals, size } => {
            let lits: Vec<String> = literals.iter().map(|(l, v)| format!("{l} => {v}")).collect();
            writeln!(out, "   type {name} is ({}) with Size => {size};", lits.join(", ")).unwrap();
        }
        TypeDef::Message(m) if m.components.is_empty() => {
            writeln!(out, "   type {name} is null message;").unwrap();
        }
        TypeDef::Message(m) => {
            writeln!(out, "   type {name} is").unwrap();
            writeln!(out, "      message").unwrap();
            for c in &m.components {
                write!(out, "         {} : {}", c.name, c.type_name).unwrap();
                for (i, t) in c.then_clauses.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_then(out, t);
                }
                out.push_str(";\n");
            }
            writeln!(out, "      end message;").unwrap();
        }
        TypeDef::Refinement(r) => {
            write!(out, "   type {name} is new {} ({} => {})", r.outer, r.field, r.inner).unwrap();
            if let Some(c) = &r.condition {
                write!(out, "\n      if {c}").unwrap();
            }
            out.push_str(";\n");
        }
    }
}

fn write_then(out: &mut String, t: &ThenClause) {
    match &t.target {
        Some(target) => write!(out, "\n            then {target}").unwrap(),
        None => out.push_str("\n            then null"),
    }
    let aspects: Vec<String> = [("First", &t.first), ("Length", &t.length)]
        .into_iter()
        .filter_map(|(n, e)| e.as_ref().map(|e| format!("{n} => {e}")))
        .collect();
    if !aspects.is_empty() {
        write!(out, "\n               with {}", aspects.join(", ")).unwrap();
    }
    if let Some(c) = &t.condition {
        write!(out, "\n               if {c}").unwrap();
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number { value, base: None, .. } => write!(f, "{value}"),
            Expr::Number { value, base: Some(base), .. } => {
                write!(f, "{base}#{}#", to_radix(*value, *base))
            }
            Expr::Name(n) => write!(f, "{n}"),
            Expr::Attribute { prefix, attribute } => write!(f, "{prefix}'{attribute}"),
            Expr::Not(e, _) => {
                f.write_str("not ")?;
                operand(f, e, 4)
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                // Relations and exponentiation do not associate.
                let left_min = match op {
                    Operator::Eq | Operator::Ne | Operator::Le | Operator::Ge | Operator::Lt | Operator::Gt => p + 1,
                    Operator::Pow => 9,
                    _ => p,
                };
                let right_min = if *op == Operator::Pow { 9 } else { p + 1 };
                operand(f, lhs, left_min)?;
                write!(f, " {} ", op.symbol())?;
                operand(f, rhs, right_min)
            }
        }
    }
}

fn operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn to_radix(mut value: u128, base: u32) -> String {
    if value == 0 {
        return "0".into();
    }
    let mut digits = Vec::new();
    while value > 0 {
        let d = (value % base as u128) as u32;
        digits.push(char::from_digit(d, base).unwrap_or('?').to_ascii_uppercase());
        value /= base as u128;
    }
    digits.iter().rev().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_spec;

    #[test]
    fn based_literals_keep_their_base() {
        assert_eq!(Expr::Number { value: 0x8100, base: Some(16), span: Span::default() }.to_string(), "16#8100#");
        assert_eq!(to_radix(0, 2), "0");
    }

    #[test]
    fn pow_prints_compactly_and_reparses() {
        let text = "package P is type T is range 0 .. 2 ** 14 - 20 with Size => 16; end P;";
        let spec = parse_spec(text).unwrap();
        let printed = pretty_print(&spec);
        assert!(printed.contains("range 0 .. 2 ** 14 - 20 with Size => 16"));
        assert_eq!(parse_spec(&printed).unwrap(), spec);
    }

    #[test]
    fn empty_message_prints_as_null_message() {
        let spec = parse_spec("package P is type M is message end message; end P;").unwrap();
        let printed = pretty_print(&spec);
        assert!(printed.contains("type M is null message;"));
        assert_eq!(parse_spec(&printed).unwrap(), spec);
    }

    #[test]
    fn non_associative_operands_get_parentheses() {
        let e = Expr::binary(
            Operator::Sub,
            Expr::name("a"),
            Expr::binary(Operator::Sub, Expr::name("b"), Expr::name("c")),
        );
        assert_eq!(e.to_string(), "a - (b - c)");
        let p = Expr::binary(Operator::Pow, Expr::binary(Operator::Pow, Expr::number(2), Expr::number(3)), Expr::number(2));
        assert_eq!(p.to_string(), "(2 ** 3) ** 2");
    }
}
