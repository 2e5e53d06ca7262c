use std::fmt::Write;

use super::{Backend, GeneratedFile};
use crate::derive::{AccessBody, DerivedParser, Formula, Path};
use crate::model::{BinOp, Expr, FieldId, FieldType, Refinement};

const SUPPORT: &str = include_str!("rflx_support.rs");
const SUPPORT_MODULE: &str = "rflx_support";

/// Emits Rust modules meant to be pulled in with `include!` (no inner
/// attributes or inner doc comments).
#[derive(Clone, Copy, Debug, Default)]
pub struct RustBackend;

impl Backend for RustBackend {
    fn support(&self) -> GeneratedFile {
        GeneratedFile { path: format!("{SUPPORT_MODULE}.rs"), text: SUPPORT.to_string() }
    }

    fn message(&self, parser: &DerivedParser, refinements: &[Refinement]) -> GeneratedFile {
        let name = parser.graph.name();
        GeneratedFile { path: format!("{}.rs", module_name(name)), text: MessageEmitter::new(parser).emit(refinements) }
    }

    fn index(&self, modules: &[GeneratedFile]) -> GeneratedFile {
        let mut out = String::from("// Generated by rflx; do not edit.\n\n");
        let mut names: Vec<&str> = vec![SUPPORT_MODULE];
        names.extend(modules.iter().map(|m| m.path.trim_end_matches(".rs")));
        for n in names {
            writeln!(out, "pub mod {n} {{\n    include!(\"{n}.rs\");\n}}").unwrap();
        }
        GeneratedFile { path: "mod.rs".into(), text: out }
    }
}

/// `Ethernet.Frame` → `ethernet_frame`.
pub fn module_name(message: &str) -> String {
    message.replace('.', "_").to_ascii_lowercase()
}

fn snake(name: &str) -> String {
    name.to_ascii_lowercase()
}

fn camel(name: &str) -> String {
    let s: String = name
        .split('_')
        .filter(|p| !p.is_empty())
        .map(|p| {
            let mut c = p.chars();
            c.next().map(|f| f.to_ascii_uppercase().to_string() + &c.as_str().to_ascii_lowercase()).unwrap_or_default()
        })
        .collect();
    if s == "Self" {
        s + "_"
    } else {
        s
    }
}

fn variant_fn(path: &Path) -> String {
    format!("variant_{}", path.key())
}

struct MessageEmitter<'p> {
    parser: &'p DerivedParser,
    out: String,
}

impl<'p> MessageEmitter<'p> {
    fn new(parser: &'p DerivedParser) -> Self {
        MessageEmitter { parser, out: String::new() }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn fields(&self) -> Vec<(&'p str, &'p FieldType)> {
        self.parser.graph.fields().iter().map(|(n, s)| (n.as_str(), &s.ty)).collect()
    }

    fn emit(mut self, refinements: &[Refinement]) -> String {
        let name = self.parser.graph.name().to_string();
        self.line(format!("// Parser for message `{name}`. Generated by rflx; do not edit."));
        self.line("");
        self.line(format!("use super::{SUPPORT_MODULE} as rt;"));
        self.line("");
        self.line(format!("pub const MESSAGE: &str = \"{name}\";"));
        self.emit_enums();
        self.line("");
        self.line("pub fn label(buffer: &mut rt::Buffer<'_>) {\n    buffer.set_label(MESSAGE);\n}");
        self.line("");
        self.line("pub fn is_contained(buffer: &rt::Buffer<'_>) -> bool {\n    buffer.label() == Some(MESSAGE)\n}");
        for (field, ty) in self.fields() {
            self.emit_field(field, ty);
        }
        self.emit_is_valid();
        for r in refinements.iter().filter(|r| r.outer_message == name) {
            self.emit_contains(r);
        }
        self.emit_variants();
        self.out
    }

    fn emit_enums(&mut self) {
        let mut seen = Vec::new();
        for spec in self.parser.graph.fields().values() {
            let FieldType::Enumeration { literals, .. } = &spec.ty else { continue };
            if seen.contains(&spec.type_name) {
                continue;
            }
            seen.push(spec.type_name.clone());
            let ty = camel(&spec.type_name);
            self.line("");
            self.line("#[derive(Clone, Copy, Debug, PartialEq, Eq)]");
            self.line(format!("pub enum {ty} {{"));
            for (lit, value) in literals {
                self.line(format!("    {} = {value},", camel(lit)));
            }
            self.line("}");
            self.line("");
            self.line(format!("impl {ty} {{"));
            self.line("    pub fn from_value(value: u64) -> Option<Self> {");
            self.line("        match value {");
            for (lit, value) in literals {
                self.line(format!("            {value} => Some({ty}::{}),", camel(lit)));
            }
            self.line("            _ => None,\n        }\n    }");
            self.line("");
            self.line("    pub fn value(self) -> u64 {\n        self as u64\n    }");
            self.line("");
            self.line("    pub fn literal(self) -> &'static str {\n        match self {");
            for (lit, _) in literals {
                self.line(format!("            {ty}::{} => \"{lit}\",", camel(lit)));
            }
            self.line("        }\n    }\n}");
        }
    }

    fn emit_field(&mut self, field: &str, ty: &FieldType) {
        let id = FieldId::named(field);
        let f = snake(field);
        let valid = &self.parser.field_valid[&id].body;
        let access = &self.parser.field_access[&id].body;

        self.line("");
        self.line(format!("fn field_valid_{f}(b: &[u8]) -> bool {{"));
        let body = formula(valid);
        self.line(format!("    {body}"));
        self.line("}");

        self.line("");
        self.line(format!("/// Location of `{field}` in bits, from the first valid variant."));
        self.line(format!("fn access_{f}(b: &[u8]) -> Option<(u128, u128)> {{"));
        self.line(format!("    if !field_valid_{f}(b) {{\n        return None;\n    }}"));
        let branches = access_branches(access);
        for (i, (valid, path)) in branches.iter().enumerate() {
            let acc = &self.parser.variant_access[path];
            let kw = if i == 0 { "    if" } else { " else if" };
            write!(
                self.out,
                "{kw} {}(b) {{\n        Some(({}, {}))\n    }}",
                variant_fn(valid),
                unwrapped(&acc.first),
                unwrapped(&acc.length)
            )
            .unwrap();
        }
        if branches.is_empty() {
            self.line("    None");
        } else {
            self.line(" else {\n        None\n    }");
        }
        self.line("}");

        self.line("");
        self.line(format!("pub fn valid_{f}(buffer: &rt::Buffer<'_>) -> Result<bool, rt::ContractViolation> {{"));
        self.line(format!("    Ok(field_valid_{f}(rt::check(buffer, MESSAGE)?))"));
        self.line("}");

        self.line("");
        let invalid = format!("rt::ContractViolation::InvalidField {{ field: \"{field}\" }}");
        let (ret, tail) = match ty {
            FieldType::Opaque => ("rt::Slice".to_string(), "Ok(rt::Slice { first, length })".to_string()),
            FieldType::Enumeration { .. } => {
                let spec = self.parser.graph.field(&id).expect("field exists");
                let ty = camel(&spec.type_name);
                (
                    ty.clone(),
                    format!("rt::read(b, Some(first), Some(length))\n        .and_then(|v| {ty}::from_value(v as u64))\n        .ok_or({invalid})"),
                )
            }
            _ => ("u64".to_string(), format!("rt::read(b, Some(first), Some(length)).map(|v| v as u64).ok_or({invalid})")),
        };
        self.line(format!("pub fn get_{f}(buffer: &rt::Buffer<'_>) -> Result<{ret}, rt::ContractViolation> {{"));
        self.line("    let b = rt::check(buffer, MESSAGE)?;");
        self.line(format!("    let (first, length) = access_{f}(b).ok_or({invalid})?;"));
        self.line("    debug_assert!(rt::in_bounds(b, Some(first), Some(length)));");
        self.line(format!("    {tail}"));
        self.line("}");
    }

    fn emit_is_valid(&mut self) {
        self.line("");
        self.line("/// True iff exactly one path through the message is valid.");
        self.line("pub fn is_valid(buffer: &rt::Buffer<'_>) -> Result<bool, rt::ContractViolation> {");
        self.line("    let b = rt::check(buffer, MESSAGE)?;");
        let calls: Vec<String> = self.parser.final_paths.iter().map(|p| format!("{}(b)", variant_fn(p))).collect();
        if calls.is_empty() {
            self.line("    let _ = b;\n    Ok(false)");
        } else {
            self.line(format!("    let valid = [{}];", calls.join(", ")));
            self.line("    Ok(valid.iter().filter(|v| **v).count() == 1)");
        }
        self.line("}");
    }

    fn emit_contains(&mut self, r: &Refinement) {
        let short = r.name.rsplit('.').next().unwrap_or(&r.name);
        let payload = snake(&r.payload_field);
        self.line("");
        self.line(format!("/// Payload `{}` as a buffer holding `{}` if `{}` holds.", r.payload_field, r.inner_message, r.condition));
        self.line(format!(
            "pub fn contains_{}<'a>(buffer: &rt::Buffer<'a>) -> Result<Option<rt::Buffer<'a>>, rt::ContractViolation> {{",
            snake(short)
        ));
        self.line("    if !is_valid(buffer)? {");
        self.line("        return Err(rt::ContractViolation::InvalidMessage { message: MESSAGE });\n    }");
        self.line("    let b = buffer.bytes();");
        self.line(format!("    if !rt::holds({}) {{\n        return Ok(None);\n    }}", field_expr(&r.condition)));
        self.line(format!("    let Some((first, length)) = access_{payload}(b) else {{\n        return Ok(None);\n    }};"));
        self.line("    if !first.is_multiple_of(8) || !length.is_multiple_of(8) {");
        self.line(format!(
            "        return Err(rt::ContractViolation::Misaligned {{ field: \"{}\", first, length }});\n    }}",
            r.payload_field
        ));
        self.line("    let bytes = &b[(first / 8) as usize..((first + length) / 8) as usize];");
        self.line(format!("    Ok(Some(rt::Buffer::labeled(bytes, \"{}\")))", r.inner_message));
        self.line("}");
    }

    fn emit_variants(&mut self) {
        for (path, f) in &self.parser.variant_valid {
            let acc = &self.parser.variant_access[path];
            self.line("");
            self.line(format!("// {} via {path}: first {}, length {}", f.field, acc.first, acc.length));
            self.line(format!("fn {}(b: &[u8]) -> bool {{", variant_fn(path)));
            self.line(format!("    {}", formula(&f.body)));
            self.line("}");
        }
    }
}

fn access_branches(body: &AccessBody) -> Vec<(Path, Path)> {
    body.branches().into_iter().map(|(v, a)| (v.clone(), a.clone())).collect()
}

/// Top-level operands of `f` go on separate lines.
fn formula(f: &Formula) -> String {
    let (parts, sep) = match f {
        Formula::And(..) => (operands(f, true), "\n        && "),
        Formula::Or(..) => (operands(f, false), "\n        || "),
        _ => return atom(f),
    };
    parts.iter().map(|p| inline(p, matches!(f, Formula::And(..)))).collect::<Vec<_>>().join(sep)
}

/// Operands of a chain of `&&` (or `||`) nodes.
fn operands(f: &Formula, conjunction: bool) -> Vec<&Formula> {
    match (f, conjunction) {
        (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
            let mut v = operands(a, conjunction);
            v.extend(operands(b, conjunction));
            v
        }
        _ => vec![f],
    }
}

/// `f` as an operand; disjunctions inside conjunctions need parentheses.
fn inline(f: &Formula, in_conjunction: bool) -> String {
    match f {
        Formula::And(..) => operands(f, true).iter().map(|p| inline(p, true)).collect::<Vec<_>>().join(" && "),
        Formula::Or(..) => {
            let s = operands(f, false).iter().map(|p| inline(p, false)).collect::<Vec<_>>().join(" || ");
            if in_conjunction {
                format!("({s})")
            } else {
                s
            }
        }
        _ => atom(f),
    }
}

fn atom(f: &Formula) -> String {
    match f {
        Formula::Condition(Expr::True) => "true".into(),
        Formula::Condition(e) => format!("rt::holds({})", expr(e)),
        Formula::InBounds { first, length } => format!("rt::in_bounds(b, {}, {})", expr(first), expr(length)),
        Formula::VariantValid(p) => format!("{}(b)", variant_fn(p)),
        Formula::False => "false".into(),
        Formula::And(..) | Formula::Or(..) => inline(f, true),
    }
}

fn binop(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "add",
        BinOp::Sub => "sub",
        BinOp::Mul => "mul",
        BinOp::Div => "div",
        BinOp::Eq => "eq",
        BinOp::Ne => "ne",
        BinOp::Le => "le",
        BinOp::Ge => "ge",
        BinOp::Lt => "lt",
        BinOp::Gt => "gt",
        BinOp::And => "and",
        BinOp::Or => "or",
    }
}

/// Integer operand inside a function returning `Option`.
fn unwrapped(e: &Expr) -> String {
    match e {
        Expr::Const(v) => v.to_string(),
        _ => format!("{}?", expr(e)),
    }
}

/// Closed expression over `b`.
fn expr(e: &Expr) -> String {
    transcribe(e, &|f| unreachable!("open reference to {f} in a derived expression"))
}

/// Refinement condition; field references go through the field accessors.
fn field_expr(e: &Expr) -> String {
    transcribe(e, &|r| match r {
        Expr::FieldValue(f) => format!("access_{}(b).and_then(|(f, l)| rt::read(b, Some(f), Some(l)))", snake(&f.to_string())),
        Expr::FieldFirst(f) => format!("access_{}(b).map(|(f, _)| f)", snake(&f.to_string())),
        Expr::FieldLength(f) => format!("access_{}(b).map(|(_, l)| l)", snake(&f.to_string())),
        _ => unreachable!(),
    })
}

fn transcribe(e: &Expr, refs: &dyn Fn(&Expr) -> String) -> String {
    match e {
        Expr::Const(v) => format!("Some({v})"),
        Expr::True => "Some(true)".into(),
        Expr::False => "Some(false)".into(),
        Expr::MessageLength => "rt::length(b)".into(),
        Expr::MessageLast => "rt::last(b)".into(),
        Expr::Read { first, length } => format!("rt::read(b, {}, {})", transcribe(first, refs), transcribe(length, refs)),
        Expr::Not(x) => format!("rt::not({})", transcribe(x, refs)),
        Expr::Binary(op, l, r) => format!("rt::{}({}, {})", binop(*op), transcribe(l, refs), transcribe(r, refs)),
        Expr::FieldValue(_) | Expr::FieldFirst(_) | Expr::FieldLength(_) => refs(e),
    }
}
