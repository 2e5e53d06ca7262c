use std::collections::HashMap;

use indexmap::IndexMap;
use thiserror::Error;

use super::ast::{self, Attribute, Ident, Operator, QualifiedName, RefinementDecl, Span, SpecFile, TypeDef};
use crate::model::{
    default_first, validate_graph, Edge, Expr, FieldId, FieldSpec, FieldType, MessageGraph, ModelError, Refinement,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ElaborationErrorKind {
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("`{0}` is a message type and cannot be used for a component")]
    MessageAsField(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{0}` names both a field and an enumeration literal")]
    AmbiguousName(String),
    #[error("unknown message `{0}`")]
    UnknownMessage(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("expression must be constant")]
    NotConstant,
    #[error("constant expression overflows or underflows")]
    ConstantOverflow,
    #[error("Payload component `{0}` needs a Length aspect on every incoming edge")]
    MissingLength(String),
    #[error("only a condition may be given for `then null`")]
    AspectOnNull,
    #[error("`{0}` is reserved")]
    Reserved(String),
    #[error("invalid type `{name}`: {reason}")]
    InvalidType { name: String, reason: String },
    #[error("refined field `{0}` is not of type Payload")]
    NotRefinable(String),
    #[error("in message `{message}`: {error}")]
    Model { message: String, error: Box<ModelError> },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct ElaborationError {
    pub span: Span,
    pub kind: ElaborationErrorKind,
    /// Index of the offending file in the input of [`elaborate_all`].
    pub file: usize,
}

impl ElaborationError {
    fn new(span: Span, kind: ElaborationErrorKind) -> Self {
        ElaborationError { span, kind, file: 0 }
    }
}

/// Elaborated package: scalar types, enumeration literals, message graphs and
/// refinements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Package {
    pub name: String,
    pub types: IndexMap<String, FieldType>,
    pub literals: IndexMap<String, u128>,
    pub messages: Vec<MessageGraph>,
    pub refinements: Vec<Refinement>,
}

impl Package {
    pub fn message(&self, name: &str) -> Option<&MessageGraph> {
        self.messages.iter().find(|m| {
            let short = m.name().rsplit('.').next().unwrap_or_default();
            short.eq_ignore_ascii_case(name) || m.name().eq_ignore_ascii_case(name)
        })
    }

    fn literal(&self, name: &str) -> Option<u128> {
        self.literals.iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).map(|(_, v)| *v)
    }
}

/// All packages elaborated together; refinements may reference messages of
/// any of them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub packages: Vec<Package>,
}

impl Model {
    pub fn messages(&self) -> impl Iterator<Item = &MessageGraph> {
        self.packages.iter().flat_map(|p| &p.messages)
    }

    pub fn refinements(&self) -> impl Iterator<Item = &Refinement> {
        self.packages.iter().flat_map(|p| &p.refinements)
    }

    /// Looks up `Package.Message`, or an unqualified name if it is unique.
    pub fn message(&self, name: &str) -> Option<&MessageGraph> {
        if let Some(m) = self.messages().find(|m| m.name().eq_ignore_ascii_case(name)) {
            return Some(m);
        }
        let mut candidates = self.messages().filter(|m| {
            m.name().rsplit('.').next().is_some_and(|short| short.eq_ignore_ascii_case(name))
        });
        match (candidates.next(), candidates.next()) {
            (Some(m), None) => Some(m),
            _ => None,
        }
    }

    /// Refinements whose outer message is `message`.
    pub fn refinements_of(&self, message: &str) -> Vec<Refinement> {
        self.refinements().filter(|r| r.outer_message == message).cloned().collect()
    }
}

/// Elaborates a single package. Refinements may only refer to messages of
/// that package.
pub fn elaborate(spec: &SpecFile) -> Result<Package, Vec<ElaborationError>> {
    let mut model = elaborate_all(std::slice::from_ref(spec))?;
    Ok(model.packages.remove(0))
}

/// Elaborates several packages; refinements are resolved across all of them.
pub fn elaborate_all(specs: &[SpecFile]) -> Result<Model, Vec<ElaborationError>> {
    let mut errors = Vec::new();
    let mut packages: Vec<Package> = Vec::new();
    let mut pending = Vec::new();
    for (source, spec) in specs.iter().enumerate() {
        let before = errors.len();
        if packages.iter().any(|p| spec.package.matches(&p.name)) {
            errors.push(ElaborationError::new(
                spec.package.span,
                ElaborationErrorKind::Duplicate(spec.package.name.clone()),
            ));
            errors[before..].iter_mut().for_each(|e| e.file = source);
            continue;
        }
        let (package, refinements) = elaborate_messages(spec, &mut errors);
        errors[before..].iter_mut().for_each(|e| e.file = source);
        pending.extend(refinements.into_iter().map(|(name, decl)| (packages.len(), source, name, decl)));
        packages.push(package);
    }
    for (index, source, name, decl) in pending {
        match elaborate_refinement(&name, &decl, &packages[index].name, &packages) {
            Ok(r) => packages[index].refinements.push(r),
            Err(e) => errors.push(ElaborationError { file: source, ..e }),
        }
    }
    if errors.is_empty() {
        Ok(Model { packages })
    } else {
        Err(errors)
    }
}

#[derive(Clone)]
enum Declared {
    Scalar(FieldType),
    Message,
    Refinement,
}

fn elaborate_messages(spec: &SpecFile, errors: &mut Vec<ElaborationError>) -> (Package, Vec<(Ident, RefinementDecl)>) {
    let mut package = Package {
        name: spec.package.name.clone(),
        types: IndexMap::new(),
        literals: IndexMap::new(),
        messages: Vec::new(),
        refinements: Vec::new(),
    };
    let mut declared: IndexMap<String, (String, Declared)> = IndexMap::new();
    let mut refinements = Vec::new();

    for decl in &spec.declarations {
        let key = decl.name.name.to_ascii_lowercase();
        if key == "payload" {
            errors.push(ElaborationError::new(decl.name.span, ElaborationErrorKind::Reserved(decl.name.name.clone())));
            continue;
        }
        if declared.contains_key(&key) {
            errors.push(ElaborationError::new(decl.name.span, ElaborationErrorKind::Duplicate(decl.name.name.clone())));
            continue;
        }
        let kind = match &decl.definition {
            TypeDef::Modular { .. } | TypeDef::Range { .. } | TypeDef::Enumeration { .. } => {
                match scalar_type(&decl.name, &decl.definition, &mut package, errors) {
                    Some(ty) => {
                        package.types.insert(decl.name.name.clone(), ty.clone());
                        Declared::Scalar(ty)
                    }
                    None => continue,
                }
            }
            TypeDef::Message(m) => {
                let qualified = format!("{}.{}", package.name, decl.name.name);
                if let Some(graph) = elaborate_message(&qualified, decl.name.span, m, &package, &declared, errors) {
                    package.messages.push(graph);
                }
                Declared::Message
            }
            TypeDef::Refinement(r) => {
                refinements.push((decl.name.clone(), r.clone()));
                Declared::Refinement
            }
        };
        declared.insert(key, (decl.name.name.clone(), kind));
    }
    (package, refinements)
}

fn scalar_type(
    name: &Ident,
    def: &TypeDef,
    package: &mut Package,
    errors: &mut Vec<ElaborationError>,
) -> Option<FieldType> {
    let result = (|| -> Result<FieldType, ElaborationError> {
        let ty = match def {
            TypeDef::Modular { modulus } => FieldType::Modular { modulus: constant(modulus)? },
            TypeDef::Range { lower, upper, size } => FieldType::Range {
                lower: constant(lower)?,
                upper: constant(upper)?,
                size: size_of(size)?,
            },
            TypeDef::Enumeration { literals, size } => {
                let mut values = Vec::new();
                for (lit, value) in literals {
                    if lit.matches("True") || lit.matches("False") || lit.matches("Message") {
                        return Err(ElaborationError::new(lit.span, ElaborationErrorKind::Reserved(lit.name.clone())));
                    }
                    if package.literal(&lit.name).is_some() || values.iter().any(|(n, _): &(String, u128)| lit.matches(n))
                    {
                        return Err(ElaborationError::new(lit.span, ElaborationErrorKind::Duplicate(lit.name.clone())));
                    }
                    values.push((lit.name.clone(), constant(value)?));
                }
                FieldType::Enumeration { literals: values, size: size_of(size)? }
            }
            _ => unreachable!("not a scalar type"),
        };
        ty.check().map_err(|reason| {
            ElaborationError::new(name.span, ElaborationErrorKind::InvalidType { name: name.name.clone(), reason })
        })?;
        Ok(ty)
    })();
    match result {
        Ok(ty) => {
            if let FieldType::Enumeration { literals, .. } = &ty {
                package.literals.extend(literals.iter().cloned());
            }
            Some(ty)
        }
        Err(e) => {
            errors.push(e);
            None
        }
    }
}

fn size_of(e: &ast::Expr) -> Result<u32, ElaborationError> {
    let v = constant(e)?;
    u32::try_from(v).map_err(|_| ElaborationError::new(e.span(), ElaborationErrorKind::ConstantOverflow))
}

/// Evaluates a type-level expression; only literals and arithmetic are allowed.
fn constant(e: &ast::Expr) -> Result<u128, ElaborationError> {
    let overflow = || ElaborationError::new(e.span(), ElaborationErrorKind::ConstantOverflow);
    match e {
        ast::Expr::Number { value, .. } => Ok(*value),
        ast::Expr::Binary { op, lhs, rhs } => {
            let (a, b) = (constant(lhs)?, constant(rhs)?);
            let r = match op {
                Operator::Add => a.checked_add(b),
                Operator::Sub => a.checked_sub(b),
                Operator::Mul => a.checked_mul(b),
                Operator::Div => a.checked_div(b),
                Operator::Pow => u32::try_from(b).ok().and_then(|b| a.checked_pow(b)),
                _ => return Err(ElaborationError::new(e.span(), ElaborationErrorKind::NotConstant)),
            };
            r.ok_or_else(overflow)
        }
        _ => Err(ElaborationError::new(e.span(), ElaborationErrorKind::NotConstant)),
    }
}

/// Names visible in conditions and aspects.
struct Scope<'a> {
    fields: HashMap<String, String>,
    package: &'a Package,
}

impl<'a> Scope<'a> {
    fn new(field_names: impl IntoIterator<Item = &'a str>, package: &'a Package) -> Self {
        let fields = field_names.into_iter().map(|n| (n.to_ascii_lowercase(), n.to_string())).collect();
        Scope { fields, package }
    }

    fn field(&self, name: &Ident) -> Option<FieldId> {
        self.fields.get(&name.name.to_ascii_lowercase()).map(|n| FieldId::named(n))
    }

    fn translate(&self, e: &ast::Expr) -> Result<Expr, ElaborationError> {
        Ok(match e {
            ast::Expr::Number { value, .. } => Expr::Const(*value),
            ast::Expr::Name(n) => {
                if n.matches("True") {
                    Expr::True
                } else if n.matches("False") {
                    Expr::False
                } else {
                    match (self.field(n), self.package.literal(&n.name)) {
                        (Some(_), Some(_)) => {
                            return Err(ElaborationError::new(n.span, ElaborationErrorKind::AmbiguousName(n.name.clone())))
                        }
                        (Some(f), None) => Expr::FieldValue(f),
                        (None, Some(v)) => Expr::Const(v),
                        (None, None) => {
                            return Err(ElaborationError::new(n.span, ElaborationErrorKind::UnknownName(n.name.clone())))
                        }
                    }
                }
            }
            ast::Expr::Attribute { prefix, attribute } => {
                if prefix.matches("Message") {
                    match attribute {
                        Attribute::Length => Expr::MessageLength,
                        Attribute::Last => Expr::MessageLast,
                        Attribute::First => {
                            return Err(ElaborationError::new(
                                prefix.span,
                                ElaborationErrorKind::UnknownAttribute(format!("{prefix}'{attribute}")),
                            ))
                        }
                    }
                } else {
                    let field = self.field(prefix).ok_or_else(|| {
                        ElaborationError::new(prefix.span, ElaborationErrorKind::UnknownField(prefix.name.clone()))
                    })?;
                    let name = field.name().unwrap_or_default().to_string();
                    match attribute {
                        Attribute::First => Expr::first(&name),
                        Attribute::Length => Expr::length(&name),
                        Attribute::Last => Expr::last(&name),
                    }
                }
            }
            ast::Expr::Not(inner, _) => Expr::not(self.translate(inner)?),
            ast::Expr::Binary { op, lhs, rhs } => {
                let (l, r) = (self.translate(lhs)?, self.translate(rhs)?);
                match op {
                    Operator::Add => Expr::add(l, r),
                    Operator::Sub => Expr::sub(l, r),
                    Operator::Mul => Expr::mul(l, r),
                    Operator::Div => Expr::div(l, r),
                    Operator::Eq => Expr::eq(l, r),
                    Operator::Ne => Expr::ne(l, r),
                    Operator::Le => Expr::le(l, r),
                    Operator::Ge => Expr::ge(l, r),
                    Operator::Lt => Expr::lt(l, r),
                    Operator::Gt => Expr::gt(l, r),
                    Operator::And => Expr::and(l, r),
                    Operator::Or => Expr::or(l, r),
                    Operator::Pow => match (l.fold(), r.fold()) {
                        (Expr::Const(b), Expr::Const(x)) => {
                            let v = u32::try_from(x).ok().and_then(|x| b.checked_pow(x)).ok_or_else(|| {
                                ElaborationError::new(e.span(), ElaborationErrorKind::ConstantOverflow)
                            })?;
                            Expr::Const(v)
                        }
                        _ => return Err(ElaborationError::new(e.span(), ElaborationErrorKind::NotConstant)),
                    },
                }
            }
        })
    }
}

fn elaborate_message(
    qualified: &str,
    span: Span,
    decl: &ast::MessageDecl,
    package: &Package,
    declared: &IndexMap<String, (String, Declared)>,
    errors: &mut Vec<ElaborationError>,
) -> Option<MessageGraph> {
    let before = errors.len();
    let mut fields: IndexMap<String, FieldSpec> = IndexMap::new();
    for c in &decl.components {
        if c.name.matches("Message") {
            errors.push(ElaborationError::new(c.name.span, ElaborationErrorKind::Reserved(c.name.name.clone())));
            continue;
        }
        if fields.keys().any(|k| c.name.matches(k)) {
            errors.push(ElaborationError::new(c.name.span, ElaborationErrorKind::Duplicate(c.name.name.clone())));
            continue;
        }
        match resolve_type(&c.type_name, package, declared) {
            Ok(spec) => {
                fields.insert(c.name.name.clone(), spec);
            }
            Err(e) => errors.push(e),
        }
    }
    if errors.len() > before {
        return None;
    }

    let scope = Scope::new(fields.keys().map(String::as_str), package);
    let names: Vec<&String> = fields.keys().collect();
    let size_of_target = |target: &FieldId, span: Span| -> Result<Expr, ElaborationError> {
        match target {
            FieldId::Final => Ok(Expr::Const(0)),
            FieldId::Field(n) => match fields[n].ty.size() {
                Some(bits) => Ok(Expr::Const(bits as u128)),
                None => Err(ElaborationError::new(span, ElaborationErrorKind::MissingLength(n.clone()))),
            },
            FieldId::Initial => unreachable!(),
        }
    };

    let mut edges = Vec::new();
    let mut spans = Vec::new();
    let first_target = names.first().map_or(FieldId::Final, |n| FieldId::named(n));
    let first_span = decl.components.first().map_or(span, |c| c.name.span);
    match size_of_target(&first_target, first_span) {
        Ok(length) => {
            edges.push(Edge::new(FieldId::Initial, first_target, length));
            spans.push(first_span);
        }
        Err(e) => errors.push(e),
    }

    for (i, c) in decl.components.iter().enumerate() {
        let source = FieldId::named(names[i]);
        if c.then_clauses.is_empty() {
            let target = names.get(i + 1).map_or(FieldId::Final, |n| FieldId::named(n));
            let target_span = decl.components.get(i + 1).map_or(c.name.span, |n| n.name.span);
            match size_of_target(&target, target_span) {
                Ok(length) => {
                    edges.push(Edge::new(source, target, length));
                    spans.push(c.name.span);
                }
                Err(e) => errors.push(e),
            }
            continue;
        }
        for t in &c.then_clauses {
            let result = (|| -> Result<Edge, ElaborationError> {
                let target = match &t.target {
                    None => {
                        if t.first.is_some() || t.length.is_some() {
                            return Err(ElaborationError::new(t.span, ElaborationErrorKind::AspectOnNull));
                        }
                        FieldId::Final
                    }
                    Some(name) => scope.field(name).ok_or_else(|| {
                        ElaborationError::new(name.span, ElaborationErrorKind::UnknownField(name.name.clone()))
                    })?,
                };
                let length = match &t.length {
                    Some(e) => scope.translate(e)?,
                    None => size_of_target(&target, t.span)?,
                };
                let first = match &t.first {
                    Some(e) => scope.translate(e)?,
                    None => default_first(&source),
                };
                let condition = match &t.condition {
                    Some(e) => scope.translate(e)?,
                    None => Expr::True,
                };
                Ok(Edge { source: source.clone(), target, condition, length, first })
            })();
            match result {
                Ok(edge) => {
                    edges.push(edge);
                    spans.push(t.span);
                }
                Err(e) => errors.push(e),
            }
        }
    }
    if errors.len() > before {
        return None;
    }

    let graph = MessageGraph::new(qualified, fields, edges);
    let model_errors = validate_graph(&graph);
    if model_errors.is_empty() {
        return Some(graph);
    }
    for error in model_errors {
        let at = error.edge().map_or(span, |i| spans[i]);
        errors.push(ElaborationError::new(at, ElaborationErrorKind::Model { message: qualified.to_string(), error: Box::new(error) }));
    }
    None
}

fn resolve_type(
    name: &QualifiedName,
    package: &Package,
    declared: &IndexMap<String, (String, Declared)>,
) -> Result<FieldSpec, ElaborationError> {
    let unknown = || ElaborationError::new(name.span(), ElaborationErrorKind::UnknownType(name.to_string()));
    match &name.package {
        None if name.name.matches("Payload") => return Ok(FieldSpec::new("Payload", FieldType::Opaque)),
        Some(p) if !p.matches(&package.name) => return Err(unknown()),
        _ => {}
    }
    match declared.get(&name.name.name.to_ascii_lowercase()) {
        Some((display, Declared::Scalar(ty))) => Ok(FieldSpec::new(display.clone(), ty.clone())),
        Some((display, Declared::Message | Declared::Refinement)) => {
            Err(ElaborationError::new(name.span(), ElaborationErrorKind::MessageAsField(display.clone())))
        }
        None => Err(unknown()),
    }
}

/// Resolves a refinement declaration of package `package` against the
/// already elaborated messages in `context`.
pub fn elaborate_refinement(
    name: &Ident,
    decl: &RefinementDecl,
    package: &str,
    context: &[Package],
) -> Result<Refinement, ElaborationError> {
    let find = |q: &QualifiedName| -> Result<(&Package, &MessageGraph), ElaborationError> {
        let pkg_name = q.package.as_ref().map_or(package, |p| p.name.as_str());
        context
            .iter()
            .find(|p| p.name.eq_ignore_ascii_case(pkg_name))
            .and_then(|p| p.message(&q.name.name).map(|m| (p, m)))
            .ok_or_else(|| ElaborationError::new(q.span(), ElaborationErrorKind::UnknownMessage(q.to_string())))
    };
    let (outer_package, outer) = find(&decl.outer)?;
    let (_, inner) = find(&decl.inner)?;

    let (field_name, spec) = outer
        .fields()
        .iter()
        .find(|(n, _)| decl.field.matches(n))
        .ok_or_else(|| ElaborationError::new(decl.field.span, ElaborationErrorKind::UnknownField(decl.field.name.clone())))?;
    if !spec.ty.is_opaque() {
        return Err(ElaborationError::new(decl.field.span, ElaborationErrorKind::NotRefinable(field_name.clone())));
    }

    let scope = Scope::new(outer.fields().keys().map(String::as_str), outer_package);
    let condition = match &decl.condition {
        Some(c) => scope.translate(c)?,
        None => Expr::True,
    };
    let span = decl.condition.as_ref().map_or(name.span, |c| c.span());
    Refinement::new(format!("{package}.{}", name.name), outer, field_name, inner.name(), condition)
        .map_err(|error| ElaborationError::new(span, ElaborationErrorKind::Model { message: outer.name().to_string(), error: Box::new(error) }))
}
