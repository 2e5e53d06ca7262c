use super::ast::*;
use super::lexer::{tokenize, Spanned, Token};
use super::SyntaxError;

const KEYWORDS: &[&str] = &[
    "and", "end", "if", "is", "message", "mod", "new", "not", "null", "or", "package", "range", "then", "type", "with",
];

pub fn is_keyword(name: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(name))
}

/// Parses one package.
pub fn parse_spec(text: &str) -> Result<SpecFile, Vec<SyntaxError>> {
    let tokens = tokenize(text).map_err(|e| vec![e])?;
    let mut p = Parser { tokens, pos: 0 };
    p.spec_file().map_err(|e| vec![e])
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].token
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        let found = self.peek().to_string();
        SyntaxError {
            span: self.span(),
            message: format!("unexpected {found}"),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Token::Ident(n) if n.eq_ignore_ascii_case(kw))
    }

    fn at_keyword_at(&self, offset: usize, kw: &str) -> bool {
        matches!(self.peek_at(offset), Token::Ident(n) if n.eq_ignore_ascii_case(kw))
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.at_keyword(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.error(&[kw]))
        }
    }

    fn symbol(&mut self, token: Token) -> PResult<Span> {
        if *self.peek() == token {
            Ok(self.advance().span)
        } else {
            Err(self.error(&[&token.to_string()]))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Token::Ident(name) if !is_keyword(&name) => {
                let span = self.advance().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn qualified_name(&mut self) -> PResult<QualifiedName> {
        let first = self.ident()?;
        if *self.peek() == Token::Dot {
            self.advance();
            let name = self.ident()?;
            Ok(QualifiedName { package: Some(first), name })
        } else {
            Ok(QualifiedName { package: None, name: first })
        }
    }

    fn spec_file(&mut self) -> PResult<SpecFile> {
        self.keyword("package")?;
        let package = self.ident()?;
        self.keyword("is")?;
        let mut declarations = Vec::new();
        while self.at_keyword("type") {
            declarations.push(self.type_decl()?);
        }
        if !self.at_keyword("end") {
            return Err(self.error(&["type", "end"]));
        }
        self.advance();
        let end = self.ident()?;
        if !end.matches(&package.name) {
            return Err(SyntaxError::new(
                end.span,
                format!("package `{}` ends with `{}`", package.name, end.name),
            ));
        }
        self.symbol(Token::Semicolon)?;
        if *self.peek() != Token::Eof {
            return Err(self.error(&["end of file"]));
        }
        Ok(SpecFile { package, declarations })
    }

    fn type_decl(&mut self) -> PResult<TypeDecl> {
        self.keyword("type")?;
        let name = self.ident()?;
        self.keyword("is")?;
        let definition = if self.at_keyword("mod") {
            self.advance();
            TypeDef::Modular { modulus: self.simple_expr()? }
        } else if self.at_keyword("range") {
            self.advance();
            let lower = self.simple_expr()?;
            self.symbol(Token::DotDot)?;
            let upper = self.simple_expr()?;
            let size = self.size_aspect()?;
            TypeDef::Range { lower, upper, size }
        } else if *self.peek() == Token::LParen {
            self.advance();
            let mut literals = Vec::new();
            loop {
                let lit = self.ident()?;
                self.symbol(Token::Arrow)?;
                literals.push((lit, self.simple_expr()?));
                if *self.peek() == Token::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
            self.symbol(Token::RParen)?;
            let size = self.size_aspect()?;
            TypeDef::Enumeration { literals, size }
        } else if self.at_keyword("message") {
            self.advance();
            let mut components = Vec::new();
            while !self.at_keyword("end") {
                components.push(self.component()?);
            }
            self.keyword("end")?;
            self.keyword("message")?;
            TypeDef::Message(MessageDecl { components })
        } else if self.at_keyword("null") {
            self.advance();
            self.keyword("message")?;
            TypeDef::Message(MessageDecl { components: Vec::new() })
        } else if self.at_keyword("new") {
            self.advance();
            let outer = self.qualified_name()?;
            self.symbol(Token::LParen)?;
            let field = self.ident()?;
            self.symbol(Token::Arrow)?;
            let inner = self.qualified_name()?;
            self.symbol(Token::RParen)?;
            let condition = if self.at_keyword("if") {
                self.advance();
                Some(self.expr()?)
            } else {
                None
            };
            TypeDef::Refinement(RefinementDecl { outer, field, inner, condition })
        } else {
            return Err(self.error(&["mod", "range", "(", "message", "null", "new"]));
        };
        self.symbol(Token::Semicolon)?;
        Ok(TypeDecl { name, definition })
    }

    fn size_aspect(&mut self) -> PResult<Expr> {
        self.keyword("with")?;
        if !self.at_keyword("Size") {
            return Err(self.error(&["Size"]));
        }
        self.advance();
        self.symbol(Token::Arrow)?;
        self.simple_expr()
    }

    fn component(&mut self) -> PResult<Component> {
        let name = self.ident()?;
        self.symbol(Token::Colon)?;
        let type_name = self.qualified_name()?;
        let mut then_clauses = Vec::new();
        if self.at_keyword("then") {
            loop {
                then_clauses.push(self.then_clause()?);
                if *self.peek() == Token::Comma && self.at_keyword_at(1, "then") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        if *self.peek() != Token::Semicolon {
            let expected: &[&str] = if then_clauses.is_empty() { &["then", ";"] } else { &[",", ";"] };
            return Err(self.error(expected));
        }
        self.advance();
        Ok(Component { name, type_name, then_clauses })
    }

    fn then_clause(&mut self) -> PResult<ThenClause> {
        let span = self.keyword("then")?;
        let target = if self.at_keyword("null") {
            self.advance();
            None
        } else {
            Some(self.ident()?)
        };
        let mut clause = ThenClause { target, first: None, length: None, condition: None, span };
        if self.at_keyword("with") {
            self.advance();
            loop {
                self.aspect(&mut clause)?;
                let another = *self.peek() == Token::Comma
                    && (self.at_keyword_at(1, "First") || self.at_keyword_at(1, "Length"))
                    && matches!(self.peek_at(2), Token::Arrow | Token::Eq);
                if another {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        if self.at_keyword("if") {
            self.advance();
            clause.condition = Some(self.expr()?);
        }
        Ok(clause)
    }

    fn aspect(&mut self, clause: &mut ThenClause) -> PResult<()> {
        let span = self.span();
        let slot = if self.at_keyword("First") {
            &mut clause.first
        } else if self.at_keyword("Length") {
            &mut clause.length
        } else {
            return Err(self.error(&["First", "Length"]));
        };
        let name = match self.peek() {
            Token::Ident(n) => n.clone(),
            _ => unreachable!(),
        };
        self.pos += 1;
        match self.peek() {
            Token::Arrow | Token::Eq => {
                self.advance();
            }
            _ => return Err(self.error(&["=>", "="])),
        }
        if slot.is_some() {
            return Err(SyntaxError::new(span, format!("duplicate {name} aspect")));
        }
        *slot = Some(self.simple_expr()?);
        Ok(())
    }

    pub(super) fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.at_keyword("or") {
            self.advance();
            let rhs = self.and_expr()?;
            lhs = Expr::binary(Operator::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.at_keyword("and") {
            self.advance();
            let rhs = self.not_expr()?;
            lhs = Expr::binary(Operator::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.at_keyword("not") {
            let span = self.advance().span;
            Ok(Expr::Not(Box::new(self.not_expr()?), span))
        } else {
            self.relation()
        }
    }

    fn relation(&mut self) -> PResult<Expr> {
        let lhs = self.simple_expr()?;
        let op = match self.peek() {
            Token::Eq => Operator::Eq,
            Token::Ne => Operator::Ne,
            Token::Lt => Operator::Lt,
            Token::Le => Operator::Le,
            Token::Gt => Operator::Gt,
            Token::Ge => Operator::Ge,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.simple_expr()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn simple_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => Operator::Add,
                Token::Minus => Operator::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Token::Star => Operator::Mul,
                Token::Slash => Operator::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if *self.peek() == Token::StarStar {
            self.advance();
            let exponent = self.primary()?;
            return Ok(Expr::binary(Operator::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Token::Number { value, base } => {
                let span = self.advance().span;
                Ok(Expr::Number { value, base, span })
            }
            Token::LParen => {
                self.advance();
                let e = self.expr()?;
                self.symbol(Token::RParen)?;
                Ok(e)
            }
            Token::Ident(name) => {
                // `Message` is a keyword except as the prefix of an attribute.
                let prefix = if name.eq_ignore_ascii_case("message") && *self.peek_at(1) == Token::Tick {
                    let span = self.advance().span;
                    Ident { name, span }
                } else {
                    self.ident()?
                };
                if *self.peek() != Token::Tick {
                    return Ok(Expr::Name(prefix));
                }
                self.advance();
                let attribute = match self.peek() {
                    Token::Ident(a) if a.eq_ignore_ascii_case("First") => Attribute::First,
                    Token::Ident(a) if a.eq_ignore_ascii_case("Last") => Attribute::Last,
                    Token::Ident(a) if a.eq_ignore_ascii_case("Length") => Attribute::Length,
                    _ => return Err(self.error(&["First", "Last", "Length"])),
                };
                self.advance();
                Ok(Expr::Attribute { prefix, attribute })
            }
            _ => Err(self.error(&["number", "identifier", "("])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_package() {
        let spec = parse_spec("package P is end P;").unwrap();
        assert_eq!(spec.package.name, "P");
        assert!(spec.declarations.is_empty());
    }

    #[test]
    fn both_aspect_spellings_are_equivalent() {
        let a = parse_spec("package P is type M is message A : T then B with Length => A * 8; B : Payload; end message; end P;");
        let b = parse_spec("package P is type M is message A : T then B with Length = A * 8; B : Payload; end message; end P;");
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn multiple_aspects_and_then_clauses() {
        let spec = parse_spec(
            "package P is type M is message
               A : T then B with First => A'First, Length => 8 if A = 1, then null if A /= 1;
               B : T;
             end message; end P;",
        )
        .unwrap();
        let TypeDef::Message(m) = &spec.declarations[0].definition else { panic!() };
        let clauses = &m.components[0].then_clauses;
        assert_eq!(clauses.len(), 2);
        assert!(clauses[0].first.is_some() && clauses[0].length.is_some() && clauses[0].condition.is_some());
        assert_eq!(clauses[1].target, None);
    }

    #[test]
    fn precedence_matches_convention() {
        let mut p = Parser { tokens: tokenize("a + b * c = d and not e or f").unwrap(), pos: 0 };
        let e = p.expr().unwrap();
        let expected = Expr::binary(
            Operator::Or,
            Expr::binary(
                Operator::And,
                Expr::binary(
                    Operator::Eq,
                    Expr::binary(
                        Operator::Add,
                        Expr::name("a"),
                        Expr::binary(Operator::Mul, Expr::name("b"), Expr::name("c")),
                    ),
                    Expr::name("d"),
                ),
                Expr::Not(Box::new(Expr::name("e")), Span::default()),
            ),
            Expr::name("f"),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn errors_carry_position_and_expectation() {
        let err = parse_spec("package P is\n  type T is mod;\nend P;").unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!((err[0].span.line, err[0].span.column), (2, 16));
        assert!(err[0].expected.iter().any(|e| e == "number"));
    }

    #[test]
    fn mismatched_end_name() {
        assert!(parse_spec("package P is end Q;").is_err());
    }

    #[test]
    fn keywords_are_case_insensitive() {
        assert!(parse_spec("PACKAGE P IS TYPE T IS MOD 2**8; END P;").is_ok());
    }

    #[test]
    fn refinement_declaration() {
        let spec =
            parse_spec("package R is type X is new E.Frame (Payload => I.Packet) if Type_Length = 16#0800#; end R;")
                .unwrap();
        let TypeDef::Refinement(r) = &spec.declarations[0].definition else { panic!() };
        assert_eq!(r.outer.to_string(), "E.Frame");
        assert_eq!(r.inner.to_string(), "I.Packet");
        assert!(r.condition.is_some());
    }
}
