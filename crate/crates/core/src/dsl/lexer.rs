use std::fmt;

use super::ast::Span;
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Number { value: u128, base: Option<u32> },
    Semicolon,
    Colon,
    Comma,
    Dot,
    DotDot,
    LParen,
    RParen,
    Arrow,
    Tick,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    StarStar,
    Slash,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Token::Ident(n) => return write!(f, "`{n}`"),
            Token::Number { value, .. } => return write!(f, "number {value}"),
            Token::Semicolon => ";",
            Token::Colon => ":",
            Token::Comma => ",",
            Token::Dot => ".",
            Token::DotDot => "..",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::Arrow => "=>",
            Token::Tick => "'",
            Token::Eq => "=",
            Token::Ne => "/=",
            Token::Lt => "<",
            Token::Le => "<=",
            Token::Gt => ">",
            Token::Ge => ">=",
            Token::Plus => "+",
            Token::Minus => "-",
            Token::Star => "*",
            Token::StarStar => "**",
            Token::Slash => "/",
            Token::Eof => return f.write_str("end of file"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub token: Token,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span { line: self.line, column: self.column }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut cur = Cursor { chars: text.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    loop {
        while cur.peek().is_some_and(char::is_whitespace) {
            cur.bump();
        }
        let span = cur.span();
        let Some(c) = cur.bump() else {
            out.push(Spanned { token: Token::Eof, span });
            return Ok(out);
        };
        let token = match c {
            ';' => Token::Semicolon,
            ':' => Token::Colon,
            ',' => Token::Comma,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '\'' => Token::Tick,
            '+' => Token::Plus,
            '.' if cur.peek() == Some('.') => {
                cur.bump();
                Token::DotDot
            }
            '.' => Token::Dot,
            '=' if cur.peek() == Some('>') => {
                cur.bump();
                Token::Arrow
            }
            '=' => Token::Eq,
            '/' if cur.peek() == Some('=') => {
                cur.bump();
                Token::Ne
            }
            '/' => Token::Slash,
            '<' if cur.peek() == Some('=') => {
                cur.bump();
                Token::Le
            }
            '<' => Token::Lt,
            '>' if cur.peek() == Some('=') => {
                cur.bump();
                Token::Ge
            }
            '>' => Token::Gt,
            '*' if cur.peek() == Some('*') => {
                cur.bump();
                Token::StarStar
            }
            '*' => Token::Star,
            '-' if cur.peek() == Some('-') => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
                continue;
            }
            '-' => Token::Minus,
            c if c.is_ascii_alphabetic() => {
                let mut name = String::from(c);
                while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                    name.push(c);
                    cur.bump();
                }
                if name.ends_with('_') || name.contains("__") {
                    return Err(SyntaxError::new(span, format!("malformed identifier `{name}`")));
                }
                Token::Ident(name)
            }
            c if c.is_ascii_digit() => number(&mut cur, c, span)?,
            other => return Err(SyntaxError::new(span, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned { token, span });
    }
}

fn digits(cur: &mut Cursor<'_>, first: Option<char>, radix: u32, span: Span) -> Result<u128, SyntaxError> {
    let mut value: u128 = 0;
    let mut any = false;
    let mut push = |d: char| -> Result<(), SyntaxError> {
        let digit = d
            .to_digit(radix)
            .ok_or_else(|| SyntaxError::new(span, format!("digit `{d}` is invalid in base {radix}")))?;
        value = value
            .checked_mul(radix as u128)
            .and_then(|v| v.checked_add(digit as u128))
            .ok_or_else(|| SyntaxError::new(span, "numeric literal too large"))?;
        any = true;
        Ok(())
    };
    if let Some(d) = first {
        push(d)?;
    }
    while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
        cur.bump();
        if c != '_' {
            push(c)?;
        }
    }
    if !any {
        return Err(SyntaxError::new(span, "missing digits in numeric literal"));
    }
    Ok(value)
}

fn number(cur: &mut Cursor<'_>, first: char, span: Span) -> Result<Token, SyntaxError> {
    let mut value: u128 = first.to_digit(10).unwrap_or(0) as u128;
    while let Some(c) = cur.peek().filter(|c| c.is_ascii_digit() || *c == '_') {
        cur.bump();
        if c != '_' {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(c.to_digit(10).unwrap_or(0) as u128))
                .ok_or_else(|| SyntaxError::new(span, "numeric literal too large"))?;
        }
    }
    if cur.peek() != Some('#') {
        return Ok(Token::Number { value, base: None });
    }
    cur.bump();
    let base = u32::try_from(value).ok().filter(|b| (2..=16).contains(b));
    let Some(base) = base else {
        return Err(SyntaxError::new(span, format!("unsupported base {value}")));
    };
    let value = digits(cur, None, base, span)?;
    if cur.bump() != Some('#') {
        return Err(SyntaxError::new(span, "based literal must end with `#`"));
    }
    Ok(Token::Number { value, base: Some(base) })
}
