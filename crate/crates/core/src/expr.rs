//! Expressions over named algebra elements, e.g. `(x - 2)' * (x - 2)`.
//!
//! Grammar (LL(1), juxtaposition is rejected):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | postfix
//! postfix := primary '\''*
//! primary := number | imaginary | 'I' | ident | '(' expr ')'
//! ```
//!
//! Numbers are decimal reals; a trailing `i` makes them imaginary. `I` is the
//! unit. Postfix `'` is the adjoint. Scalar-only subtrees are folded into a
//! single literal while parsing, and a scalar meeting an element is resolved
//! right away: `s * e` and `e * s` become `Scale(s, e)`, while `e ± s` becomes
//! `e ± Scale(s, I)`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Name(String),
    ScalarLit(C64),
    Identity,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Scale(C64, Box<Expr>),
    Adjoint(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", .expected.join(" or "))]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(C64),
    Plus,
    Minus,
    Star,
    Quote,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(z) => write!(f, "number {}", Lit(*z)),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Quote => f.write_str("`'`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_continue(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

fn lex(src: &str) -> std::result::Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'\'' => Tok::Quote,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            c if is_ident_start(c) => {
                while i < bytes.len() && is_ident_continue(bytes[i]) {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            c if c.is_ascii_digit() || c == b'.' => {
                let digits = |i: &mut usize| {
                    let s = *i;
                    while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                        *i += 1;
                    }
                    *i > s
                };
                let mut any = digits(&mut i);
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    any |= digits(&mut i);
                }
                if !any {
                    return Err(SyntaxError {
                        offset: start,
                        expected: vec!["number"],
                        found: "`.`".into(),
                    });
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        digits(&mut i);
                    }
                }
                let value: f64 = src[start..i].parse().map_err(|_| SyntaxError {
                    offset: start,
                    expected: vec!["number"],
                    found: format!("`{}`", &src[start..i]),
                })?;
                let imaginary = i < bytes.len()
                    && bytes[i] == b'i'
                    && !(i + 1 < bytes.len() && is_ident_continue(bytes[i + 1]));
                let z = if imaginary {
                    i += 1;
                    C64::new(0.0, value)
                } else {
                    C64::new(value, 0.0)
                };
                out.push((start, Tok::Number(z)));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().expect("in bounds");
                return Err(SyntaxError {
                    offset: start,
                    expected: vec!["expression"],
                    found: format!("`{ch}`"),
                });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    out.push((src.len(), Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

const PRIMARY_START: [&str; 4] = ["identifier", "number", "`I`", "`(`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().to_string(),
        }
    }

    fn expr(&mut self) -> std::result::Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> std::result::Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = mul(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<Expr, SyntaxError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(neg(self.unary()?));
        }
        let mut e = self.primary()?;
        while *self.peek() == Tok::Quote {
            self.bump();
            e = adjoint(e);
        }
        Ok(e)
    }

    fn primary(&mut self) -> std::result::Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Number(z) => {
                self.bump();
                Ok(Expr::ScalarLit(z))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(if name == "I" { Expr::Identity } else { Expr::Name(name) })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["`+`", "`-`", "`*`", "`'`", "`)`"]));
                }
                self.bump();
                Ok(e)
            }
            _ => Err(self.error(&PRIMARY_START)),
        }
    }
}

fn scalar_identity(s: C64) -> Expr {
    Expr::Scale(s, Box::new(Expr::Identity))
}

fn add(l: Expr, r: Expr) -> Expr {
    match (l, r) {
        (Expr::ScalarLit(a), Expr::ScalarLit(b)) => Expr::ScalarLit(a + b),
        (Expr::ScalarLit(a), r) => Expr::Add(Box::new(scalar_identity(a)), Box::new(r)),
        (l, Expr::ScalarLit(b)) => Expr::Add(Box::new(l), Box::new(scalar_identity(b))),
        (l, r) => Expr::Add(Box::new(l), Box::new(r)),
    }
}

fn sub(l: Expr, r: Expr) -> Expr {
    match (l, r) {
        (Expr::ScalarLit(a), Expr::ScalarLit(b)) => Expr::ScalarLit(a - b),
        (Expr::ScalarLit(a), r) => Expr::Sub(Box::new(scalar_identity(a)), Box::new(r)),
        (l, Expr::ScalarLit(b)) => Expr::Sub(Box::new(l), Box::new(scalar_identity(b))),
        (l, r) => Expr::Sub(Box::new(l), Box::new(r)),
    }
}

fn mul(l: Expr, r: Expr) -> Expr {
    match (l, r) {
        (Expr::ScalarLit(a), Expr::ScalarLit(b)) => Expr::ScalarLit(a * b),
        (Expr::ScalarLit(a), r) => Expr::Scale(a, Box::new(r)),
        (l, Expr::ScalarLit(b)) => Expr::Scale(b, Box::new(l)),
        (l, r) => Expr::Mul(Box::new(l), Box::new(r)),
    }
}

fn neg(e: Expr) -> Expr {
    match e {
        Expr::ScalarLit(a) => Expr::ScalarLit(-a),
        e => Expr::Scale(C64::new(-1.0, 0.0), Box::new(e)),
    }
}

fn adjoint(e: Expr) -> Expr {
    match e {
        Expr::ScalarLit(a) => Expr::ScalarLit(a.conj()),
        e => Expr::Adjoint(Box::new(e)),
    }
}

pub fn parse(src: &str) -> std::result::Result<Expr, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["`+`", "`-`", "`*`", "`'`", "end of input"]));
    }
    Ok(e)
}

/// Parses a source that must fold to a single complex literal, e.g. `1-2i`.
pub fn parse_scalar(src: &str) -> Result<C64> {
    match parse(src)? {
        // Adding zero clears the sign of negated zero parts.
        Expr::ScalarLit(z) => Ok(C64::new(z.re + 0.0, z.im + 0.0)),
        _ => Err(Error::InvalidInput(format!("`{src}` is not a scalar"))),
    }
}

/// Complex literal printer that re-parses to the same value.
struct Lit(C64);

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.0;
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        write!(f, "({}{}{}i)", z.re, sign, z.im.abs())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Name(n) => f.write_str(n),
            Expr::ScalarLit(z) => write!(f, "{}", Lit(*z)),
            Expr::Identity => f.write_str("I"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l} * {r})"),
            Expr::Scale(s, e) => write!(f, "({} * {e})", Lit(*s)),
            Expr::Adjoint(e) => write!(f, "{e}'"),
        }
    }
}

/// Named elements of a common shape.
#[derive(Debug, Clone)]
pub struct Environment {
    shape: AlgebraShape,
    bindings: BTreeMap<String, AlgebraElement>,
}

impl Environment {
    pub fn new(shape: AlgebraShape) -> Self {
        Self {
            shape,
            bindings: BTreeMap::new(),
        }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn bind(&mut self, name: &str, x: AlgebraElement) -> Result<()> {
        let valid = name.bytes().next().is_some_and(is_ident_start)
            && name.bytes().all(is_ident_continue);
        if !valid || name == "I" {
            return Err(Error::InvalidInput(format!("`{name}` cannot be bound")));
        }
        if x.shape() != &self.shape {
            return Err(Error::shape_mismatch(&self.shape, x.shape()));
        }
        self.bindings.insert(name.to_string(), x);
        Ok(())
    }

    pub fn with(mut self, name: &str, x: AlgebraElement) -> Result<Self> {
        self.bind(name, x)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&AlgebraElement> {
        self.bindings.get(name)
    }
}

/// Evaluates to an element; a bare scalar `s` means `s·1`.
pub fn evaluate_expr(e: &Expr, env: &Environment) -> Result<AlgebraElement> {
    Ok(match e {
        Expr::Name(n) => env
            .get(n)
            .cloned()
            .ok_or_else(|| Error::UnboundName(n.clone()))?,
        Expr::ScalarLit(z) => AlgebraElement::scalar(env.shape(), *z),
        Expr::Identity => AlgebraElement::identity(env.shape()),
        Expr::Add(l, r) => evaluate_expr(l, env)?.add(&evaluate_expr(r, env)?)?,
        Expr::Sub(l, r) => evaluate_expr(l, env)?.sub(&evaluate_expr(r, env)?)?,
        Expr::Mul(l, r) => evaluate_expr(l, env)?.mul(&evaluate_expr(r, env)?)?,
        Expr::Scale(s, e) => evaluate_expr(e, env)?.scale(*s),
        Expr::Adjoint(e) => evaluate_expr(e, env)?.adjoint(),
    })
}

/// Parses and evaluates in one step.
pub fn eval_str(src: &str, env: &Environment) -> Result<AlgebraElement> {
    evaluate_expr(&parse(src)?, env)
}
