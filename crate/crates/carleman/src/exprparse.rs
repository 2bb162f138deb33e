//! Coefficient expressions over the contour variable.
//!
//! A small LL(1) grammar covering rational trigonometric data:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" exponent)?          exponent: integer literal,
//! base   := number | "i" | "t" | "tau"              possibly negated or
//!         | ident "(" expr ")"                      parenthesized
//!         | "(" expr ")" | "-" base
//! ```
//!
//! `i` is the imaginary unit; a number immediately followed by `i` is an
//! imaginary literal (`2i`). Functions: `conj`, `re`, `im`, `exp`.
//! Whitespace is insignificant.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Conj,
    Re,
    Im,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
            Func::Exp => "exp",
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Complex64),
    VarT,
    VarTau,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluate at a contour point, with an optional second kernel variable.
    pub fn evaluate(&self, t: Complex64, tau: Option<Complex64>) -> Result<Complex64> {
        match self {
            Expr::Literal(v) => Ok(*v),
            Expr::VarT => Ok(t),
            Expr::VarTau => tau.ok_or(Error::UnboundVariable { name: "tau" }),
            Expr::Neg(e) => Ok(-e.evaluate(t, tau)?),
            Expr::Add(a, b) => Ok(a.evaluate(t, tau)? + b.evaluate(t, tau)?),
            Expr::Sub(a, b) => Ok(a.evaluate(t, tau)? - b.evaluate(t, tau)?),
            Expr::Mul(a, b) => Ok(a.evaluate(t, tau)? * b.evaluate(t, tau)?),
            Expr::Div(a, b) => {
                let denom = b.evaluate(t, tau)?;
                if denom.norm() < 1e-30 {
                    return Err(Error::DivisionByZero {
                        magnitude: denom.norm(),
                    });
                }
                Ok(a.evaluate(t, tau)? / denom)
            }
            Expr::Pow(base, k) => pow_int(base.evaluate(t, tau)?, *k),
            Expr::Call(f, e) => {
                let v = e.evaluate(t, tau)?;
                Ok(match f {
                    Func::Conj => v.conj(),
                    Func::Re => Complex64::new(v.re, 0.0),
                    Func::Im => Complex64::new(v.im, 0.0),
                    Func::Exp => v.exp(),
                })
            }
        }
    }

    pub fn references_tau(&self) -> bool {
        match self {
            Expr::VarTau => true,
            Expr::Literal(_) | Expr::VarT => false,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.references_tau(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.references_tau() || b.references_tau()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < parent {
            write!(f, "(")?;
        }
        match self {
            Expr::Literal(v) => {
                if v.im == 0.0 {
                    write!(f, "{}", v.re)?;
                } else if v.re == 0.0 {
                    write!(f, "{}i", v.im)?;
                } else {
                    write!(f, "({}+{}i)", v.re, v.im)?;
                }
            }
            Expr::VarT => write!(f, "t")?,
            Expr::VarTau => write!(f, "tau")?,
            Expr::Neg(e) => {
                // `-x^k` parses as `(-x)^k` (the minus sits inside `base`),
                // so a negated power needs explicit parentheses.
                write!(f, "-")?;
                e.fmt_prec(f, 5)?;
            }
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Pow(base, k) => {
                base.fmt_prec(f, 5)?;
                if *k < 0 {
                    write!(f, "^({k})")?;
                } else {
                    write!(f, "^{k}")?;
                }
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if prec < parent {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

fn pow_int(base: Complex64, k: i64) -> Result<Complex64> {
    if k < 0 && base.norm() < 1e-30 {
        return Err(Error::DivisionByZero {
            magnitude: base.norm(),
        });
    }
    let mut result = Complex64::new(1.0, 0.0);
    let mut b = if k < 0 { 1.0 / base } else { base };
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        b *= b;
        e >>= 1;
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, start));
        }
        let ch = self.src[self.pos];
        let tok = match ch {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => self.lex_number(start)?,
            c if c.is_ascii_alphabetic() || c == b'_' => self.lex_ident(start),
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    expected: "a number, variable, function or operator".into(),
                })
            }
        };
        Ok((tok, start))
    }

    fn lex_number(&mut self, start: usize) -> Result<Tok> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        // Scientific exponent, only when it is unambiguously numeric.
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mut ahead = self.pos + 1;
            if ahead < self.src.len() && (self.src[ahead] == b'+' || self.src[ahead] == b'-') {
                ahead += 1;
            }
            if ahead < self.src.len() && self.src[ahead].is_ascii_digit() {
                self.pos = ahead;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            expected: "a numeric literal".into(),
        })?;
        // A trailing `i` fused to the number is an imaginary literal.
        if self.pos < self.src.len()
            && self.src[self.pos] == b'i'
            && !self
                .src
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
            return Ok(Tok::Imag(value));
        }
        Ok(Tok::Num(value))
    }

    fn lex_ident(&mut self, start: usize) -> Tok {
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(
            std::str::from_utf8(&self.src[start..self.pos])
                .expect("ascii")
                .to_owned(),
        )
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.offset(),
                expected: expected.into(),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let k = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    /// Integer exponent, possibly negated, possibly parenthesized.
    fn exponent(&mut self) -> Result<i64> {
        match self.bump() {
            (Tok::Num(v), off) => {
                if v.fract() != 0.0 || v.abs() > i64::MAX as f64 {
                    return Err(Error::NonIntegerExponent { offset: off });
                }
                Ok(v as i64)
            }
            (Tok::Minus, _) => Ok(-self.exponent()?),
            (Tok::LParen, _) => {
                let k = self.exponent()?;
                self.expect(Tok::RParen, "')' after the exponent")?;
                Ok(k)
            }
            (_, off) => Err(Error::NonIntegerExponent { offset: off }),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        match self.bump() {
            (Tok::Num(v), _) => Ok(Expr::Literal(Complex64::new(v, 0.0))),
            (Tok::Imag(v), _) => Ok(Expr::Literal(Complex64::new(0.0, v))),
            (Tok::Minus, _) => Ok(Expr::Neg(Box::new(self.base()?))),
            (Tok::LParen, _) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            (Tok::Ident(name), off) => match name.as_str() {
                "t" => Ok(Expr::VarT),
                "tau" => Ok(Expr::VarTau),
                "i" => Ok(Expr::Literal(Complex64::new(0.0, 1.0))),
                "conj" | "re" | "im" | "exp" => {
                    let func = match name.as_str() {
                        "conj" => Func::Conj,
                        "re" => Func::Re,
                        "im" => Func::Im,
                        _ => Func::Exp,
                    };
                    self.expect(Tok::LParen, "'(' after a function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')' closing the function call")?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
                _ => Err(Error::Syntax {
                    offset: off,
                    expected: "one of `t`, `tau`, `i`, `conj`, `re`, `im`, `exp`".into(),
                }),
            },
            (_, off) => Err(Error::Syntax {
                offset: off,
                expected: "a number, variable, `(` or unary minus".into(),
            }),
        }
    }
}

/// Parse an expression string.
pub fn parse(src: &str) -> Result<Expr> {
    let mut lexer = Lexer::new(src);
    let mut toks = Vec::new();
    loop {
        let (tok, off) = lexer.next()?;
        let done = tok == Tok::Eof;
        toks.push((tok, off));
        if done {
            break;
        }
    }
    let mut parser = Parser { toks, pos: 0 };
    let expr = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        return Err(Error::Syntax {
            offset: parser.offset(),
            expected: "end of expression or an operator".into(),
        });
    }
    Ok(expr)
}
