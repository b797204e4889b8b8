//! Tokenizer, recursive-descent parser and generic AST evaluation.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = ("-" | "+") unary | power ;
//! power    = atom [ "^" exponent ] ;
//! exponent = ("-" | "+") exponent | power ;
//! atom     = number | ident | "@" ident | "(" expr ")" ;
//! number   = digit { digit } [ "." digit { digit } ] ;
//! ident    = (letter | "_") { letter | digit | "_" } ;
//! ```
//!
//! `^` is right-associative. Between scalars it is exponentiation and the
//! exponent must evaluate to an integer constant; between basis elements
//! (`d<var>` for forms, `@<var>` for vectors) it is the wedge product.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;

use super::poly::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    At(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(_) => "number".into(),
        Tok::Ident(s) => format!("identifier `{}`", s),
        Tok::At(s) => format!("`@{}`", s),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let is_ident_start = |c: u8| c.is_ascii_alphabetic() || c == b'_';
    let is_ident = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'@' => {
                i += 1;
                if i >= bytes.len() || !is_ident_start(bytes[i]) {
                    return Err(Error::Syntax {
                        offset: i,
                        message: "expected identifier after `@`".into(),
                    });
                }
                let s = i;
                while i < bytes.len() && is_ident(bytes[i]) {
                    i += 1;
                }
                out.push((Tok::At(src[s..i].to_string()), start));
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part = &src[start..i];
                let mut value = Rational::from_integer(int_part.parse::<BigInt>().unwrap());
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let fs = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if fs == i {
                        return Err(Error::Syntax {
                            offset: i,
                            message: "expected digits after decimal point".into(),
                        });
                    }
                    let frac: BigInt = src[fs..i].parse().unwrap();
                    let scale = num_traits::pow::pow(BigInt::from(10), i - fs);
                    value += Rational::new(frac, scale);
                }
                out.push((Tok::Num(value), start));
                continue;
            }
            c if is_ident_start(c) => {
                while i < bytes.len() && is_ident(bytes[i]) {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap();
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", ch),
                });
            }
        }
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Num(Rational),
    Ident(String),
    Vector(String),
    Neg(Box<Ast>),
    Bin(BinOp, Box<Ast>, Box<Ast>),
    Caret(Box<Ast>, Box<Ast>),
}

/// AST node with the byte offset where it starts.
#[derive(Clone, Debug)]
pub(crate) struct Ast {
    pub node: Node,
    pub offset: usize,
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

    fn unexpected(&self, what: &str) -> Error {
        Error::Syntax {
            offset: self.offset(),
            message: format!("expected {}, found {}", what, describe(self.peek())),
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let offset = lhs.offset;
            lhs = Ast { node: Node::Bin(op, Box::new(lhs), Box::new(rhs)), offset };
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let offset = lhs.offset;
            lhs = Ast { node: Node::Bin(op, Box::new(lhs), Box::new(rhs)), offset };
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        match self.peek() {
            Tok::Minus => {
                let (_, offset) = self.bump();
                let inner = self.unary()?;
                Ok(Ast { node: Node::Neg(Box::new(inner)), offset })
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.exponent()?;
            let offset = base.offset;
            return Ok(Ast { node: Node::Caret(Box::new(base), Box::new(exp)), offset });
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Ast> {
        match self.peek() {
            Tok::Minus => {
                let (_, offset) = self.bump();
                let inner = self.exponent()?;
                Ok(Ast { node: Node::Neg(Box::new(inner)), offset })
            }
            Tok::Plus => {
                self.bump();
                self.exponent()
            }
            _ => self.power(),
        }
    }

    fn atom(&mut self) -> Result<Ast> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(q) => {
                self.bump();
                Ok(Ast { node: Node::Num(q), offset })
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Ast { node: Node::Ident(s), offset })
            }
            Tok::At(s) => {
                self.bump();
                Ok(Ast { node: Node::Vector(s), offset })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(Ast { offset, ..inner })
            }
            _ => Err(self.unexpected("an operand")),
        }
    }
}

pub(crate) fn parse_ast(src: &str) -> Result<Ast> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let ast = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(ast)
}

/// Interpretation of AST leaves and operators in some value domain.
pub(crate) trait Algebra {
    type Value;
    fn number(&self, q: Rational) -> Self::Value;
    fn ident(&self, name: &str, offset: usize) -> Result<Self::Value>;
    fn vector(&self, name: &str, offset: usize) -> Result<Self::Value>;
    fn add(&self, a: Self::Value, b: Self::Value, offset: usize) -> Result<Self::Value>;
    fn sub(&self, a: Self::Value, b: Self::Value, offset: usize) -> Result<Self::Value>;
    fn mul(&self, a: Self::Value, b: Self::Value, offset: usize) -> Result<Self::Value>;
    fn div(&self, a: Self::Value, b: Self::Value, offset: usize) -> Result<Self::Value>;
    fn neg(&self, a: Self::Value) -> Self::Value;
    /// Constant rational value, if `a` is a plain scalar constant.
    fn as_constant(&self, a: &Self::Value) -> Option<Rational>;
    /// `true` for values of grade zero.
    fn is_scalar(&self, a: &Self::Value) -> bool;
    fn powi(&self, a: Self::Value, e: i64, offset: usize) -> Result<Self::Value>;
    fn wedge(&self, a: Self::Value, b: Self::Value, offset: usize) -> Result<Self::Value>;
}

pub(crate) fn eval_ast<A: Algebra>(alg: &A, ast: &Ast) -> Result<A::Value> {
    let off = ast.offset;
    match &ast.node {
        Node::Num(q) => Ok(alg.number(q.clone())),
        Node::Ident(s) => alg.ident(s, off),
        Node::Vector(s) => alg.vector(s, off),
        Node::Neg(a) => Ok(alg.neg(eval_ast(alg, a)?)),
        Node::Bin(op, a, b) => {
            let l = eval_ast(alg, a)?;
            let r = eval_ast(alg, b)?;
            match op {
                BinOp::Add => alg.add(l, r, off),
                BinOp::Sub => alg.sub(l, r, off),
                BinOp::Mul => alg.mul(l, r, b.offset),
                BinOp::Div => alg.div(l, r, b.offset),
            }
        }
        Node::Caret(a, b) => {
            let l = eval_ast(alg, a)?;
            let r = eval_ast(alg, b)?;
            if alg.is_scalar(&r) && alg.is_scalar(&l) {
                let e = alg
                    .as_constant(&r)
                    .filter(|q| q.is_integer())
                    .ok_or(Error::NonIntegerExponent { offset: b.offset })?;
                let e = i64::try_from(e.to_integer())
                    .ok()
                    .filter(|e| e.unsigned_abs() <= u32::MAX as u64)
                    .ok_or(Error::NonIntegerExponent { offset: b.offset })?;
                alg.powi(l, e, off)
            } else {
                alg.wedge(l, r, off)
            }
        }
    }
}

