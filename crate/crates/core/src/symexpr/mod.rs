//! Exact rational functions over ℚ in positional chart coordinates.
//!
//! An [`Expr`] is a quotient of two [`Poly`]s kept in canonical form: the
//! numerator and denominator are coprime and the denominator is monic under
//! graded-lex order. Structural equality is therefore value equality.

pub(crate) mod parse;
pub mod poly;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};

pub use self::poly::{gcd, Monomial, Poly, Rational};
use self::parse::{eval_ast, parse_ast, Algebra};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Expr::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        Expr { num: Poly::constant(q), den: Poly::one() }
    }

    pub fn integer(n: i64) -> Self {
        Expr::constant(Rational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::constant(Rational::new(n.into(), d.into()))
    }

    /// The `i`-th chart coordinate.
    pub fn var(i: usize) -> Self {
        Expr { num: Poly::var(i), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        Expr { num: p, den: Poly::one() }
    }

    /// Build `num / den` in canonical form.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InverseOfZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = den.as_constant() {
            return Expr { num: num.scale(&c.recip()), den: Poly::one() };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        Self::normalize(num, den)
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        let lc = den.leading_coefficient();
        if lc.is_one() {
            Expr { num, den }
        } else {
            let inv = lc.recip();
            Expr { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Number of variable slots referenced (highest variable index + 1).
    pub fn width(&self) -> usize {
        self.num.width().max(self.den.width())
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            if self.den.is_one() {
                return Expr::from_poly(self.num.add(&other.num));
            }
            return Self::reduce(self.num.add(&other.num), self.den.clone());
        }
        if self.den.is_one() {
            return Expr { num: self.num.mul(&other.den).add(&other.num), den: other.den.clone() };
        }
        if other.den.is_one() {
            return Expr { num: other.num.mul(&self.den).add(&self.num), den: self.den.clone() };
        }
        let g = gcd(&self.den, &other.den);
        let d1 = self.den.div_exact(&g).unwrap();
        let d2 = other.den.div_exact(&g).unwrap();
        let num = self.num.mul(&d2).add(&other.num.mul(&d1));
        Self::reduce(num, self.den.mul(&d2))
    }

    pub fn neg(&self) -> Expr {
        Expr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return Expr::from_poly(self.num.mul(&other.num));
        }
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = other.den.div_exact(&g1).unwrap();
        let n2 = other.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let den = d1.mul(&d2);
        if let Some(c) = den.as_constant() {
            return Expr::from_poly(n1.mul(&n2).scale(&c.recip()));
        }
        Self::normalize(n1.mul(&n2), den)
    }

    pub fn scale(&self, k: &Rational) -> Expr {
        if k.is_zero() {
            return Expr::zero();
        }
        Expr { num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(Error::InverseOfZero);
        }
        Ok(Self::normalize(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn powi(&self, e: i64) -> Result<Expr> {
        let mag = u32::try_from(e.unsigned_abs()).map_err(|_| Error::InverseOfZero)?;
        let pos = Expr { num: self.num.pow(mag), den: self.den.pow(mag) };
        let pos = Self::normalize(pos.num, pos.den);
        if e < 0 {
            pos.inv()
        } else {
            Ok(pos)
        }
    }

    /// Partial derivative in variable `i` (quotient rule, canonicalized).
    pub fn diff(&self, i: usize) -> Expr {
        if self.den.is_one() {
            return Expr::from_poly(self.num.derivative(i));
        }
        let dn = self.num.derivative(i);
        let dd = self.den.derivative(i);
        if dd.is_zero() {
            return Self::reduce(dn, self.den.clone());
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        Self::reduce(num, self.den.mul(&self.den))
    }

    /// Exact value at a point.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        let needed = self.width();
        if needed > point.len() {
            return Err(Error::PointDimension { got: point.len(), needed });
        }
        let d = self.den.eval(point).unwrap();
        if d.is_zero() {
            return Err(Error::Pole);
        }
        Ok(self.num.eval(point).unwrap() / d)
    }

    /// Substitute expressions for the chart variables.
    pub fn compose(&self, subs: &[Expr]) -> Result<Expr> {
        let needed = self.width();
        if needed > subs.len() {
            return Err(Error::PointDimension { got: subs.len(), needed });
        }
        let mut acc_n = Expr::zero();
        for (m, c) in self.num.terms() {
            acc_n = acc_n.add(&monomial_at(m, c, subs)?);
        }
        let mut acc_d = Expr::zero();
        for (m, c) in self.den.terms() {
            acc_d = acc_d.add(&monomial_at(m, c, subs)?);
        }
        acc_n.checked_div(&acc_d).map_err(|_| Error::Pole)
    }

    pub fn compile(&self) -> CompiledExpr {
        CompiledExpr { num: CompiledPoly::new(&self.num), den: CompiledPoly::new(&self.den) }
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64> {
        self.compile().eval(point)
    }

    /// Display with the given variable names.
    pub fn display<'a>(&'a self, names: &'a [&'a str]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

fn monomial_at(m: &Monomial, c: &Rational, subs: &[Expr]) -> Result<Expr> {
    let mut t = Expr::constant(c.clone());
    for (i, &e) in m.exponents().iter().enumerate() {
        if e > 0 {
            t = t.mul(&subs[i].powi(e as i64)?);
        }
    }
    Ok(t)
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [&'a str],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.expr.den.is_one() {
            return self.expr.num.fmt_with(self.names, f);
        }
        f.write_str("(")?;
        self.expr.num.fmt_with(self.names, f)?;
        f.write_str(")/(")?;
        self.expr.den.fmt_with(self.names, f)?;
        f.write_str(")")
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$m(self, rhs)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$m(&self, &rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$m(&self, rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
    width: usize,
}

impl CompiledPoly {
    fn new(p: &Poly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let powers = m
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e as i32))
                    .collect();
                (c.to_f64().unwrap_or(f64::NAN), powers)
            })
            .collect();
        CompiledPoly { terms, width: p.width() }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, powers) in &self.terms {
            let mut t = *c;
            for &(i, e) in powers {
                t *= powi(x[i], e);
            }
            acc += t;
        }
        acc
    }
}

fn powi(x: f64, e: i32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// An [`Expr`] with coefficients converted to `f64` for fast node evaluation.
pub struct CompiledExpr {
    num: CompiledPoly,
    den: CompiledPoly,
}

impl CompiledExpr {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let needed = self.num.width.max(self.den.width);
        if needed > x.len() {
            return Err(Error::PointDimension { got: x.len(), needed });
        }
        let d = self.den.eval(x);
        if d == 0.0 {
            return Err(Error::Pole);
        }
        Ok(self.num.eval(x) / d)
    }
}

/// A point of a chart with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Point(pub Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Point(alloc::vec![Rational::zero(); dim])
    }

    pub fn from_integers(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// Ordered chart variable names; resolves names for parsing and printing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Vars {
    names: Vec<String>,
}

impl Vars {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        Vars { names: names.iter().map(|s| s.as_ref().to_string()).collect() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn parse(&self, text: &str) -> Result<Expr> {
        let ast = parse_ast(text)?;
        eval_ast(&ScalarAlgebra { vars: self }, &ast)
    }

    pub fn diff(&self, e: &Expr, var: &str) -> Result<Expr> {
        let i = self.index_of(var).ok_or_else(|| Error::UnknownVariable(var.to_string()))?;
        Ok(e.diff(i))
    }

    /// Canonical text for `e`; parsing it back yields `e`.
    pub fn show(&self, e: &Expr) -> String {
        let names = self.names();
        e.display(&names).to_string()
    }
}

struct ScalarAlgebra<'a> {
    vars: &'a Vars,
}

impl Algebra for ScalarAlgebra<'_> {
    type Value = Expr;

    fn number(&self, q: Rational) -> Expr {
        Expr::constant(q)
    }

    fn ident(&self, name: &str, offset: usize) -> Result<Expr> {
        self.vars
            .index_of(name)
            .map(Expr::var)
            .ok_or_else(|| Error::UnknownIdentifier { name: name.to_string(), offset })
    }

    fn vector(&self, name: &str, offset: usize) -> Result<Expr> {
        Err(Error::UnknownIdentifier { name: alloc::format!("@{}", name), offset })
    }

    fn add(&self, a: Expr, b: Expr, _: usize) -> Result<Expr> {
        Ok(a.add(&b))
    }

    fn sub(&self, a: Expr, b: Expr, _: usize) -> Result<Expr> {
        Ok(a.sub(&b))
    }

    fn mul(&self, a: Expr, b: Expr, _: usize) -> Result<Expr> {
        Ok(a.mul(&b))
    }

    fn div(&self, a: Expr, b: Expr, offset: usize) -> Result<Expr> {
        a.checked_div(&b).map_err(|_| Error::ZeroDivisor { offset })
    }

    fn neg(&self, a: Expr) -> Expr {
        a.neg()
    }

    fn as_constant(&self, a: &Expr) -> Option<Rational> {
        a.as_constant()
    }

    fn is_scalar(&self, _: &Expr) -> bool {
        true
    }

    fn powi(&self, a: Expr, e: i64, offset: usize) -> Result<Expr> {
        a.powi(e).map_err(|_| Error::ZeroDivisor { offset })
    }

    fn wedge(&self, _: Expr, _: Expr, offset: usize) -> Result<Expr> {
        Err(Error::Syntax { offset, message: "wedge of scalars".into() })
    }
}

#[cfg(test)]
mod tests;
