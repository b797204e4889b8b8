//! Sparse multivariate polynomials over ℚ with graded-lexicographic order.
//!
//! Variables are positional: variable `i` is the `i`-th chart coordinate.
//! Exponent vectors are stored with trailing zeros trimmed, so polynomials
//! over different numbers of variables combine without bookkeeping.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// An exponent vector with trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        Self::var_pow(i, 1)
    }

    pub fn var_pow(i: usize, e: u32) -> Self {
        if e == 0 {
            return Self::one();
        }
        let mut v = alloc::vec![0; i + 1];
        v[i] = e;
        Monomial(v)
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Every monomial in `nvars` variables of total degree at most
    /// `max_deg`, by degree and then lexicographically (`x` before `y`).
    pub fn all_up_to(nvars: usize, max_deg: u32) -> Vec<Monomial> {
        fn fill(out: &mut Vec<Monomial>, cur: &mut Vec<u32>, i: usize, left: u32) {
            if i + 1 == cur.len() {
                cur[i] = left;
                out.push(Monomial::from_exponents(cur.clone()));
                return;
            }
            for e in (0..=left).rev() {
                cur[i] = e;
                fill(out, cur, i + 1, left - e);
            }
        }
        let mut out = alloc::vec![Monomial::one()];
        if nvars == 0 {
            return out;
        }
        for deg in 1..=max_deg {
            fill(&mut out, &mut alloc::vec![0; nvars], 0, deg);
        }
        out
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of variable slots in use (index of the last variable + 1).
    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let v = (0..n).map(|i| self.exp(i) + other.exp(i)).collect();
        Monomial(v)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if other.0.len() > self.0.len() {
            return None;
        }
        let mut v = Vec::with_capacity(self.0.len());
        for i in 0..self.0.len() {
            let (a, b) = (self.exp(i), other.exp(i));
            if b > a {
                return None;
            }
            v.push(a - b);
        }
        Some(Monomial::from_exponents(v))
    }

    fn with_exp(&self, i: usize, e: u32) -> Monomial {
        let mut v = self.0.clone();
        if v.len() <= i {
            v.resize(i + 1, 0);
        }
        v[i] = e;
        Monomial::from_exponents(v)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            for i in 0..n {
                match self.exp(i).cmp(&other.exp(i)) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in positional variables with rational coefficients.
///
/// Terms are kept in a `BTreeMap` under the graded-lex order, so the leading
/// term is the last entry. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn var(i: usize) -> Self {
        Self::term(Monomial::var(i), Rational::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(iter: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.get(&Monomial::one()).map_or(false, |c| c.is_one())
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.terms.values().next().cloned().unwrap_or_else(Rational::zero))
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Number of variable slots referenced by any term.
    pub fn width(&self) -> usize {
        self.terms.keys().map(Monomial::width).max().unwrap_or(0)
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) = if self.terms.len() >= other.terms.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(n, c)| (n.mul(m), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e > 0 {
                out.add_term(m.with_exp(i, e - 1), c * Rational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Exact evaluation. Variables beyond `point.len()` are an error (`None`).
    pub fn eval(&self, point: &[Rational]) -> Option<Rational> {
        if self.width() > point.len() {
            return None;
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow::pow(point[i].clone(), e as usize);
                }
            }
            acc += t;
        }
        Some(acc)
    }

    /// Substitute polynomials for variables (`subs[i]` replaces variable `i`).
    pub fn compose(&self, subs: &[Poly]) -> Option<Poly> {
        if self.width() > subs.len() {
            return None;
        }
        let mut acc = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t = t.mul(&subs[i].pow(e));
                }
            }
            acc = acc.add(&t);
        }
        Some(acc)
    }

    /// Divide by the leading coefficient so the leading term has coefficient 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) if !c.is_one() => {
                let inv = c.recip();
                self.scale(&inv)
            }
            _ => self.clone(),
        }
    }

    pub fn leading_coefficient(&self) -> Rational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero)
    }

    /// `self / divisor` when the division is exact.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading()?;
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let lc_inv = lc.recip();
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            let m = rm.div(lm)?;
            let c = rc * &lc_inv;
            rem = rem.sub(&divisor.mul_term(&m, &c));
            quot.add_term(m, c);
        }
        Some(quot)
    }

    /// Substitute `point` for every variable except `x_v`.
    fn specialize(&self, v: usize, point: &[Rational]) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut k = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if i != v && e > 0 {
                    k *= num_traits::pow::pow(point[i].clone(), e as usize);
                }
            }
            out.add_term(Monomial::var_pow(v, m.exp(v)), k);
        }
        out
    }

    fn min_var(&self) -> Option<usize> {
        self.terms
            .keys()
            .filter_map(|m| m.exponents().iter().position(|&e| e > 0))
            .min()
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    /// Coefficients with respect to variable `v`: `self = Σ_k coeffs[k] · x_v^k`.
    fn coeffs_in(&self, v: usize) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.exp(v);
            out.entry(k).or_default().add_term(m.with_exp(v, 0), c.clone());
        }
        out
    }

    fn lc_in(&self, v: usize) -> Poly {
        let d = self.degree_in(v);
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if m.exp(v) == d {
                out.add_term(m.with_exp(v, 0), c.clone());
            }
        }
        out
    }

    fn content_in(&self, v: usize) -> Poly {
        let mut g = Poly::zero();
        for c in self.coeffs_in(v).values() {
            g = gcd(&g, c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn primitive_in(&self, v: usize) -> Poly {
        let c = self.content_in(v);
        self.div_exact(&c).expect("content divides its polynomial")
    }

    /// Pseudo-remainder of `self` by `b` as polynomials in `x_v`.
    fn prem(&self, b: &Poly, v: usize) -> Poly {
        let db = b.degree_in(v);
        let lb = b.lc_in(v);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(v) >= db {
            let d = r.degree_in(v) - db;
            let lr = r.lc_in(v);
            let shift = lr.mul_term(&Monomial::var_pow(v, d), &Rational::one());
            r = lb.mul(&r).sub(&shift.mul(b));
        }
        r
    }

    /// Scale by a positive rational so the coefficients are coprime integers.
    fn integer_primitive(&self) -> Poly {
        let mut den = BigInt::one();
        let mut num = BigInt::zero();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
        }
        if num.is_zero() {
            return self.clone();
        }
        self.scale(&Rational::new(den, num))
    }

    /// Rational coefficient with the largest absolute value (for diagnostics).
    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Greatest common divisor over ℚ, normalized monic (zero iff both inputs are zero).
///
/// Variables that cannot occur in the gcd are first eliminated by taking
/// contents; a variable is ruled out when a univariate image of the two
/// inputs (other variables specialized to integers) is coprime. What remains
/// goes through a recursive primitive PRS.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let width = a.width().max(b.width());
    let mut best: Option<(usize, u32)> = None;
    for v in 0..width {
        let (da, db) = (a.degree_in(v), b.degree_in(v));
        if da == 0 && db == 0 {
            continue;
        }
        if da == 0 || db == 0 || image_degree_bound(a, b, v) == Some(0) {
            // the gcd does not involve x_v
            let g = gcd(&a.content_in(v), &b.content_in(v));
            return g;
        }
        let d = da.min(db);
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((v, d));
        }
    }
    let v = match best {
        Some((v, _)) => v,
        None => return Poly::one(),
    };
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let content = gcd(&ca, &cb);
    let mut p = a.div_exact(&ca).expect("content divides");
    let mut q = b.div_exact(&cb).expect("content divides");
    if p.degree_in(v) < q.degree_in(v) {
        core::mem::swap(&mut p, &mut q);
    }
    let prim = loop {
        if q.is_zero() {
            break p.primitive_in(v);
        }
        if q.degree_in(v) == 0 {
            break Poly::one();
        }
        let r = p.prem(&q, v);
        p = q;
        q = if r.is_zero() { r } else { r.primitive_in(v).integer_primitive() };
    };
    content.mul(&prim).monic()
}

/// Upper bound on `deg_v gcd(a, b)` from a univariate image, or `None` if
/// no specialization keeps both leading coefficients alive.
fn image_degree_bound(a: &Poly, b: &Poly, v: usize) -> Option<u32> {
    let width = a.width().max(b.width());
    let (la, lb) = (a.lc_in(v), b.lc_in(v));
    for attempt in 0..4i64 {
        let point: Vec<Rational> = (0..width)
            .map(|i| Rational::from_integer(BigInt::from(3 + 7 * attempt + 5 * (i as i64) * (i as i64 + attempt + 2))))
            .collect();
        if la.eval(&point).is_none_or(|c| c.is_zero()) || lb.eval(&point).is_none_or(|c| c.is_zero()) {
            continue;
        }
        let ua = a.specialize(v, &point);
        let ub = b.specialize(v, &point);
        return Some(univariate_gcd(ua, ub).degree_in(v));
    }
    None
}

fn univariate_gcd(mut p: Poly, mut q: Poly) -> Poly {
    let v = match p.min_var() {
        Some(v) => v,
        None => return Poly::one(),
    };
    if p.degree_in(v) < q.degree_in(v) {
        core::mem::swap(&mut p, &mut q);
    }
    while !q.is_zero() {
        let r = p.prem(&q, v);
        p = q;
        q = if r.is_zero() { r } else { r.integer_primitive() };
    }
    p
}

pub(crate) fn fmt_rational(c: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl Poly {
    /// Print with the given variable names, highest term first.
    pub fn fmt_with(&self, names: &[&str], f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mut first = true;
            if !mag.is_one() || m.is_one() {
                fmt_rational(&mag, f)?;
                first = false;
            }
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                match names.get(i) {
                    Some(n) => f.write_str(n)?,
                    None => write!(f, "_{}", i)?,
                }
                if e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}
