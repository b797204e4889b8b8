//! Randomized exact identity checks for the exterior and Schouten calculus.
//!
//! Each check draws its inputs from a seeded [`Sampler`] and compares both
//! sides of an identity for exact equality. A [`Tally`] records how many
//! cases ran and the first counterexample, if any.

use alloc::format;
use alloc::string::String;

use crate::error::Result;
use crate::exterior::{contract, lie_derivative, schouten, Blade, KForm, KVector};
use crate::sample::Sampler;
use crate::symexpr::Expr;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tally {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl Tally {
    pub fn new(name: &'static str) -> Self {
        Tally { name, cases: 0, failures: 0, first_failure: None }
    }

    pub fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

fn sign<T>(odd: bool, x: T) -> T
where
    T: Negate,
{
    if odd {
        x.negate()
    } else {
        x
    }
}

pub trait Negate {
    fn negate(self) -> Self;
}

impl Negate for KVector {
    fn negate(self) -> Self {
        self.neg()
    }
}

impl Negate for KForm {
    fn negate(self) -> Self {
        self.neg()
    }
}

/// Sampling envelope: chart dimension, grade and coefficient degree bounds.
#[derive(Clone, Copy, Debug)]
pub struct Envelope {
    pub max_dim: usize,
    pub max_grade: usize,
    pub max_degree: u32,
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope { max_dim: 4, max_grade: 3, max_degree: 2 }
    }
}

impl Envelope {
    fn draw(&self, s: &mut Sampler, dim: usize) -> KVector {
        let g = s.range(0, self.max_grade.min(dim));
        s.kvector(dim, g, self.max_degree)
    }

    fn dim(&self, s: &mut Sampler) -> usize {
        s.range(1, self.max_dim)
    }
}

/// Equal, treating zeros of different nominal grade as equal.
pub fn same<K: crate::exterior::Kind>(a: &crate::exterior::Graded<K>, b: &crate::exterior::Graded<K>) -> bool {
    (a.is_zero() && b.is_zero()) || a == b
}

/// `[U,V] = (−1)^{|U||V|} [V,U]`.
pub fn antisymmetry(s: &mut Sampler, env: Envelope, cases: usize) -> Result<Tally> {
    let mut t = Tally::new("schouten antisymmetry");
    for _ in 0..cases {
        let dim = env.dim(s);
        let (u, v) = (env.draw(s, dim), env.draw(s, dim));
        let lhs = schouten(&u, &v)?;
        let rhs = sign(u.grade() * v.grade() % 2 == 1, schouten(&v, &u)?);
        t.record(same(&lhs, &rhs), || format!("grades ({}, {}) in dim {}", u.grade(), v.grade(), dim));
    }
    Ok(t)
}

/// `[U, V∧W] = [U,V]∧W + (−1)^{(|U|+1)|V|} V∧[U,W]`.
pub fn leibniz(s: &mut Sampler, env: Envelope, cases: usize) -> Result<Tally> {
    let mut t = Tally::new("schouten leibniz");
    for _ in 0..cases {
        let dim = env.dim(s);
        let (u, v, w) = (env.draw(s, dim), env.draw(s, dim), env.draw(s, dim));
        let lhs = schouten(&u, &v.wedge(&w)?)?;
        let a = schouten(&u, &v)?.wedge(&w)?;
        let b = sign((u.grade() + 1) * v.grade() % 2 == 1, v.wedge(&schouten(&u, &w)?)?);
        let ok = same(&lhs, &a.add(&b)?);
        t.record(ok, || format!("grades ({}, {}, {}) in dim {}", u.grade(), v.grade(), w.grade(), dim));
    }
    Ok(t)
}

/// The graded Jacobi identity with the cyclic sign pattern
/// `(−1)^{|U|(|W|−1)}[U,[V,W]] + (−1)^{|V|(|U|−1)}[V,[W,U]] + (−1)^{|W|(|V|−1)}[W,[U,V]] = 0`.
pub fn jacobi(s: &mut Sampler, env: Envelope, cases: usize) -> Result<Tally> {
    let mut t = Tally::new("schouten jacobi");
    for _ in 0..cases {
        let dim = env.dim(s);
        let (u, v, w) = (env.draw(s, dim), env.draw(s, dim), env.draw(s, dim));
        let (p, q, r) = (u.grade(), v.grade(), w.grade());
        // parity of a(b − 1), which is that of a(b + 1) and safe at b = 0
        let e = |a: usize, b: usize| a * (b + 1) % 2 == 1;
        let t1 = sign(e(p, r), schouten(&u, &schouten(&v, &w)?)?);
        let t2 = sign(e(q, p), schouten(&v, &schouten(&w, &u)?)?);
        let t3 = sign(e(r, q), schouten(&w, &schouten(&u, &v)?)?);
        let sum = sum_ignoring_grade(&[t1, t2, t3]);
        t.record(sum, || format!("grades ({}, {}, {}) in dim {}", p, q, r, dim));
    }
    Ok(t)
}

/// True when the terms cancel. Zero terms may carry a nominal grade that
/// differs from the others (brackets with functions), so they are skipped.
fn sum_ignoring_grade(terms: &[KVector]) -> bool {
    let mut acc: Option<KVector> = None;
    for term in terms.iter().filter(|t| !t.is_zero()) {
        acc = Some(match acc {
            None => term.clone(),
            Some(a) => match a.add(term) {
                Ok(s) => s,
                Err(_) => return false,
            },
        });
    }
    acc.is_none_or(|a| a.is_zero())
}

/// `(−1)^{(|X|−1)|Y|} L_X∘i_Y − i_Y∘L_X = i_{[X,Y]}` on forms.
pub fn lie_schouten(s: &mut Sampler, env: Envelope, cases: usize) -> Result<Tally> {
    let mut t = Tally::new("lie derivative vs schouten");
    // draws with no admissible form degree are redrawn, so `cases` are all checked
    while t.cases < cases {
        let dim = env.dim(s);
        let (x, y) = (env.draw(s, dim), env.draw(s, dim));
        let (p, q) = (x.grade(), y.grade());
        let lo = q.max((p + q).saturating_sub(1));
        if lo > dim {
            continue;
        }
        let k = s.range(lo, dim);
        let w = s.kform(dim, k, env.max_degree);
        let lhs = lie_schouten_lhs(&x, &y, &w)?;
        let rhs = contract(&schouten(&x, &y)?, &w)?;
        t.record(same(&lhs, &rhs), || format!("grades X={}, Y={}, form {} in dim {}", p, q, k, dim));
    }
    Ok(t)
}

/// Left side of the Lie–Schouten identity under the pinned grading.
pub fn lie_schouten_lhs(x: &KVector, y: &KVector, w: &KForm) -> Result<KForm> {
    let (p, q) = (x.grade(), y.grade());
    let a = lie_derivative(x, &contract(y, w)?)?;
    let b = contract(y, &lie_derivative(x, w)?)?;
    // exponent (p − 1)q, read mod 2 (p = 0 gives (−1)^{−q} = (−1)^q)
    let odd = (p + 1) * q % 2 == 1;
    let a = sign(odd, a);
    if a.is_zero() {
        return Ok(b.neg());
    }
    if b.is_zero() {
        return Ok(a);
    }
    a.sub(&b)
}

/// `d∘d = 0`.
pub fn d_squared(s: &mut Sampler, env: Envelope, cases: usize) -> Tally {
    let mut t = Tally::new("d squared");
    for _ in 0..cases {
        let dim = env.dim(s);
        let k = s.range(0, dim);
        let w = s.kform(dim, k, env.max_degree + 1);
        t.record(w.d().d().is_zero(), || format!("grade {} in dim {}", k, dim));
    }
    t
}

/// `L_X∘d = d∘L_X` for vector fields.
pub fn lie_commutes_with_d(s: &mut Sampler, env: Envelope, cases: usize) -> Result<Tally> {
    let mut t = Tally::new("lie derivative commutes with d");
    for _ in 0..cases {
        let dim = env.dim(s);
        let x = s.kvector(dim, 1, env.max_degree);
        let k = s.range(0, dim);
        let w = s.kform(dim, k, env.max_degree);
        let lhs = lie_derivative(&x, &w.d())?;
        let rhs = lie_derivative(&x, &w)?.d();
        t.record(same(&lhs, &rhs), || format!("grade {} in dim {}", k, dim));
    }
    Ok(t)
}

/// The monomial formula against the bracket rebuilt from antisymmetry,
/// the Leibniz rule and the Lie bracket of vector fields alone.
pub fn monomial_vs_leibniz(s: &mut Sampler, env: Envelope, cases: usize) -> Result<Tally> {
    let mut t = Tally::new("monomial formula vs leibniz extension");
    for _ in 0..cases {
        let dim = env.dim(s);
        let (u, v) = (env.draw(s, dim), env.draw(s, dim));
        let lhs = schouten(&u, &v)?;
        let rhs = schouten_by_leibniz(&u, &v)?;
        t.record(same(&lhs, &rhs), || format!("grades ({}, {}) in dim {}", u.grade(), v.grade(), dim));
    }
    Ok(t)
}

/// Split `c ∂_{j1}∧…∧∂_{jm}` as `(c ∂_{j1}) ∧ (∂_{j2}∧…)`.
fn split(dim: usize, b: Blade, c: &Expr) -> (KVector, KVector) {
    let idx = b.indices();
    let head = KVector::basis(dim, &idx[..1], c.clone()).expect("in range");
    let tail = KVector::basis(dim, &idx[1..], Expr::one()).expect("in range");
    (head, tail)
}

fn terms_of(u: &KVector) -> alloc::vec::Vec<(Blade, Expr)> {
    u.terms().into_iter().map(|(b, c)| (b, c.clone())).collect()
}

/// Independent reconstruction of `[U, V]`.
pub fn schouten_by_leibniz(u: &KVector, v: &KVector) -> Result<KVector> {
    let dim = u.dim();
    let (p, q) = (u.grade(), v.grade());
    let mut out = KVector::zero(dim, (p + q).saturating_sub(1));
    if p == 0 && q == 0 {
        return Ok(out);
    }
    if p == 0 {
        // [f, V] = (−1)^{0}[V, f]
        return schouten_by_leibniz(v, u);
    }
    if q == 0 {
        let f = v.as_scalar().expect("grade zero");
        // [A∧B, f] = [f, A∧B] = [f,A]∧B − A∧[f,B] with [f, A] = A(f)
        for (b, c) in terms_of(u) {
            let (a, rest) = split(dim, b, &c);
            let af = KVector::scalar(dim, a.apply(&f)?);
            let first = af.wedge(&rest)?;
            let second = a.wedge(&schouten_by_leibniz(&rest, v)?)?.neg();
            out = accumulate(out, first)?;
            out = accumulate(out, second)?;
        }
        return Ok(out);
    }
    if q == 1 && p == 1 {
        return Ok(KVector::vector(&lie(&u.components(), &v.components())));
    }
    if q == 1 {
        // [U, Y] = (−1)^{|U|}[Y, U], then Leibniz in the second slot
        let mut acc = KVector::zero(dim, p);
        for (b, c) in terms_of(u) {
            let (a, rest) = split(dim, b, &c);
            let first = schouten_by_leibniz(v, &a)?.wedge(&rest)?;
            let second = a.wedge(&schouten_by_leibniz(v, &rest)?)?;
            acc = accumulate(acc, first)?;
            acc = accumulate(acc, second)?;
        }
        return Ok(sign(p % 2 == 1, acc));
    }
    for (b, c) in terms_of(v) {
        let (a, rest) = split(dim, b, &c);
        let first = schouten_by_leibniz(u, &a)?.wedge(&rest)?;
        let second = sign((p + 1) % 2 == 1, a.wedge(&schouten_by_leibniz(u, &rest)?)?);
        out = accumulate(out, first)?;
        out = accumulate(out, second)?;
    }
    Ok(out)
}

fn accumulate(acc: KVector, term: KVector) -> Result<KVector> {
    if term.is_zero() {
        return Ok(acc);
    }
    if acc.is_zero() {
        return Ok(term);
    }
    acc.add(&term)
}

fn lie(a: &[Expr], b: &[Expr]) -> alloc::vec::Vec<Expr> {
    (0..a.len())
        .map(|k| {
            let mut acc = Expr::zero();
            for i in 0..a.len() {
                acc = acc.add(&a[i].mul(&b[k].diff(i))).sub(&b[i].mul(&a[k].diff(i)));
            }
            acc
        })
        .collect()
}
