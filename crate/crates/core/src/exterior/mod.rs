//! Multivector fields and differential forms on a coordinate chart.
//!
//! Both are stored as maps from basis blades to [`Expr`] coefficients. A blade
//! is a bitmask of coordinate indices, so the chart dimension is capped at 32.
//!
//! Contraction of a decomposable multivector applies its factors left to
//! right: `i(∂a∧∂b) = i(∂b) ∘ i(∂a)`. With that order
//! `contract(∂x∧∂y, dx∧dy) = 1`, so `contract(P, α∧β) = P(α, β)`.

mod text;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::marker::PhantomData;

use crate::error::{Error, Result};
use crate::symexpr::{Expr, Rational};

pub use self::text::GradedDisplay;

/// Chart dimension limit imposed by the blade representation.
pub const MAX_DIM: usize = 32;

/// A set of coordinate indices, read in increasing order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Blade(pub u32);

impl Blade {
    pub const EMPTY: Blade = Blade(0);

    pub fn from_indices(idx: &[usize]) -> Option<(Blade, bool)> {
        // returns the blade and whether sorting `idx` took an odd permutation
        let mut mask = 0u32;
        let mut odd = false;
        for &i in idx {
            let bit = 1u32 << i;
            if mask & bit != 0 {
                return None;
            }
            odd ^= (mask & !(bit | (bit - 1))).count_ones() % 2 == 1;
            mask |= bit;
        }
        Some((Blade(mask), odd))
    }

    pub fn single(i: usize) -> Blade {
        Blade(1 << i)
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn indices(self) -> Vec<usize> {
        (0..MAX_DIM).filter(|&i| self.contains(i)).collect()
    }

    /// Number of elements strictly below `i`.
    fn below(self, i: usize) -> u32 {
        (self.0 & ((1u32 << i) - 1)).count_ones()
    }

    /// Sign of `self ∧ other` relative to the sorted union, or `None` when
    /// they overlap.
    pub fn wedge(self, other: Blade) -> Option<(Blade, bool)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut swaps = 0;
        for j in other.indices() {
            swaps += (self.0 >> j).count_ones();
        }
        Some((Blade(self.0 | other.0), swaps % 2 == 1))
    }

    /// Iterated interior product of the vector blade `self` into the form
    /// blade `form`, lowest index first.
    pub fn contract_into(self, form: Blade) -> Option<(Blade, bool)> {
        if self.0 & !form.0 != 0 {
            return None;
        }
        let mut rest = form;
        let mut odd = false;
        for j in self.indices() {
            odd ^= rest.below(j) % 2 == 1;
            rest = Blade(rest.0 & !(1 << j));
        }
        Some((rest, odd))
    }

    fn lex_key(self) -> Vec<usize> {
        self.indices()
    }
}

mod sealed {
    pub trait Sealed {}
}

/// Marker distinguishing multivectors from forms.
pub trait Kind: sealed::Sealed + Clone + fmt::Debug + PartialEq + Eq {
    const FORM: bool;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contra;
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Co;

impl sealed::Sealed for Contra {}
impl sealed::Sealed for Co {}
impl Kind for Contra {
    const FORM: bool = false;
}
impl Kind for Co {
    const FORM: bool = true;
}

/// A homogeneous antisymmetric tensor field of fixed grade.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graded<K: Kind> {
    dim: usize,
    grade: usize,
    terms: BTreeMap<u32, Expr>,
    kind: PhantomData<K>,
}

/// Multivector field.
pub type KVector = Graded<Contra>;
/// Differential form.
pub type KForm = Graded<Co>;

impl<K: Kind> Graded<K> {
    pub fn zero(dim: usize, grade: usize) -> Self {
        assert!(dim <= MAX_DIM, "chart dimension above {}", MAX_DIM);
        Graded { dim, grade, terms: BTreeMap::new(), kind: PhantomData }
    }

    pub fn scalar(dim: usize, f: Expr) -> Self {
        Self::zero(dim, 0).with_term(Blade::EMPTY, f)
    }

    /// `f` times the basis element on `idx` (any order; sign adjusted).
    pub fn basis(dim: usize, idx: &[usize], f: Expr) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
            return Err(Error::GradeExceedsDimension { grade: bad + 1, dim });
        }
        let mut out = Self::zero(dim, idx.len());
        if let Some((b, odd)) = Blade::from_indices(idx) {
            out = out.with_term(b, if odd { f.neg() } else { f });
        }
        Ok(out)
    }

    /// Build from `(blade, coefficient)` pairs; all blades must have `grade` elements.
    pub fn from_terms<I: IntoIterator<Item = (Blade, Expr)>>(dim: usize, grade: usize, it: I) -> Self {
        let mut out = Self::zero(dim, grade);
        for (b, c) in it {
            debug_assert_eq!(b.grade(), grade);
            out.add_term(b, c);
        }
        out
    }

    fn with_term(mut self, b: Blade, c: Expr) -> Self {
        self.add_term(b, c);
        self
    }

    fn add_term(&mut self, b: Blade, c: Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b.0) {
            Some(e) => {
                *e = e.add(&c);
                if e.is_zero() {
                    self.terms.remove(&b.0);
                }
            }
            None => {
                self.terms.insert(b.0, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic order of their index lists.
    pub fn terms(&self) -> Vec<(Blade, &Expr)> {
        let mut v: Vec<(Blade, &Expr)> = self.terms.iter().map(|(&b, c)| (Blade(b), c)).collect();
        v.sort_by_key(|(b, _)| b.lex_key());
        v
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, b: Blade) -> Expr {
        self.terms.get(&b.0).cloned().unwrap_or_default()
    }

    /// Coefficient on the sorted blade of `idx` (sign-adjusted for order).
    pub fn coeff_at(&self, idx: &[usize]) -> Expr {
        match Blade::from_indices(idx) {
            Some((b, odd)) => {
                let c = self.coeff(b);
                if odd {
                    c.neg()
                } else {
                    c
                }
            }
            None => Expr::zero(),
        }
    }

    /// The scalar value of a grade-0 element.
    pub fn as_scalar(&self) -> Option<Expr> {
        (self.grade == 0).then(|| self.coeff(Blade::EMPTY))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.grade != other.grade && !self.is_zero() && !other.is_zero() {
            return Err(Error::MixedGrades(self.grade, other.grade));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        let mut out = self.clone();
        for (&b, c) in &other.terms {
            out.add_term(Blade(b), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, f: &Expr) -> Self {
        if f.is_zero() {
            return Self::zero(self.dim, self.grade);
        }
        self.map(|c| c.mul(f))
    }

    pub fn scale_q(&self, q: &Rational) -> Self {
        self.map(|c| c.scale(q))
    }

    /// Apply `f` to every coefficient, dropping zeros.
    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> Self {
        let mut out = Self::zero(self.dim, self.grade);
        for (&b, c) in &self.terms {
            out.add_term(Blade(b), f(c));
        }
        out
    }

    pub fn try_map(&self, mut f: impl FnMut(&Expr) -> Result<Expr>) -> Result<Self> {
        let mut out = Self::zero(self.dim, self.grade);
        for (&b, c) in &self.terms {
            out.add_term(Blade(b), f(c)?);
        }
        Ok(out)
    }

    /// Coefficients evaluated at an exact point (constant field).
    pub fn at(&self, point: &[Rational]) -> Result<Self> {
        self.try_map(|c| c.eval(point).map(Expr::constant))
    }

    pub fn derivative(&self, i: usize) -> Self {
        self.map(|c| c.diff(i))
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let grade = self.grade + other.grade;
        let mut out = Self::zero(self.dim, grade);
        if grade > self.dim {
            return Ok(out);
        }
        for (&a, ca) in &self.terms {
            for (&b, cb) in &other.terms {
                if let Some((blade, odd)) = Blade(a).wedge(Blade(b)) {
                    let c = ca.mul(cb);
                    out.add_term(blade, if odd { c.neg() } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Largest variable slot used by any coefficient.
    pub fn width(&self) -> usize {
        self.terms.values().map(Expr::width).max().unwrap_or(0)
    }
}

impl KVector {
    /// A vector field from its components.
    pub fn vector(components: &[Expr]) -> Self {
        let dim = components.len();
        Self::from_terms(dim, 1, components.iter().enumerate().map(|(i, c)| (Blade::single(i), c.clone())))
    }

    /// Components of a grade-1 field.
    pub fn components(&self) -> Vec<Expr> {
        (0..self.dim).map(|i| self.coeff(Blade::single(i))).collect()
    }

    /// Directional derivative `X(f)` for a vector field `X`.
    pub fn apply(&self, f: &Expr) -> Result<Expr> {
        if self.grade != 1 && !self.is_zero() {
            return Err(Error::GradeMismatch { expected: 1, got: self.grade });
        }
        let mut acc = Expr::zero();
        for (&b, c) in &self.terms {
            let i = b.trailing_zeros() as usize;
            acc = acc.add(&c.mul(&f.diff(i)));
        }
        Ok(acc)
    }
}

impl KForm {
    /// Exterior derivative.
    pub fn d(&self) -> KForm {
        let mut out = KForm::zero(self.dim, self.grade + 1);
        if self.grade >= self.dim {
            return out;
        }
        for (&b, c) in &self.terms {
            let blade = Blade(b);
            for v in 0..self.dim {
                if blade.contains(v) {
                    continue;
                }
                let dc = c.diff(v);
                if dc.is_zero() {
                    continue;
                }
                let sign_odd = blade.below(v) % 2 == 1;
                out.add_term(Blade(b | (1 << v)), if sign_odd { dc.neg() } else { dc });
            }
        }
        out
    }

    /// `df` for a function `f`.
    pub fn differential(dim: usize, f: &Expr) -> KForm {
        KForm::scalar(dim, f.clone()).d()
    }
}

pub fn wedge<K: Kind>(a: &Graded<K>, b: &Graded<K>) -> Result<Graded<K>> {
    a.wedge(b)
}

pub fn exterior_derivative(w: &KForm) -> KForm {
    w.d()
}

/// Interior product of a multivector into a form.
pub fn contract(u: &KVector, w: &KForm) -> Result<KForm> {
    if u.dim != w.dim {
        return Err(Error::DimensionMismatch { left: u.dim, right: w.dim });
    }
    if u.grade > w.grade {
        return Err(Error::ContractionGrade { vector: u.grade, form: w.grade });
    }
    Ok(contract_or_zero(u, w))
}

/// Like [`contract`], but an oversized multivector gives the zero form.
pub(crate) fn contract_or_zero(u: &KVector, w: &KForm) -> KForm {
    let grade = w.grade.saturating_sub(u.grade);
    let mut out = KForm::zero(w.dim, grade);
    if u.grade > w.grade {
        return out;
    }
    for (&ub, uc) in &u.terms {
        for (&wb, wc) in &w.terms {
            if let Some((rest, odd)) = Blade(ub).contract_into(Blade(wb)) {
                let c = uc.mul(wc);
                out.add_term(rest, if odd { c.neg() } else { c });
            }
        }
    }
    out
}

/// `L_X = i_X ∘ d − (−1)^{|X|} d ∘ i_X`.
pub fn lie_derivative(x: &KVector, w: &KForm) -> Result<KForm> {
    if x.dim != w.dim {
        return Err(Error::DimensionMismatch { left: x.dim, right: w.dim });
    }
    let grade = (w.grade + 1).saturating_sub(x.grade);
    let first = contract_or_zero(x, &w.d());
    let second = contract_or_zero(x, w).d();
    let mut out = if x.grade > w.grade + 1 { KForm::zero(w.dim, grade) } else { first };
    if x.grade <= w.grade {
        out = if x.grade % 2 == 0 { out.sub(&second)? } else { out.add(&second)? };
    }
    Ok(KForm { grade, ..out })
}

/// Lie bracket of two vector fields given by components.
fn vf_bracket(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
    let n = a.len();
    (0..n)
        .map(|k| {
            let mut acc = Expr::zero();
            for i in 0..n {
                if !a[i].is_zero() {
                    acc = acc.add(&a[i].mul(&b[k].diff(i)));
                }
                if !b[i].is_zero() {
                    acc = acc.sub(&b[i].mul(&a[k].diff(i)));
                }
            }
            acc
        })
        .collect()
}

/// Factor `c ∂_{j1} ∧ … ∧ ∂_{jm}` as a list of vector fields, the coefficient
/// on the first one.
fn factors(dim: usize, blade: Blade, c: &Expr) -> Vec<Vec<Expr>> {
    blade
        .indices()
        .into_iter()
        .enumerate()
        .map(|(pos, j)| {
            let mut v = alloc::vec![Expr::zero(); dim];
            v[j] = if pos == 0 { c.clone() } else { Expr::one() };
            v
        })
        .collect()
}

fn wedge_all(dim: usize, fields: &[&[Expr]]) -> KVector {
    let mut acc = KVector::scalar(dim, Expr::one());
    for f in fields {
        acc = acc.wedge(&KVector::vector(f)).expect("same dimension");
        if acc.is_zero() {
            return KVector::zero(dim, fields.len());
        }
    }
    acc
}

/// `[X1∧…∧Xm, f] = Σ_i (−1)^{i+1} X_i(f) X1∧…X̂i…∧Xm`.
fn schouten_function(u: &KVector, f: &Expr) -> KVector {
    let dim = u.dim;
    let mut out = KVector::zero(dim, u.grade.saturating_sub(1));
    if u.grade == 0 {
        return out;
    }
    for (&b, c) in &u.terms {
        let fs = factors(dim, Blade(b), c);
        for i in 0..fs.len() {
            let xf = KVector::vector(&fs[i]).apply(f).expect("grade one");
            if xf.is_zero() {
                continue;
            }
            let rest: Vec<&[Expr]> = fs.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| v.as_slice()).collect();
            let mut term = wedge_all(dim, &rest).scale(&xf);
            if i % 2 == 1 {
                term = term.neg();
            }
            out = out.add(&term).expect("same shape");
        }
    }
    out
}

/// Schouten–Nijenhuis bracket, computed term by term with
/// `[X1∧…∧Xm, Y1∧…∧Yn] = (−1)^{m+1} Σ (−1)^{i+j} [Xi,Yj] ∧ X^î ∧ Y^ĵ`.
///
/// It satisfies `[U,V] = (−1)^{|U||V|} [V,U]`; on a function it is
/// `[U, f] = [f, U] = Σ_i (−1)^{i+1} X_i(f) X^î`, and `[f, g] = 0`.
pub fn schouten(u: &KVector, v: &KVector) -> Result<KVector> {
    if u.dim != v.dim {
        return Err(Error::DimensionMismatch { left: u.dim, right: v.dim });
    }
    let dim = u.dim;
    let (m, n) = (u.grade, v.grade);
    if m == 0 && n == 0 {
        return Ok(KVector::zero(dim, 0));
    }
    if n == 0 {
        return Ok(schouten_function(u, &v.coeff(Blade::EMPTY)));
    }
    if m == 0 {
        return Ok(schouten_function(v, &u.coeff(Blade::EMPTY)));
    }
    let mut out = KVector::zero(dim, m + n - 1);
    for (&ub, uc) in &u.terms {
        let xs = factors(dim, Blade(ub), uc);
        for (&vb, vc) in &v.terms {
            let ys = factors(dim, Blade(vb), vc);
            for (i, xi) in xs.iter().enumerate() {
                for (j, yj) in ys.iter().enumerate() {
                    // coordinate fields commute
                    if i > 0 && j > 0 {
                        continue;
                    }
                    let br = vf_bracket(xi, yj);
                    if br.iter().all(Expr::is_zero) {
                        continue;
                    }
                    let mut parts: Vec<&[Expr]> = Vec::with_capacity(m + n - 1);
                    parts.push(&br);
                    parts.extend(xs.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, f)| f.as_slice()));
                    parts.extend(ys.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, f)| f.as_slice()));
                    let mut term = wedge_all(dim, &parts);
                    // (−1)^{m+1} (−1)^{i+j} with 1-based i, j
                    if (m + 1 + i + j) % 2 == 1 {
                        term = term.neg();
                    }
                    out = out.add(&term)?;
                }
            }
        }
    }
    Ok(out)
}

/// A nonzero top-degree form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VolumeForm(KForm);

impl VolumeForm {
    pub fn new(form: KForm) -> Result<Self> {
        if form.grade != form.dim || form.is_zero() {
            return Err(Error::InvalidVolumeForm);
        }
        Ok(VolumeForm(form))
    }

    /// `f dx_1 ∧ … ∧ dx_n`.
    pub fn from_density(dim: usize, f: Expr) -> Result<Self> {
        let idx: Vec<usize> = (0..dim).collect();
        Self::new(KForm::basis(dim, &idx, f)?)
    }

    pub fn standard(dim: usize) -> Self {
        Self::from_density(dim, Expr::one()).expect("nonzero")
    }

    pub fn density(&self) -> Expr {
        self.0.coeff(Blade((1u64.wrapping_shl(self.0.dim as u32) - 1) as u32))
    }

    pub fn form(&self) -> &KForm {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }
}

#[cfg(test)]
mod tests;
