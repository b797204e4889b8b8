//! Distributions supported on leaves, in the function and top-form
//! realizations, and the Poisson-module action on them.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exterior::{contract, lie_derivative, Blade, KForm, KVector, VolumeForm};
use crate::leaf::{bott_derivative_multi_nodes, bott_derivative_multi_point, Leaf, ParamLeaf, RANK_TOL};
use crate::linalg;
use crate::poisson::PoissonStructure;
use crate::quadrature::pairwise_sum;
use crate::symexpr::{Expr, Monomial, Point, Poly, Rational, Vars};

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Which kind of test object a distribution acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Realization {
    Function,
    TopForm,
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Realization::Function => "function",
            Realization::TopForm => "top-form",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TestObject {
    Function(Expr),
    TopForm(KForm),
}

impl TestObject {
    pub fn realization(&self) -> Realization {
        match self {
            TestObject::Function(_) => Realization::Function,
            TestObject::TopForm(_) => Realization::TopForm,
        }
    }

    fn times(&self, f: &Expr) -> TestObject {
        match self {
            TestObject::Function(g) => TestObject::Function(f.mul(g)),
            TestObject::TopForm(a) => TestObject::TopForm(a.scale(f)),
        }
    }

    /// `X(g)` on functions, `L_X α` on top forms.
    fn derived(&self, x: &KVector) -> Result<TestObject> {
        Ok(match self {
            TestObject::Function(g) => TestObject::Function(x.apply(g)?),
            TestObject::TopForm(a) => TestObject::TopForm(lie_derivative(x, a)?),
        })
    }
}

/// A primitive distribution. `Multiplied` and `Derived` defer the module
/// action to pairing time when no closed form is available.
#[derive(Clone, Debug)]
pub enum Primitive {
    Dirac(Point),
    /// `⟨δ'_v, f⟩ = −df(x0)·v`.
    DiracDerivative(Point, Vec<Rational>),
    LeafDelta(Arc<ParamLeaf>),
    TransversalDelta(Arc<Leaf>, KVector),
    Multiplied(Expr, Box<Distribution>),
    Derived(KVector, Box<Distribution>),
}

impl PartialEq for Primitive {
    fn eq(&self, other: &Self) -> bool {
        use Primitive::*;
        match (self, other) {
            (Dirac(a), Dirac(b)) => a == b,
            (DiracDerivative(a, v), DiracDerivative(b, w)) => a == b && v == w,
            (LeafDelta(a), LeafDelta(b)) => Arc::ptr_eq(a, b),
            (TransversalDelta(a, u), TransversalDelta(b, w)) => Arc::ptr_eq(a, b) && u == w,
            (Multiplied(f, a), Multiplied(g, b)) => f == g && a == b,
            (Derived(x, a), Derived(y, b)) => x == y && a == b,
            _ => false,
        }
    }
}

impl Primitive {
    pub fn realization(&self) -> Result<Realization> {
        match self {
            Primitive::Dirac(_) | Primitive::DiracDerivative(..) | Primitive::LeafDelta(_) => Ok(Realization::Function),
            Primitive::TransversalDelta(..) => Ok(Realization::TopForm),
            Primitive::Multiplied(_, d) | Primitive::Derived(_, d) => {
                d.realization()?.ok_or_else(|| Error::RealizationMismatch("empty wrapped distribution".into()))
            }
        }
    }

    /// Pairs exactly with polynomial or rational test objects.
    pub fn is_exact(&self) -> bool {
        match self {
            Primitive::Dirac(_) | Primitive::DiracDerivative(..) => true,
            Primitive::LeafDelta(_) => false,
            Primitive::TransversalDelta(l, _) => matches!(**l, Leaf::Point(_)),
            Primitive::Multiplied(_, d) | Primitive::Derived(_, d) => d.is_exact(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Primitive::Dirac(p) | Primitive::DiracDerivative(p, _) => p.dim(),
            Primitive::LeafDelta(l) => l.dim(),
            Primitive::TransversalDelta(_, u) => u.dim(),
            Primitive::Multiplied(_, d) | Primitive::Derived(_, d) => d.dim,
        }
    }
}

/// A value of a pairing: exact when every primitive involved pairs exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Pairing {
    Exact(Rational),
    Float(f64),
}

impl Pairing {
    pub fn to_f64(&self) -> f64 {
        match self {
            Pairing::Exact(r) => to_f64(r),
            Pairing::Float(x) => *x,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Pairing::Exact(r) if r.is_zero())
    }

    fn scale(self, w: &Rational) -> Pairing {
        match self {
            Pairing::Exact(a) => Pairing::Exact(a * w),
            Pairing::Float(x) => Pairing::Float(x * to_f64(w)),
        }
    }

    fn abs(self) -> Pairing {
        match self {
            Pairing::Exact(a) => Pairing::Exact(a.abs()),
            Pairing::Float(x) => Pairing::Float(x.abs()),
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pairing::Exact(r) => write!(f, "{}", r),
            Pairing::Float(x) => write!(f, "{:e}", x),
        }
    }
}

/// A finite sum of primitives with exact rational weights. Equal primitives
/// are merged and zero terms dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    dim: usize,
    terms: Vec<(Rational, Primitive)>,
}

impl Distribution {
    pub fn zero(dim: usize) -> Self {
        Distribution { dim, terms: Vec::new() }
    }

    pub fn from_primitive(p: Primitive) -> Self {
        let mut d = Distribution::zero(p.dim());
        d.push(q(1), p);
        d
    }

    pub fn dirac(x0: Point) -> Self {
        Self::from_primitive(Primitive::Dirac(x0))
    }

    pub fn dirac_derivative(x0: Point, v: Vec<Rational>) -> Result<Self> {
        if v.len() != x0.dim() {
            return Err(Error::PointDimension { got: v.len(), needed: x0.dim() });
        }
        Ok(Self::from_primitive(Primitive::DiracDerivative(x0, v)))
    }

    pub fn leaf_delta(leaf: Arc<ParamLeaf>) -> Self {
        Self::from_primitive(Primitive::LeafDelta(leaf))
    }

    /// `δ^u`; the grade of `u` must be the codimension of the leaf.
    pub fn transversal_delta(leaf: Arc<Leaf>, u: KVector) -> Result<Self> {
        let (dim, leaf_dim) = match &*leaf {
            Leaf::Point(p) => (p.point().dim(), 0),
            Leaf::Parameterized(l) => (l.dim(), l.leaf_dim()),
        };
        if u.dim() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: u.dim() });
        }
        if u.grade() != dim - leaf_dim {
            return Err(Error::GradeMismatch { expected: dim - leaf_dim, got: u.grade() });
        }
        Ok(Self::from_primitive(Primitive::TransversalDelta(leaf, u)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Rational, Primitive)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.is_exact())
    }

    /// `None` for the zero distribution, which pairs with anything.
    pub fn realization(&self) -> Result<Option<Realization>> {
        let mut out = None;
        for (_, p) in &self.terms {
            let r = p.realization()?;
            match out {
                Some(o) if o != r => {
                    return Err(Error::RealizationMismatch(format!("sum mixes {} and {} primitives", o, r)))
                }
                _ => out = Some(r),
            }
        }
        Ok(out)
    }

    fn push(&mut self, w: Rational, p: Primitive) {
        if w.is_zero() {
            return;
        }
        if let Primitive::DiracDerivative(_, v) = &p {
            if v.iter().all(Zero::is_zero) {
                return;
            }
        }
        if let Primitive::Multiplied(f, _) = &p {
            if f.is_zero() {
                return;
            }
        }
        if let Primitive::Multiplied(_, d) | Primitive::Derived(_, d) = &p {
            if d.is_zero() {
                return;
            }
        }
        if let Primitive::Derived(x, _) = &p {
            if x.is_zero() {
                return;
            }
        }
        if let Some(i) = self.terms.iter().position(|(_, t)| *t == p) {
            self.terms[i].0 += w;
            if self.terms[i].0.is_zero() {
                self.terms.remove(i);
            }
        } else {
            self.terms.push((w, p));
        }
    }

    pub fn add(&self, other: &Distribution) -> Result<Distribution> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let mut out = self.clone();
        for (w, p) in &other.terms {
            out.push(w.clone(), p.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Rational) -> Distribution {
        let mut out = Distribution::zero(self.dim);
        for (w, p) in &self.terms {
            out.push(w.clone() * k, p.clone());
        }
        out
    }

    pub fn neg(&self) -> Distribution {
        self.scale(&q(-1))
    }

    pub fn sub(&self, other: &Distribution) -> Result<Distribution> {
        self.add(&other.neg())
    }

    /// `⟨f·Φ, g⟩ = ⟨Φ, f·g⟩`.
    pub fn multiply(&self, f: &Expr) -> Result<Distribution> {
        let mut out = Distribution::zero(self.dim);
        for (w, p) in &self.terms {
            match p {
                Primitive::Dirac(x0) => out.push(w.clone() * f.eval(x0.coords())?, p.clone()),
                Primitive::DiracDerivative(x0, v) => {
                    // f·δ'_v = f(x0)·δ'_v − (df(x0)·v)·δ
                    let fx = f.eval(x0.coords())?;
                    let dfv = directional(f, x0, v)?;
                    out.push(w.clone() * fx, p.clone());
                    out.push(-(w.clone() * dfv), Primitive::Dirac(x0.clone()));
                }
                _ => out.push(w.clone(), Primitive::Multiplied(f.clone(), Box::new(Distribution::from_primitive(p.clone())))),
            }
        }
        Ok(out)
    }

    /// `⟨X(Φ), f⟩ = −⟨Φ, X(f)⟩`, or `−⟨Φ, L_X α⟩` on top forms.
    pub fn derive(&self, x: &KVector) -> Result<Distribution> {
        if x.grade() != 1 {
            return Err(Error::GradeMismatch { expected: 1, got: x.grade() });
        }
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: x.dim() });
        }
        let mut out = Distribution::zero(self.dim);
        for (w, p) in &self.terms {
            match p {
                Primitive::Dirac(x0) => {
                    // −⟨δ, X(f)⟩ = −df(x0)·X(x0) = ⟨δ'_{X(x0)}, f⟩
                    let at = x.components().iter().map(|c| c.eval(x0.coords())).collect::<Result<Vec<_>>>()?;
                    out.push(w.clone(), Primitive::DiracDerivative(x0.clone(), at));
                }
                Primitive::DiracDerivative(x0, v) if vanishes_at(x, x0)? => {
                    // d(X(f))(x0)·v = (∂_v X)(x0)·df(x0) once X(x0) = 0
                    let dv = x
                        .components()
                        .iter()
                        .map(|c| directional(c, x0, v))
                        .collect::<Result<Vec<_>>>()?;
                    out.push(-w.clone(), Primitive::DiracDerivative(x0.clone(), dv));
                }
                _ => out.push(w.clone(), Primitive::Derived(x.clone(), Box::new(Distribution::from_primitive(p.clone())))),
            }
        }
        Ok(out)
    }

    /// `{f, Φ}`: the derivation `g ↦ {f, g}` acting on `Φ`, so that
    /// `⟨{f, Φ}, g⟩ = −⟨Φ, {f, g}⟩`.
    pub fn bracket(&self, ps: &PoissonStructure, f: &Expr) -> Result<Distribution> {
        self.derive(&bracket_field(ps, f))
    }

    /// The same distribution with every parameterized leaf refined by one
    /// node per axis.
    pub fn refined(&self, ps: &PoissonStructure) -> Result<Distribution> {
        let mut out = Distribution::zero(self.dim);
        for (w, p) in &self.terms {
            let r = match p {
                Primitive::LeafDelta(l) => Primitive::LeafDelta(Arc::new(l.refined(ps)?)),
                Primitive::TransversalDelta(l, u) => match &**l {
                    Leaf::Parameterized(pl) => {
                        Primitive::TransversalDelta(Arc::new(Leaf::Parameterized(pl.refined(ps)?)), u.clone())
                    }
                    Leaf::Point(_) => p.clone(),
                },
                Primitive::Multiplied(f, d) => Primitive::Multiplied(f.clone(), Box::new(d.refined(ps)?)),
                Primitive::Derived(x, d) => Primitive::Derived(x.clone(), Box::new(d.refined(ps)?)),
                _ => p.clone(),
            };
            out.terms.push((w.clone(), r));
        }
        Ok(out)
    }
}

/// The vector field `g ↦ {f, g}`; equals `−X_f` with `X_f(g) = {g, f}`.
pub fn bracket_field(ps: &PoissonStructure, f: &Expr) -> KVector {
    ps.hamiltonian_field(f).neg()
}

fn directional(f: &Expr, x0: &Point, v: &[Rational]) -> Result<Rational> {
    let mut acc = q(0);
    for (i, vi) in v.iter().enumerate() {
        if !vi.is_zero() {
            acc += f.diff(i).eval(x0.coords())? * vi;
        }
    }
    Ok(acc)
}

fn vanishes_at(x: &KVector, x0: &Point) -> Result<bool> {
    Ok(x.at(x0.coords())?.is_zero())
}

/// A module operation on distributions.
#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Multiply(Expr),
    Derive(KVector),
    Bracket(Expr),
}

pub fn module_action(ps: &PoissonStructure, op: &Action, phi: &Distribution) -> Result<Distribution> {
    match op {
        Action::Multiply(f) => phi.multiply(f),
        Action::Derive(x) => phi.derive(x),
        Action::Bracket(f) => phi.bracket(ps, f),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Signed,
    /// Sum of absolute contributions: the scale a residual is measured against.
    Magnitude,
}

pub fn pair(phi: &Distribution, t: &TestObject) -> Result<Pairing> {
    pair_mode(phi, t, Mode::Signed)
}

/// `Σ|w|·⟨|Φ|, |t|⟩`, a bound on the size of `⟨Φ, t⟩`.
pub fn pair_magnitude(phi: &Distribution, t: &TestObject) -> Result<f64> {
    Ok(pair_mode(phi, t, Mode::Magnitude)?.to_f64())
}

fn pair_mode(phi: &Distribution, t: &TestObject, mode: Mode) -> Result<Pairing> {
    if let Some(r) = phi.realization()? {
        if r != t.realization() {
            return Err(Error::RealizationMismatch(format!("{} distribution paired with a {}", r, t.realization())));
        }
    }
    if let TestObject::TopForm(a) = t {
        if a.grade() != a.dim() {
            return Err(Error::GradeMismatch { expected: a.dim(), got: a.grade() });
        }
    }
    let mut exact = q(0);
    let mut floats = Vec::new();
    for (w, p) in &phi.terms {
        let w = if mode == Mode::Magnitude { w.abs() } else { w.clone() };
        match pair_primitive(p, t, mode)?.scale(&w) {
            Pairing::Exact(r) => exact += r,
            Pairing::Float(x) => floats.push(x),
        }
    }
    if floats.is_empty() {
        Ok(Pairing::Exact(exact))
    } else {
        Ok(Pairing::Float(to_f64(&exact) + pairwise_sum(&floats)))
    }
}

fn pair_primitive(p: &Primitive, t: &TestObject, mode: Mode) -> Result<Pairing> {
    let signed = mode == Mode::Signed;
    let out = match (p, t) {
        (Primitive::Dirac(x0), TestObject::Function(f)) => Pairing::Exact(f.eval(x0.coords())?),
        (Primitive::DiracDerivative(x0, v), TestObject::Function(f)) => Pairing::Exact(-directional(f, x0, v)?),
        (Primitive::LeafDelta(l), TestObject::Function(f)) => {
            let c = f.compile();
            Pairing::Float(l.integrate(|nd| c.eval(&nd.point).map(|v| if signed { v } else { v.abs() }))?)
        }
        (Primitive::TransversalDelta(l, u), TestObject::TopForm(a)) => {
            let iu = contract(u, a)?;
            match &**l {
                Leaf::Point(pl) => {
                    let s = iu.as_scalar().ok_or(Error::GradeMismatch { expected: 0, got: iu.grade() })?;
                    Pairing::Exact(s.eval(pl.point().coords())?)
                }
                Leaf::Parameterized(pl) => Pairing::Float(integrate_form(pl, &iu, signed)?),
            }
        }
        (Primitive::Multiplied(f, d), _) => pair_mode(d, &t.times(f), mode)?,
        (Primitive::Derived(x, d), _) => {
            let inner = pair_mode(d, &t.derived(x)?, mode)?;
            if signed {
                inner.scale(&q(-1))
            } else {
                inner
            }
        }
        _ => return Err(Error::RealizationMismatch(format!("{} primitive paired with a {}", p.realization()?, t.realization()))),
    };
    Ok(if signed { out } else { out.abs() })
}

/// `∫_N β` for a form of the leaf's dimension, with `N` oriented by `ω_N^k`.
fn integrate_form(leaf: &ParamLeaf, beta: &KForm, signed: bool) -> Result<f64> {
    if beta.grade() != leaf.leaf_dim() {
        return Err(Error::GradeMismatch { expected: leaf.leaf_dim(), got: beta.grade() });
    }
    let coeffs: Vec<(Blade, _)> = beta.terms().into_iter().map(|(b, c)| (b, c.compile())).collect();
    let m = leaf.leaf_dim();
    let terms = leaf
        .nodes()
        .iter()
        .map(|nd| {
            let mut v = 0.0;
            for (b, c) in &coeffs {
                let rows = b.indices();
                let minor = DMatrix::from_fn(m, m, |i, j| nd.jacobian[(rows[i], j)]);
                v += c.eval(&nd.point)? * minor.determinant();
            }
            let v = v * nd.density.signum();
            Ok(nd.weight * if signed { v } else { v.abs() })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// A pairing together with the same pairing on leaves refined by one node
/// per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedPairing {
    pub value: Pairing,
    pub refined: Pairing,
}

impl RefinedPairing {
    /// `|value − refined|`; zero for exact pairings.
    pub fn estimate(&self) -> f64 {
        match (&self.value, &self.refined) {
            (Pairing::Exact(_), Pairing::Exact(_)) => 0.0,
            (a, b) => (a.to_f64() - b.to_f64()).abs(),
        }
    }
}

pub fn pair_refined(ps: &PoissonStructure, phi: &Distribution, t: &TestObject) -> Result<RefinedPairing> {
    Ok(RefinedPairing { value: pair(phi, t)?, refined: pair(&phi.refined(ps)?, t)? })
}

fn monomials(dim: usize, lo: u32, hi: u32) -> Vec<Expr> {
    Monomial::all_up_to(dim, hi)
        .into_iter()
        .filter(|m| m.degree() >= lo)
        .map(|m| Expr::from_poly(Poly::term(m, q(1))))
        .collect()
}

/// Outcome of a generalized-center check over monomial test data.
#[derive(Clone, Debug, PartialEq)]
pub struct GencReport {
    pub realization: Option<Realization>,
    pub degree_bound: u32,
    /// Every pairing was decided in exact arithmetic.
    pub exact: bool,
    pub pairs_tested: usize,
    /// Largest `|⟨{f,Φ}, t⟩|`, divided by its magnitude scale when inexact.
    pub worst: f64,
    pub violation: Option<(Expr, TestObject)>,
    pub passed: bool,
}

/// Checks `⟨{f, Φ}, t⟩ = 0` for monomials `f` of degree `1..=degree_bound`
/// and monomial test objects `t` (functions, or monomial multiples of the
/// standard volume). Float pairings pass when the residual is within
/// `tolerance·max(1, scale)`.
pub fn genc_check(ps: &PoissonStructure, phi: &Distribution, degree_bound: u32, tolerance: f64) -> Result<GencReport> {
    let realization = phi.realization()?;
    let n = ps.dim();
    let fs = monomials(n, 1, degree_bound);
    let mut rep = GencReport {
        realization,
        degree_bound,
        exact: phi.is_exact(),
        pairs_tested: 0,
        worst: 0.0,
        violation: None,
        passed: true,
    };
    let vol = VolumeForm::standard(n);
    for (i, f) in fs.iter().enumerate() {
        let br = phi.bracket(ps, f)?;
        let tests: Vec<TestObject> = match realization {
            None => Vec::new(),
            // {g, f} = −{f, g} and {f, 1} = 0, so later monomials suffice
            Some(Realization::Function) => fs[i + 1..].iter().cloned().map(TestObject::Function).collect(),
            Some(Realization::TopForm) => {
                monomials(n, 0, degree_bound).into_iter().map(|m| TestObject::TopForm(vol.form().scale(&m))).collect()
            }
        };
        for t in tests {
            rep.pairs_tested += 1;
            let v = pair(&br, &t)?;
            let (bad, size) = match &v {
                Pairing::Exact(r) => (!r.is_zero(), to_f64(r).abs()),
                Pairing::Float(x) => {
                    let scale = pair_magnitude(&br, &t)?.max(1.0);
                    let rel = x.abs() / scale;
                    (rel > tolerance, rel)
                }
            };
            rep.worst = rep.worst.max(size);
            if bad && rep.passed {
                rep.passed = false;
                rep.violation = Some((f.clone(), t));
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceReport {
    /// `M[i][j] = ⟨δ_{N_i}, f_j⟩`.
    pub matrix: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub independent: bool,
}

/// Relative singular-value cutoff for the independence rank.
pub const INDEPENDENCE_TOL: f64 = 1e-6;

/// Numerical rank of the pairing matrix of leaf deltas against separating
/// functions; full row rank shows the deltas are linearly independent.
pub fn leaf_delta_independence(leaves: &[Arc<ParamLeaf>], separating: &[Expr]) -> Result<IndependenceReport> {
    let mut matrix = Vec::with_capacity(leaves.len());
    for l in leaves {
        let d = Distribution::leaf_delta(l.clone());
        let row = separating.iter().map(|f| pair(&d, &TestObject::Function(f.clone())).map(|p| p.to_f64())).collect::<Result<Vec<_>>>()?;
        matrix.push(row);
    }
    let m = linalg::to_dmatrix(&matrix);
    let singular_values = linalg::singular_values(&m);
    let rank = linalg::numerical_rank(&m, INDEPENDENCE_TOL);
    if singular_values.iter().any(|s| !s.is_finite()) {
        return Err(Error::Quadrature("non-finite pairing".into()));
    }
    Ok(IndependenceReport { matrix, singular_values, rank, independent: rank == leaves.len() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilatorReport {
    pub degree_bound: u32,
    /// Largest `|⟨X(δ_N), f⟩| / max(1, ⟨δ_N, |X(f)|⟩)` over monomials.
    pub pairing_worst: f64,
    pub violation: Option<Expr>,
    pub annihilates: bool,
    /// Largest relative normal component of `X` at the nodes.
    pub tangency_worst: f64,
    pub tangent: bool,
    /// For tangent `X`: largest `|div(ρ·a)| / ρ` at the nodes, where
    /// `X = Σ a^i ∂_{θ^i}` and `ρ` is the `ω_N^k` density in parameters;
    /// this is `L_X(ω_N^k) / ω_N^k`, by central differences.
    pub divergence_worst: Option<f64>,
    /// `∫_N L_X(ω_N^k)` by the same differences.
    pub divergence_integral: Option<f64>,
}

/// Step for the central differences in the divergence check.
const FD_STEP: f64 = 1e-5;

/// Whether the vector field `X` annihilates `δ_N`, with the tangency and
/// volume-preservation checks that explain the verdict.
pub fn delta_n_annihilator_check(
    ps: &PoissonStructure,
    leaf: &Arc<ParamLeaf>,
    x: &KVector,
    degree_bound: u32,
    tolerance: f64,
) -> Result<AnnihilatorReport> {
    let n = ps.dim();
    if x.dim() != n || leaf.dim() != n {
        return Err(Error::DimensionMismatch { left: n, right: x.dim() });
    }
    let delta = Distribution::leaf_delta(leaf.clone());
    let xd = delta.derive(x)?;
    let mut rep = AnnihilatorReport {
        degree_bound,
        pairing_worst: 0.0,
        violation: None,
        annihilates: true,
        tangency_worst: 0.0,
        tangent: true,
        divergence_worst: None,
        divergence_integral: None,
    };
    for f in monomials(n, 0, degree_bound) {
        let t = TestObject::Function(f.clone());
        let v = pair(&xd, &t)?.to_f64().abs();
        let rel = v / pair_magnitude(&xd, &t)?.max(1.0);
        rep.pairing_worst = rep.pairing_worst.max(rel);
        if rel > tolerance && rep.annihilates {
            rep.annihilates = false;
            rep.violation = Some(f);
        }
    }
    let comps: Vec<_> = x.components().iter().map(Expr::compile).collect();
    let field_at = |p: &[f64]| comps.iter().map(|c| c.eval(p)).collect::<Result<Vec<f64>>>();
    let mut coords = Vec::with_capacity(leaf.nodes().len());
    for nd in leaf.nodes() {
        let xv = nalgebra::DVector::from_vec(field_at(&nd.point)?);
        let (a, res) = linalg::least_squares(&nd.jacobian, &xv, RANK_TOL);
        let rel = res / xv.norm().max(1.0);
        rep.tangency_worst = rep.tangency_worst.max(rel);
        if rel > tolerance {
            rep.tangent = false;
        }
        coords.push(a);
    }
    if rep.tangent {
        let frames = leaf.frames(ps);
        // ρ·a at shifted parameters of the same chart
        let flux = |ci: usize, params: &[f64], axis: usize| -> Result<f64> {
            let (point, jac) = frames.chart_frame(ci, params)?;
            let (_, density) = frames.symplectic(&point, &jac)?;
            let xv = nalgebra::DVector::from_vec(field_at(&point)?);
            let (a, _) = linalg::least_squares(&jac, &xv, RANK_TOL);
            Ok(density.abs() * a[axis])
        };
        let mut worst: f64 = 0.0;
        let mut integrand = Vec::with_capacity(leaf.nodes().len());
        for nd in leaf.nodes() {
            let mut div = 0.0;
            for axis in 0..leaf.leaf_dim() {
                let mut hi = nd.params.clone();
                let mut lo = nd.params.clone();
                hi[axis] += FD_STEP;
                lo[axis] -= FD_STEP;
                div += (flux(nd.chart, &hi, axis)? - flux(nd.chart, &lo, axis)?) / (2.0 * FD_STEP);
            }
            worst = worst.max(div.abs() / nd.density.abs());
            integrand.push(nd.weight * div);
        }
        rep.divergence_worst = Some(worst);
        rep.divergence_integral = Some(pairwise_sum(&integrand));
    }
    Ok(rep)
}

/// Where the two routes to `{f, δ^u}` first disagree or fail.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessReport {
    pub degree_bound: u32,
    pub exact: bool,
    /// Direct route: `⟨{f, δ^u}, α⟩` over monomial `f` and monomial-coefficient top forms.
    pub direct_casimir: bool,
    pub direct_worst: f64,
    pub direct_violation: Option<(Expr, KForm)>,
    /// Connection route: `∇_{df} u` over the same `f`.
    pub bott_flat: bool,
    pub bott_worst: f64,
    pub bott_violation: Option<Expr>,
}

impl FlatnessReport {
    pub fn agree(&self) -> bool {
        self.direct_casimir == self.bott_flat
    }
}

/// Decide whether `δ^u` is a generalized Casimir in two independent ways.
pub fn transversal_delta_flatness(
    ps: &PoissonStructure,
    leaf: &Arc<Leaf>,
    u: &KVector,
    degree_bound: u32,
    tolerance: f64,
) -> Result<FlatnessReport> {
    let delta = Distribution::transversal_delta(leaf.clone(), u.clone())?;
    let n = ps.dim();
    let fs = monomials(n, 1, degree_bound);
    let vol = VolumeForm::standard(n);
    let alphas: Vec<KForm> = monomials(n, 0, degree_bound).iter().map(|m| vol.form().scale(m)).collect();
    let mut rep = FlatnessReport {
        degree_bound,
        exact: delta.is_exact(),
        direct_casimir: true,
        direct_worst: 0.0,
        direct_violation: None,
        bott_flat: true,
        bott_worst: 0.0,
        bott_violation: None,
    };
    for f in &fs {
        let br = delta.bracket(ps, f)?;
        for a in &alphas {
            let t = TestObject::TopForm(a.clone());
            let (bad, size) = match pair(&br, &t)? {
                Pairing::Exact(r) => (!r.is_zero(), to_f64(&r).abs()),
                Pairing::Float(x) => {
                    let rel = x.abs() / pair_magnitude(&br, &t)?.max(1.0);
                    (rel > tolerance, rel)
                }
            };
            rep.direct_worst = rep.direct_worst.max(size);
            if bad && rep.direct_casimir {
                rep.direct_casimir = false;
                rep.direct_violation = Some((f.clone(), a.clone()));
            }
        }
        let (bad, size) = match &**leaf {
            Leaf::Point(pl) => {
                let x0 = pl.point();
                let alpha = (0..n).map(|i| f.diff(i).eval(x0.coords())).collect::<Result<Vec<_>>>()?;
                let u0 = u.at(x0.coords())?;
                let d = bott_derivative_multi_point(ps, x0, &alpha, &u0, Some(u), f)?;
                let size = d
                    .terms()
                    .iter()
                    .map(|(_, c)| c.as_constant().map_or(f64::INFINITY, |r| to_f64(&r).abs()))
                    .fold(0.0, f64::max);
                (!d.is_zero(), size)
            }
            Leaf::Parameterized(pl) => {
                let size = bott_derivative_multi_nodes(ps, pl, f, u)?.iter().map(|c| c.norm()).fold(0.0, f64::max);
                (size > tolerance, size)
            }
        };
        rep.bott_worst = rep.bott_worst.max(size);
        if bad && rep.bott_flat {
            rep.bott_flat = false;
            rep.bott_violation = Some(f.clone());
        }
    }
    Ok(rep)
}

/// The potential `i_{X_f} α` with `L_{X_f} α = d(i_{X_f} α)` for a top form
/// `α`, or `None` if the identity fails.
pub fn hamiltonian_exactness_witness(ps: &PoissonStructure, f: &Expr, alpha: &KForm) -> Result<Option<KForm>> {
    if alpha.grade() != alpha.dim() {
        return Err(Error::GradeMismatch { expected: alpha.dim(), got: alpha.grade() });
    }
    let x = ps.hamiltonian_field(f);
    let potential = contract(&x, alpha)?;
    let lhs = lie_derivative(&x, alpha)?;
    Ok(if crate::identities::same(&lhs, &potential.d()) { Some(potential) } else { None })
}

/// Short text for a test object, for reports.
pub fn describe_test(t: &TestObject, vars: &Vars) -> String {
    match t {
        TestObject::Function(f) => vars.show(f),
        TestObject::TopForm(a) => format!("{}", a.display(vars)),
    }
}
