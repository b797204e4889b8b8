//! Symplectic leaves, transversal classes and the Bott connection.
//!
//! Point leaves (zeros of the bivector) are handled exactly. Parameterized
//! leaves are given by charts over parameter boxes; everything about them is
//! evaluated in `f64` at the nodes of a tensor Gauss–Legendre rule, and those
//! node values are cached when the leaf is built.
//!
//! The Bott derivative of a transversal class along `α = df` is the class of
//! `[X_f, Ū]` at the base point, for any ambient extension `Ū`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::{schouten, Blade, KVector};
use crate::identities::Tally;
use crate::linalg::{self, Matrix};
use crate::poisson::PoissonStructure;
use crate::quadrature::{pairwise_sum, TensorRule};
use crate::sample::Sampler;
use crate::symexpr::{CompiledExpr, Expr, Monomial, Point, Poly, Rational};

/// Relative singular-value cutoff for ranks and quotient projections.
pub const RANK_TOL: f64 = 1e-10;
/// Relative residual allowed when solving `P♯β = u` at a node.
pub const SOLVE_TOL: f64 = 1e-9;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// A zero of the bivector: a zero-dimensional leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct PointLeaf {
    x0: Point,
}

impl PointLeaf {
    pub fn new(ps: &PoissonStructure, x0: Point) -> Result<Self> {
        if x0.dim() != ps.dim() {
            return Err(Error::PointDimension { got: x0.dim(), needed: ps.dim() });
        }
        for (_, c) in ps.bivector().terms() {
            if !num_traits::Zero::is_zero(&c.eval(x0.coords())?) {
                return Err(Error::NotPointLeaf);
            }
        }
        Ok(PointLeaf { x0 })
    }

    pub fn point(&self) -> &Point {
        &self.x0
    }
}

/// One chart of a parameterized leaf: a parameter box and the ambient
/// coordinates as functions of the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub bounds: Vec<(f64, f64)>,
    pub map: Vec<Expr>,
}

impl Chart {
    /// Four rational charts covering the sphere `|x| = r` in ℝ³ up to a
    /// null set. Parameters `(t, s) ∈ [-1,1] × [-1,0]` or `[0,1]`; `t` gives
    /// the longitude through the rational circle, `s` the latitude.
    pub fn sphere(radius: &Rational) -> Vec<Chart> {
        let (t, s) = (Expr::var(0), Expr::var(1));
        let one = Expr::one();
        let two = Expr::integer(2);
        let circ = |u: &Expr| {
            let den = one.add(&u.mul(u)).inv().expect("1 + u² ≠ 0");
            (one.sub(&u.mul(u)).mul(&den), two.mul(u).mul(&den))
        };
        let (c, sn) = circ(&t);
        let (rho, z) = circ(&s);
        let r = Expr::constant(radius.clone());
        let mut out = Vec::new();
        for sign in [1, -1] {
            let sg = Expr::integer(sign);
            let map = alloc::vec![
                sg.mul(&r).mul(&rho).mul(&c),
                sg.mul(&r).mul(&rho).mul(&sn),
                r.mul(&z)
            ];
            for lat in [(-1.0, 0.0), (0.0, 1.0)] {
                out.push(Chart { bounds: alloc::vec![(-1.0, 1.0), lat], map: map.clone() });
            }
        }
        out
    }
}

/// Cached data at one quadrature node of a parameterized leaf.
#[derive(Clone, Debug)]
pub struct LeafNode {
    pub chart: usize,
    pub params: Vec<f64>,
    pub point: Vec<f64>,
    /// Ambient components of the parameter tangent vectors, one per column.
    pub jacobian: DMatrix<f64>,
    pub weight: f64,
    /// `ω_N` on the parameter tangent vectors.
    pub omega: DMatrix<f64>,
    /// Coefficient of `ω_N^k` on `dθ¹∧…∧dθ^{2k}`, i.e. `k!·Pf(omega)`.
    pub density: f64,
}

/// The bivector with entries compiled for float evaluation.
struct NumericBivector {
    dim: usize,
    entries: Vec<(usize, usize, CompiledExpr)>,
}

impl NumericBivector {
    fn new(ps: &PoissonStructure) -> Self {
        let n = ps.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !ps.entry(i, j).is_zero() {
                    entries.push((i, j, ps.entry(i, j).compile()));
                }
            }
        }
        NumericBivector { dim: n, entries }
    }

    fn at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, c) in &self.entries {
            let v = c.eval(x)?;
            m[(*i, *j)] = v;
            m[(*j, *i)] = -v;
        }
        Ok(m)
    }
}

/// The matrix `P^{ij}` at a float point.
pub fn bivector_at(ps: &PoissonStructure, x: &[f64]) -> Result<DMatrix<f64>> {
    NumericBivector::new(ps).at(x)
}

/// `ω_N(u_i, u_j) = ⟨β_i, u_j⟩` where `P♯β_i = u_i` and `u_i` are the
/// columns of `frame`. Fails when some `u_i` is not in the image of `P♯`.
pub fn symplectic_form_at(ps: &PoissonStructure, x: &[f64], frame: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    symplectic_form_with(&bivector_at(ps, x)?, frame)
}

fn symplectic_form_with(p: &DMatrix<f64>, frame: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = frame.ncols();
    let mut betas = Vec::with_capacity(k);
    for i in 0..k {
        let u: DVector<f64> = frame.column(i).into_owned();
        let (beta, res) = linalg::least_squares(p, &u, RANK_TOL);
        let tolerance = SOLVE_TOL * u.norm().max(1.0);
        if res > tolerance {
            return Err(Error::Residual { residual: res, tolerance });
        }
        betas.push(beta);
    }
    Ok(DMatrix::from_fn(k, k, |i, j| betas[i].dot(&frame.column(j))))
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, b| a * b as f64)
}

fn pfaffian_f64(m: &DMatrix<f64>) -> f64 {
    let rows: Matrix<f64> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect();
    linalg::pfaffian(&rows)
}

/// Compiled chart maps and bivector, for evaluating leaf data at arbitrary
/// parameters.
pub struct LocalFrames {
    dim: usize,
    leaf_dim: usize,
    bivector: NumericBivector,
    maps: Vec<Vec<CompiledExpr>>,
    jacs: Vec<Vec<Vec<CompiledExpr>>>,
}

impl LocalFrames {
    fn compile(ps: &PoissonStructure, charts: &[Chart], leaf_dim: usize) -> Self {
        LocalFrames {
            dim: ps.dim(),
            leaf_dim,
            bivector: NumericBivector::new(ps),
            maps: charts.iter().map(|c| c.map.iter().map(Expr::compile).collect()).collect(),
            jacs: charts
                .iter()
                .map(|c| c.map.iter().map(|e| (0..leaf_dim).map(|a| e.diff(a).compile()).collect()).collect())
                .collect(),
        }
    }

    /// Ambient point and chart Jacobian at `params` of chart `ci`.
    pub fn chart_frame(&self, ci: usize, params: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let map = self.maps.get(ci).ok_or_else(|| Error::InvalidLeaf(format!("no chart {}", ci)))?;
        let point = map.iter().map(|c| c.eval(params)).collect::<Result<Vec<f64>>>()?;
        let mut jacobian = DMatrix::zeros(self.dim, self.leaf_dim);
        for i in 0..self.dim {
            for a in 0..self.leaf_dim {
                jacobian[(i, a)] = self.jacs[ci][i][a].eval(params)?;
            }
        }
        Ok((point, jacobian))
    }

    /// `ω_N` on the columns of `jacobian` and the `ω_N^k` density.
    pub fn symplectic(&self, point: &[f64], jacobian: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
        let p = self.bivector.at(point)?;
        let rank = linalg::numerical_rank(&p, RANK_TOL);
        if rank != self.leaf_dim {
            return Err(Error::OffLeaf(format!("bivector has rank {} at {:?}, leaf dimension {}", rank, point, self.leaf_dim)));
        }
        let omega = symplectic_form_with(&p, jacobian).map_err(|e| Error::OffLeaf(format!("{} at {:?}", e, point)))?;
        let density = factorial(self.leaf_dim / 2) * pfaffian_f64(&omega);
        Ok((omega, density))
    }

    /// Signed `ω_N^k` density at `params` of chart `ci`.
    pub fn density(&self, ci: usize, params: &[f64]) -> Result<f64> {
        let (point, jacobian) = self.chart_frame(ci, params)?;
        Ok(self.symplectic(&point, &jacobian)?.1)
    }
}

/// A compact leaf described by charts, with its quadrature nodes.
#[derive(Clone, Debug)]
pub struct ParamLeaf {
    dim: usize,
    leaf_dim: usize,
    charts: Vec<Chart>,
    casimirs: Vec<Expr>,
    order: usize,
    nodes: Vec<LeafNode>,
}

impl ParamLeaf {
    /// Build the leaf and verify at every node that the chart is immersive,
    /// that its tangent space is the image of `P♯`, and that the declared
    /// Casimirs are constant.
    pub fn new(ps: &PoissonStructure, charts: Vec<Chart>, casimirs: Vec<Expr>, order: usize) -> Result<Self> {
        let n = ps.dim();
        let leaf_dim = charts.first().map(|c| c.bounds.len()).ok_or_else(|| Error::InvalidLeaf("no charts".into()))?;
        if leaf_dim == 0 || leaf_dim % 2 == 1 || leaf_dim > n {
            return Err(Error::InvalidLeaf(format!("leaf dimension {} in a {}-dimensional chart", leaf_dim, n)));
        }
        for (ci, chart) in charts.iter().enumerate() {
            if chart.bounds.len() != leaf_dim || chart.map.len() != n {
                return Err(Error::InvalidLeaf(format!("chart {} has the wrong shape", ci)));
            }
            if let Some(e) = chart.map.iter().find(|e| e.width() > leaf_dim) {
                return Err(Error::InvalidLeaf(format!("chart {} uses more than {} parameters ({})", ci, leaf_dim, e.width())));
            }
        }
        let frames = LocalFrames::compile(ps, &charts, leaf_dim);
        let mut nodes = Vec::new();
        for (ci, chart) in charts.iter().enumerate() {
            let rule = TensorRule::on_box(&chart.bounds, order)?;
            for (params, weight) in rule.nodes.into_iter().zip(rule.weights) {
                let (point, jacobian) = frames.chart_frame(ci, &params)?;
                if linalg::numerical_rank(&jacobian, RANK_TOL) != leaf_dim {
                    return Err(Error::InvalidLeaf(format!("chart {} Jacobian drops rank at {:?}", ci, params)));
                }
                let (omega, density) = frames.symplectic(&point, &jacobian)?;
                nodes.push(LeafNode { chart: ci, params, point, jacobian, weight, omega, density });
            }
        }
        for c in &casimirs {
            let cc = c.compile();
            let vals = nodes.iter().map(|nd| cc.eval(&nd.point)).collect::<Result<Vec<f64>>>()?;
            let first = vals[0];
            let worst = vals.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
            if worst > 1e-9 * first.abs().max(1.0) {
                return Err(Error::InvalidLeaf(format!("declared Casimir varies by {:e} on the leaf", worst)));
            }
        }
        Ok(ParamLeaf { dim: n, leaf_dim, charts, casimirs, order, nodes })
    }

    /// Evaluators for leaf data away from the quadrature nodes.
    pub fn frames(&self, ps: &PoissonStructure) -> LocalFrames {
        LocalFrames::compile(ps, &self.charts, self.leaf_dim)
    }

    /// The same leaf with one more node per axis.
    pub fn refined(&self, ps: &PoissonStructure) -> Result<Self> {
        Self::new(ps, self.charts.clone(), self.casimirs.clone(), self.order + 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn leaf_dim(&self) -> usize {
        self.leaf_dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn casimirs(&self) -> &[Expr] {
        &self.casimirs
    }

    pub fn nodes(&self) -> &[LeafNode] {
        &self.nodes
    }

    /// `∫_N g·ω_N^k`, with `N` oriented by `ω_N^k`.
    pub fn integrate(&self, mut g: impl FnMut(&LeafNode) -> Result<f64>) -> Result<f64> {
        let terms = self
            .nodes
            .iter()
            .map(|nd| Ok(nd.weight * nd.density.abs() * g(nd)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(pairwise_sum(&terms))
    }
}

/// A declared symplectic leaf.
#[derive(Clone, Debug)]
pub enum Leaf {
    Point(PointLeaf),
    Parameterized(ParamLeaf),
}

/// `ω_N` on the parameter tangent vectors at node `node`.
pub fn leaf_symplectic_form(leaf: &ParamLeaf, node: usize) -> Result<DMatrix<f64>> {
    leaf.nodes
        .get(node)
        .map(|nd| nd.omega.clone())
        .ok_or_else(|| Error::OffLeaf(format!("no node {}", node)))
}

/// Largest `|ω_N(X_f, X_g) − {f,g}|` over the nodes and monomial pairs of
/// degree at most `max_deg`.
pub fn symplectic_consistency(ps: &PoissonStructure, leaf: &ParamLeaf, max_deg: u32) -> Result<f64> {
    let fs: Vec<Expr> = Monomial::all_up_to(ps.dim(), max_deg).iter().skip(1).map(mono).collect();
    let fields: Vec<Vec<CompiledExpr>> =
        fs.iter().map(|f| ps.hamiltonian_field(f).components().iter().map(Expr::compile).collect()).collect();
    let mut brackets = Vec::new();
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            brackets.push((i, j, ps.bracket(&fs[i], &fs[j])?.compile()));
        }
    }
    let mut worst: f64 = 0.0;
    for nd in &leaf.nodes {
        let frame_coeffs = fields
            .iter()
            .map(|comps| {
                let x = comps.iter().map(|c| c.eval(&nd.point)).collect::<Result<Vec<f64>>>()?;
                Ok(linalg::least_squares(&nd.jacobian, &DVector::from_vec(x), RANK_TOL).0)
            })
            .collect::<Result<Vec<DVector<f64>>>>()?;
        for (i, j, b) in &brackets {
            let w = frame_coeffs[*i].dot(&(&nd.omega * &frame_coeffs[*j]));
            worst = worst.max((w - b.eval(&nd.point)?).abs());
        }
    }
    Ok(worst)
}

fn mono(m: &Monomial) -> Expr {
    Expr::from_poly(Poly::term(m.clone(), q(1)))
}

fn check_differential(f: &Expr, x0: &Point, alpha: &[Rational]) -> Result<()> {
    if alpha.len() != x0.dim() {
        return Err(Error::PointDimension { got: alpha.len(), needed: x0.dim() });
    }
    for (i, a) in alpha.iter().enumerate() {
        if &f.diff(i).eval(x0.coords())? != a {
            return Err(Error::ExtensionMismatch(format!("df differs from α in component {}", i)));
        }
    }
    Ok(())
}

fn constant_vector(v: &[Rational]) -> KVector {
    KVector::vector(&v.iter().cloned().map(Expr::constant).collect::<Vec<_>>())
}

/// Exact coordinates of a constant-coefficient field.
fn constant_components(v: &KVector) -> Vec<Rational> {
    v.components().iter().map(|c| c.as_constant().unwrap_or_else(|| q(0))).collect()
}

/// `∇_α V = [X_f, V̄](x0)` at a point leaf, with `V̄` the constant extension
/// of `V` and `f_ext` any function with `df(x0) = α`.
pub fn bott_derivative_point(
    ps: &PoissonStructure,
    x0: &Point,
    alpha: &[Rational],
    v: &[Rational],
    f_ext: &Expr,
) -> Result<Vec<Rational>> {
    PointLeaf::new(ps, x0.clone())?;
    check_differential(f_ext, x0, alpha)?;
    if v.len() != ps.dim() {
        return Err(Error::PointDimension { got: v.len(), needed: ps.dim() });
    }
    let br = schouten(&ps.hamiltonian_field(f_ext), &constant_vector(v))?;
    Ok(constant_components(&br.at(x0.coords())?))
}

/// Basis of the tangent vectors at a point leaf killed by every `∇_α`.
pub fn bott_flat_sections_point(ps: &PoissonStructure, x0: &Point) -> Result<Vec<Vec<Rational>>> {
    PointLeaf::new(ps, x0.clone())?;
    let n = ps.dim();
    // ∇_{dx_i} V = −Σ_j V_j ∂_j X_{x_i} at x0, linear in V
    let mut rows: Matrix<Rational> = Vec::new();
    for i in 0..n {
        let xi = ps.hamiltonian_field(&Expr::var(i)).components();
        for comp in &xi {
            let row = (0..n).map(|j| comp.diff(j).eval(x0.coords()).map(|r| -r)).collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
    }
    Ok(linalg::nullspace(&rows, n))
}

/// Exact check that `∇_α V` does not depend on the extension of `α`: random
/// quadratic extensions against the affine one.
pub fn bott_extension_probe(ps: &PoissonStructure, x0: &Point, s: &mut Sampler, cases: usize) -> Result<Tally> {
    let n = ps.dim();
    let mut t = Tally::new("bott extension independence");
    let shifted: Vec<Expr> = (0..n).map(|i| Expr::var(i).sub(&Expr::constant(x0.coords()[i].clone()))).collect();
    for _ in 0..cases {
        let alpha: Vec<Rational> = (0..n).map(|_| q(s.int(-3, 3))).collect();
        let v: Vec<Rational> = (0..n).map(|_| q(s.int(-3, 3))).collect();
        let affine = shifted.iter().zip(&alpha).fold(Expr::zero(), |acc, (x, a)| acc.add(&x.scale(a)));
        let mut quad = affine.add(&Expr::integer(s.int(-5, 5)));
        for i in 0..n {
            for j in i..n {
                let c = s.int(-3, 3);
                if c != 0 {
                    quad = quad.add(&shifted[i].mul(&shifted[j]).scale(&q(c)));
                }
            }
        }
        let a = bott_derivative_point(ps, x0, &alpha, &v, &affine)?;
        let b = bott_derivative_point(ps, x0, &alpha, &v, &quad)?;
        t.record(a == b, || format!("α = {:?}, V = {:?}", alpha, v));
    }
    Ok(t)
}

/// `∇_α u = [X_f, Ū](x0)` for a multivector `u` at a point leaf. The
/// extension defaults to the constant one and must agree with `u` at `x0`.
pub fn bott_derivative_multi_point(
    ps: &PoissonStructure,
    x0: &Point,
    alpha: &[Rational],
    u: &KVector,
    u_ext: Option<&KVector>,
    f_ext: &Expr,
) -> Result<KVector> {
    PointLeaf::new(ps, x0.clone())?;
    check_differential(f_ext, x0, alpha)?;
    let ext = u_ext.unwrap_or(u);
    if !crate::identities::same(&ext.at(x0.coords())?, &u.at(x0.coords())?) {
        return Err(Error::ExtensionMismatch("extension differs from u at the base point".into()));
    }
    schouten(&ps.hamiltonian_field(f_ext), ext)?.at(x0.coords())
}

/// A transversal multivector at a leaf node, stored as the representative
/// orthogonal to `T_xN ∧ (∧^{m−1} T_xM)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransversalClass {
    pub grade: usize,
    pub coeffs: Vec<(Blade, f64)>,
}

impl TransversalClass {
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.coeffs.iter().map(|(_, c)| c * c).sum())
    }
}

fn blades_of_grade(dim: usize, grade: usize) -> Vec<Blade> {
    let mut out: Vec<Blade> = (0..1u32 << dim).map(Blade).filter(|b| b.grade() == grade).collect();
    out.sort_by_key(|b| b.indices());
    out
}

/// Class of the ambient multivector with coefficients `v` (over
/// `blades_of_grade`) modulo `T_xN ∧ (∧^{m−1} T_xM)`, `tangent` spanning `T_xN`.
fn project_quotient(tangent: &DMatrix<f64>, dim: usize, grade: usize, v: &[f64]) -> Vec<(Blade, f64)> {
    let blades = blades_of_grade(dim, grade);
    if grade == 0 || tangent.ncols() == 0 {
        return blades.into_iter().zip(v.iter().copied()).collect();
    }
    let lower = blades_of_grade(dim, grade - 1);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for a in 0..tangent.ncols() {
        for low in &lower {
            let mut col = alloc::vec![0.0; blades.len()];
            for i in 0..dim {
                let ti = tangent[(i, a)];
                if ti == 0.0 {
                    continue;
                }
                if let Some((b, odd)) = Blade::single(i).wedge(*low) {
                    let pos = blades.iter().position(|x| *x == b).expect("grade matches");
                    col[pos] += if odd { -ti } else { ti };
                }
            }
            cols.push(col);
        }
    }
    let a = DMatrix::from_fn(blades.len(), cols.len(), |i, j| cols[j][i]);
    let mut r = DVector::from_column_slice(v);
    if !a.is_empty() {
        let svd = linalg::Svd::new(&a);
        for k in 0..svd.rank(RANK_TOL) {
            let col = svd.u.column(k);
            let c = col.dot(&r);
            r -= col * c;
        }
    }
    blades.into_iter().zip(r.iter().copied()).collect()
}

fn eval_kvector(u: &KVector, x: &[f64]) -> Result<Vec<f64>> {
    blades_of_grade(u.dim(), u.grade()).iter().map(|b| u.coeff(*b).eval_f64(x)).collect()
}

/// Class of the ambient field `u` at every node of `leaf`.
pub fn transversal_classes(leaf: &ParamLeaf, u: &KVector) -> Result<Vec<TransversalClass>> {
    leaf.nodes
        .iter()
        .map(|nd| {
            let v = eval_kvector(u, &nd.point)?;
            Ok(TransversalClass { grade: u.grade(), coeffs: project_quotient(&nd.jacobian, leaf.dim, u.grade(), &v) })
        })
        .collect()
}

/// `∇_{df}(u) = ρ([X_f, Ū]|_N)` at every node of a parameterized leaf.
pub fn bott_derivative_multi_nodes(
    ps: &PoissonStructure,
    leaf: &ParamLeaf,
    f_ext: &Expr,
    u_ext: &KVector,
) -> Result<Vec<TransversalClass>> {
    let br = schouten(&ps.hamiltonian_field(f_ext), u_ext)?;
    transversal_classes(leaf, &br)
}

/// Outcome of testing a vector field against the flat-section lemma.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatSectionReport {
    /// Point leaf: everything was decided in exact arithmetic.
    pub exact: bool,
    pub pairs_tested: usize,
    /// `X{f,g} = {Xf, g} + {f, Xg}` on the leaf for every tested pair.
    pub condition_holds: bool,
    pub condition_worst: f64,
    pub condition_violation: Option<(Expr, Expr)>,
    /// `∇_{df} ρ(X) = 0` for every tested monomial `f`.
    pub flat: bool,
    pub flat_worst: f64,
    pub flat_violation: Option<Expr>,
}

/// Check condition (1) of the flat-section lemma and flatness of `ρ(X)`
/// over monomials of degree `1..=degree_bound`.
pub fn flat_section_correspondence_check(
    ps: &PoissonStructure,
    leaf: &Leaf,
    x: &KVector,
    degree_bound: u32,
    tol: f64,
) -> Result<FlatSectionReport> {
    if x.dim() != ps.dim() {
        return Err(Error::DimensionMismatch { left: ps.dim(), right: x.dim() });
    }
    let fs: Vec<Expr> = Monomial::all_up_to(ps.dim(), degree_bound).iter().skip(1).map(mono).collect();
    let mut conds = Vec::new();
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            let (f, g) = (&fs[i], &fs[j]);
            let lhs = x.apply(&ps.bracket(f, g)?)?;
            let rhs = ps.bracket(&x.apply(f)?, g)?.add(&ps.bracket(f, &x.apply(g)?)?);
            conds.push((f.clone(), g.clone(), lhs.sub(&rhs)));
        }
    }
    let flats: Vec<(Expr, KVector)> =
        fs.iter().map(|f| Ok((f.clone(), schouten(&ps.hamiltonian_field(f), x)?))).collect::<Result<_>>()?;
    let mut rep = FlatSectionReport {
        exact: matches!(leaf, Leaf::Point(_)),
        pairs_tested: conds.len(),
        condition_holds: true,
        condition_worst: 0.0,
        condition_violation: None,
        flat: true,
        flat_worst: 0.0,
        flat_violation: None,
    };
    match leaf {
        Leaf::Point(pl) => {
            let x0 = pl.point().coords();
            for (f, g, d) in &conds {
                let v = d.eval(x0)?;
                if !num_traits::Zero::is_zero(&v) {
                    rep.condition_worst = rep.condition_worst.max(num_traits::ToPrimitive::to_f64(&v).unwrap_or(f64::INFINITY).abs());
                    if rep.condition_holds {
                        rep.condition_holds = false;
                        rep.condition_violation = Some((f.clone(), g.clone()));
                    }
                }
            }
            for (f, br) in &flats {
                let at = br.at(x0)?;
                if !at.is_zero() {
                    let norm = constant_components(&at).iter().map(|c| num_traits::ToPrimitive::to_f64(c).unwrap_or(0.0).abs()).fold(0.0, f64::max);
                    rep.flat_worst = rep.flat_worst.max(norm);
                    if rep.flat {
                        rep.flat = false;
                        rep.flat_violation = Some(f.clone());
                    }
                }
            }
        }
        Leaf::Parameterized(pl) => {
            for (f, g, d) in &conds {
                let c = d.compile();
                for nd in &pl.nodes {
                    let v = c.eval(&nd.point)?.abs();
                    rep.condition_worst = rep.condition_worst.max(v);
                    if v > tol && rep.condition_holds {
                        rep.condition_holds = false;
                        rep.condition_violation = Some((f.clone(), g.clone()));
                    }
                }
            }
            for (f, br) in &flats {
                for class in transversal_classes(pl, br)? {
                    let v = class.norm();
                    rep.flat_worst = rep.flat_worst.max(v);
                    if v > tol && rep.flat {
                        rep.flat = false;
                        rep.flat_violation = Some(f.clone());
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Short human-readable form of a float class, for reports.
pub fn describe_class(c: &TransversalClass, names: &[&str]) -> String {
    let mut parts = Vec::new();
    for (b, v) in &c.coeffs {
        if v.abs() > 1e-12 {
            let idx: Vec<&str> = b.indices().iter().map(|&i| names[i]).collect();
            parts.push(format!("{:.6e}*@{}", v, idx.join("^@")));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests;
