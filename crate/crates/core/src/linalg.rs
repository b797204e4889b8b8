//! Dense linear algebra over exact fields, plus a few `f64` helpers.
//!
//! The exact routines are generic over [`Field`], which is implemented for
//! [`Rational`] and for [`Expr`] (the rational-function field). Pivoting picks
//! the first nonzero entry, which is all exact arithmetic needs.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use crate::symexpr::{Expr, Rational};

pub trait Field: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; only called on nonzero values.
    fn inv(&self) -> Self;
}

impl Field for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
}

impl Field for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn one() -> Self {
        Expr::one()
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        Expr::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Expr::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Expr::mul(self, other)
    }
    fn neg(&self) -> Self {
        Expr::neg(self)
    }
    fn inv(&self) -> Self {
        Expr::inv(self).expect("pivot is nonzero")
    }
}

/// Floats as a field, for the expansion-based routines only ([`pfaffian`],
/// [`mat_mul`]); elimination would need pivoting by magnitude.
impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        1.0 / self
    }
}

/// A dense row-major matrix.
pub type Matrix<F> = Vec<Vec<F>>;

pub fn zeros<F: Field>(rows: usize, cols: usize) -> Matrix<F> {
    vec![vec![F::zero(); cols]; rows]
}

pub fn identity<F: Field>(n: usize) -> Matrix<F> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = F::one();
    }
    m
}

/// Reduce `m` (with `cols` columns) to reduced row echelon form in place and
/// return the pivot columns.
pub fn rref<F: Field>(m: &mut Matrix<F>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv();
        for j in c..cols {
            m[r][j] = m[r][j].mul(&inv);
        }
        for i in 0..m.len() {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let k = m[i][c].clone();
            for j in c..cols {
                let t = k.mul(&m[r][j]);
                m[i][j] = m[i][j].sub(&t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(m: &Matrix<F>, cols: usize) -> usize {
    let mut a = m.clone();
    rref(&mut a, cols).len()
}

/// Basis of `{x : m x = 0}`, one vector per free column.
pub fn nullspace<F: Field>(m: &Matrix<F>, cols: usize) -> Vec<Vec<F>> {
    let mut a = m.clone();
    let pivots = rref(&mut a, cols);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![F::zero(); cols];
        v[free] = F::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = a[r][free].neg();
        }
        out.push(v);
    }
    out
}

/// One solution of `m x = b` (free variables set to zero), or `None` if the
/// system is inconsistent.
pub fn solve<F: Field>(m: &Matrix<F>, cols: usize, b: &[F]) -> Option<Vec<F>> {
    let mut a: Matrix<F> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut a, cols + 1);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![F::zero(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = a[r][cols].clone();
    }
    Some(x)
}

pub fn determinant<F: Field>(m: &Matrix<F>) -> F {
    let n = m.len();
    let mut a = m.clone();
    let mut det = F::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return F::zero();
        };
        if p != c {
            a.swap(p, c);
            det = det.neg();
        }
        det = det.mul(&a[c][c]);
        let inv = a[c][c].inv();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let k = a[i][c].mul(&inv);
            for j in c..n {
                let t = k.mul(&a[c][j]);
                a[i][j] = a[i][j].sub(&t);
            }
        }
    }
    det
}

pub fn inverse<F: Field>(m: &Matrix<F>) -> Option<Matrix<F>> {
    let n = m.len();
    let mut a: Matrix<F> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { F::one() } else { F::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut a, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Pfaffian of an antisymmetric matrix, by expansion along the first row.
/// Odd sizes give zero.
pub fn pfaffian<F: Field>(m: &Matrix<F>) -> F {
    let idx: Vec<usize> = (0..m.len()).collect();
    pf_rec(m, &idx)
}

fn pf_rec<F: Field>(m: &Matrix<F>, idx: &[usize]) -> F {
    match idx.len() {
        0 => return F::one(),
        n if n % 2 == 1 => return F::zero(),
        _ => {}
    }
    let i = idx[0];
    let mut acc = F::zero();
    for (k, &j) in idx.iter().enumerate().skip(1) {
        if m[i][j].is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&t| t != j).collect();
        let term = m[i][j].mul(&pf_rec(m, &rest));
        acc = if k % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

pub fn mat_mul<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(F::zero(), |acc, (x, brow)| acc.add(&x.mul(&brow[j])))
                })
                .collect()
        })
        .collect()
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(r, c, |i, j| rows[i][j])
}

/// Thin singular value decomposition `a = u·diag(s)·vᵀ`, singular values
/// decreasing. One-sided Jacobi: slower than bidiagonalization but accurate
/// to working precision on the small matrices used here.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn new(a: &DMatrix<f64>) -> Self {
        if a.nrows() < a.ncols() {
            let t = Svd::new(&a.transpose());
            return Svd { u: t.v, s: t.s, v: t.u };
        }
        let (m, n) = a.shape();
        let mut w = a.clone();
        let mut v = DMatrix::<f64>::identity(n, n);
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = w.column(p).norm_squared();
                    let beta = w.column(q).norm_squared();
                    let gamma = w.column(p).dot(&w.column(q));
                    if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let sn = c * t;
                    for i in 0..m {
                        let (x, y) = (w[(i, p)], w[(i, q)]);
                        w[(i, p)] = c * x - sn * y;
                        w[(i, q)] = sn * x + c * y;
                    }
                    for i in 0..n {
                        let (x, y) = (v[(i, p)], v[(i, q)]);
                        v[(i, p)] = c * x - sn * y;
                        v[(i, q)] = sn * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
        let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
        let u = DMatrix::from_fn(m, n, |i, k| {
            let j = order[k];
            if norms[j] > 0.0 { w[(i, j)] / norms[j] } else { 0.0 }
        });
        let v = DMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
        Svd { u, s, v }
    }

    /// Number of singular values above `rel_tol` times the largest one.
    pub fn rank(&self, rel_tol: f64) -> usize {
        match self.s.first() {
            Some(&top) if top > 0.0 => self.s.iter().filter(|&&x| x > rel_tol * top).count(),
            _ => 0,
        }
    }
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    Svd::new(m).s
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    Svd::new(m).rank(rel_tol)
}

/// Minimum-norm least-squares solution of `a x = b` and its residual norm.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> (DVector<f64>, f64) {
    let mut x = DVector::zeros(a.ncols());
    if !a.is_empty() {
        let svd = Svd::new(a);
        let r = svd.rank(rel_tol);
        for k in 0..r {
            let c = svd.u.column(k).dot(b) / svd.s[k];
            x += svd.v.column(k) * c;
        }
    }
    let res = (a * &x - b).norm();
    (x, res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn nullspace_of_rank_one() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &m {
                let dot = row.iter().zip(v).fold(q(0), |a, (x, y)| a + x * y);
                assert!(Zero::is_zero(&dot));
            }
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = mat(&[&[1, 1], &[2, 2]]);
        assert_eq!(solve(&m, 2, &[q(1), q(3)]), None);
        assert_eq!(solve(&m, 2, &[q(1), q(2)]), Some(vec![q(1), q(0)]));
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let m = mat(&[&[0, 1, 2, 3], &[-1, 0, 4, 5], &[-2, -4, 0, 6], &[-3, -5, -6, 0]]);
        let pf = pfaffian(&m);
        assert_eq!(pf, q(1 * 6 - 2 * 5 + 3 * 4));
        assert_eq!(&pf * &pf, determinant(&m));
    }

    #[test]
    fn inverse_round_trip() {
        let m = mat(&[&[2, 1], &[7, 4]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(2));
        assert!(inverse(&mat(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn float_rank_and_least_squares() {
        let a = to_dmatrix(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(numerical_rank(&a, 1e-12), 2);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let (x, res) = least_squares(&a, &b, 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn jacobi_svd_reconstructs() {
        // a sphere-chart Jacobian near the pole
        let a = DMatrix::from_row_slice(3, 2, &[-0.0186, 0.8634, 0.0174, -0.5111, 0.0, 0.0024]);
        for m in [a.clone(), a.transpose(), DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0])] {
            let svd = Svd::new(&m);
            let k = svd.s.len();
            let rec = &svd.u * DMatrix::from_diagonal(&DVector::from_vec(svd.s.clone())) * svd.v.columns(0, k).transpose();
            assert!((rec - &m).norm() < 1e-14 * m.norm());
            assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        }
        let r1 = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(numerical_rank(&r1, 1e-10), 1);
        let (x, res) = least_squares(&a, &DVector::from_vec(alloc::vec![0.8634, -0.5111, 0.0024]), 1e-10);
        assert!(res < 1e-14 && (x[0]).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}
