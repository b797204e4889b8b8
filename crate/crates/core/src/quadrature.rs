//! Gauss–Legendre rules and deterministic summation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Quadrature("rule needs at least one node".into()));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n
        let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for it in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
            if it == 99 {
                return Err(Error::Quadrature("Newton iteration did not converge".into()));
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// `P_n(z)` and `P_n'(z)` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A tensor-product rule on an axis-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TensorRule {
    /// `order` points per axis; nodes are enumerated with the last axis
    /// varying fastest.
    pub fn on_box(bounds: &[(f64, f64)], order: usize) -> Result<Self> {
        let (x, w) = gauss_legendre(order)?;
        let mut nodes = vec![Vec::new()];
        let mut weights = vec![1.0];
        for &(lo, hi) in bounds {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Quadrature(alloc::format!("bad parameter interval [{}, {}]", lo, hi)));
            }
            let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
            let mut nn = Vec::with_capacity(nodes.len() * order);
            let mut ww = Vec::with_capacity(nodes.len() * order);
            for (p, pw) in nodes.iter().zip(&weights) {
                for (xi, wi) in x.iter().zip(&w) {
                    let mut q = p.clone();
                    q.push(mid + half * xi);
                    nn.push(q);
                    ww.push(pw * wi * half);
                }
            }
            nodes = nn;
            weights = ww;
        }
        Ok(TensorRule { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Pairwise summation; fixed association order makes results reproducible.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().fold(0.0, |a, b| a + b),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules_match_closed_forms() {
        let (x, w) = gauss_legendre(2).unwrap();
        let r = 1.0 / libm::sqrt(3.0);
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3).unwrap();
        assert_eq!(x[1], 0.0);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((x[2] - libm::sqrt(0.6)).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in [1, 4, 11, 24, 40] {
            let (x, w) = gauss_legendre(n).unwrap();
            assert!((pairwise_sum(&w) - 2.0).abs() < 1e-13);
            for deg in 0..2 * n {
                let terms: Vec<f64> = x.iter().zip(&w).map(|(xi, wi)| wi * libm::pow(*xi, deg as f64)).collect();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((pairwise_sum(&terms) - exact).abs() < 1e-13, "n={} deg={}", n, deg);
            }
        }
    }

    #[test]
    fn box_rule_integrates_product() {
        let rule = TensorRule::on_box(&[(0.0, 1.0), (-1.0, 2.0)], 5).unwrap();
        assert_eq!(rule.len(), 25);
        let terms: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(p, w)| w * p[0] * p[0] * p[1]).collect();
        // ∫0^1 x² dx · ∫-1^2 y dy = 1/3 · 3/2
        assert!((pairwise_sum(&terms) - 0.5).abs() < 1e-14);
        assert!(TensorRule::on_box(&[(1.0, 1.0)], 3).is_err());
        assert!(gauss_legendre(0).is_err());
    }
}
