//! Seeded generators of random polynomial test data.
//!
//! The identity suites draw their inputs from here so that a given seed
//! always produces the same sample, on every platform.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exterior::{Blade, Graded, KForm, KVector, Kind};
use crate::symexpr::{Expr, Monomial, Poly, Rational};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.random_range(lo..=hi_inclusive)
    }

    pub fn int(&mut self, lo: i64, hi_inclusive: i64) -> i64 {
        self.rng.random_range(lo..=hi_inclusive)
    }

    /// A random monomial in `nvars` variables of total degree at most `max_deg`.
    pub fn monomial(&mut self, nvars: usize, max_deg: u32) -> Monomial {
        let deg = self.rng.random_range(0..=max_deg);
        let mut exps = alloc::vec![0u32; nvars];
        for _ in 0..deg {
            let i = self.rng.random_range(0..nvars);
            exps[i] += 1;
        }
        Monomial::from_exponents(exps)
    }

    /// Sparse polynomial: up to three terms, small nonzero integer coefficients.
    pub fn poly(&mut self, nvars: usize, max_deg: u32) -> Expr {
        let n = self.rng.random_range(1..=3);
        let terms: Vec<(Monomial, Rational)> = (0..n)
            .map(|_| {
                let m = self.monomial(nvars, max_deg);
                let mut c = self.rng.random_range(-3i64..=3);
                if c == 0 {
                    c = 1;
                }
                (m, Rational::from_integer(c.into()))
            })
            .collect();
        Expr::from_poly(Poly::from_terms(terms))
    }

    /// Random element of grade `grade` with one to three blade terms.
    pub fn graded<K: Kind>(&mut self, dim: usize, grade: usize, max_deg: u32) -> Graded<K> {
        let mut out = Graded::zero(dim, grade);
        if grade > dim {
            return out;
        }
        let n = self.rng.random_range(1..=3);
        for _ in 0..n {
            let blade = self.blade(dim, grade);
            let c = self.poly(dim, max_deg);
            out = out.add(&Graded::from_terms(dim, grade, [(blade, c)])).expect("same shape");
        }
        out
    }

    pub fn kvector(&mut self, dim: usize, grade: usize, max_deg: u32) -> KVector {
        self.graded(dim, grade, max_deg)
    }

    pub fn kform(&mut self, dim: usize, grade: usize, max_deg: u32) -> KForm {
        self.graded(dim, grade, max_deg)
    }

    /// Uniformly chosen subset of `grade` coordinates.
    pub fn blade(&mut self, dim: usize, grade: usize) -> Blade {
        let mut idx: Vec<usize> = (0..dim).collect();
        for i in 0..grade {
            let j = self.rng.random_range(i..dim);
            idx.swap(i, j);
        }
        Blade::from_indices(&idx[..grade]).expect("distinct").0
    }
}
