//! Exact symbolic and numeric calculus for Poisson structures on coordinate
//! charts.
//!
//! Everything is built on [`Expr`], an exact rational function over ℚ. The
//! crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod distr;
pub mod error;
pub mod exterior;
pub mod identities;
pub mod leaf;
pub mod linalg;
pub mod poisson;
pub mod quadrature;
pub mod sample;
pub mod symexpr;

pub use distr::{Distribution, Pairing, TestObject};
pub use error::{Error, Result};
pub use exterior::{contract, exterior_derivative, lie_derivative, schouten, wedge, KForm, KVector, VolumeForm};
pub use poisson::{ModularField, PoissonStructure};
pub use symexpr::{Expr, Point, Rational, Vars};
