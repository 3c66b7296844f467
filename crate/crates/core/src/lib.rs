//! Sampling discretization of `L_q` norms (even `q`) for periodic smoothness
//! classes on the `d`-torus.
//!
//! The crate computes the signed defect
//! `||f||_q^q - sum_j lambda_j |f(xi^j)|^q` exactly for trigonometric
//! polynomials, certifies upper bounds through lattice cubature and the
//! quasi-algebra property of the class, and produces matching lower-bound
//! witnesses (two-term functions, fooling functions, shifted pairs).
//!
//! Module map:
//!
//! - [`fourier`]: sparse trigonometric polynomials, the classes `W^r_2` and
//!   `E^r`, quasi-algebra constants.
//! - [`lattice`]: Fibonacci, rank-1 Korobov and Monte Carlo rules; exact
//!   worst-case integration error on the dual lattice.
//! - [`discretization`]: signed defects, the upper-bound assembly and
//!   empirical suprema.
//! - [`prob_bounds`]: concentration and entropy calculators plus random
//!   design experiments.
//! - [`lower_bounds`]: fooling functions, shifted pairs and the power chain.
//! - [`experiments`]: rate fitting and the config-driven runner.
//!
//! All integrals use the normalized measure `dx / (2 pi)^d`.

#![forbid(unsafe_code)]

pub mod discretization;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod lattice;
pub mod lower_bounds;
pub mod prob_bounds;
pub mod seed;
pub mod tol;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use fourier::{ClassKind, ClassSpec, FrequencyBox, MultiIndex, TrigPolynomial};
pub use lattice::{CubatureRule, Rank1Generator};
pub use num_complex::Complex64;

/// A certified enclosure `lo <= value <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || hi.is_nan(), "inverted bracket [{lo}, {hi}]");
        Bracket { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Bracket { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn overlaps(&self, other: &Bracket) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn map_monotone(&self, f: impl Fn(f64) -> f64) -> Bracket {
        Bracket::new(f(self.lo), f(self.hi))
    }
}
