//! Certified estimates of the quasi-algebra constant.
//!
//! For `W^r_2` the relevant quantity at frequency `n` is
//! `sqrt(sum_k |F(k) F(n-k)|^2) / F(n)`; for `E^r` the unsquared
//! `sum_k F(k) F(n-k) / F(n)`. Both truncated sums are lower bounds that grow
//! with the truncation box; the product structure of `F` yields an analytic
//! upper bound alongside.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::class::{kernel_1d, kernel_product, power_tail};
use super::{ClassKind, ClassSpec, FrequencyBox, MultiIndex};
use crate::error::{Error, Result};
use crate::Bracket;

/// Result of a sweep of the ratio over a set of frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiAlgebraConstant {
    /// Max of the truncated (lower) ratios; the constant `a` used downstream.
    pub value: f64,
    /// Max of the certified upper ratios over the swept range.
    pub upper: f64,
    pub argmax: MultiIndex,
    pub n_range: FrequencyBox,
    pub truncation: FrequencyBox,
}

fn term(kind: ClassKind, r: f64, k: i64, n: i64) -> f64 {
    let p = kernel_1d(r, k) * kernel_1d(r, n - k);
    match kind {
        ClassKind::SobolevMixed => p * p,
        ClassKind::Korobov => p,
    }
}

/// One-dimensional `sum_{|k| <= limit} term(k, n)`.
fn partial_1d(kind: ClassKind, r: f64, n: i64, limit: u64) -> f64 {
    let l = limit as i64;
    // accumulate from the far ends inward so small terms are added first
    let mut s = 0.0;
    let mut lo = -l;
    let mut hi = l;
    while lo < hi {
        s += term(kind, r, lo, n) + term(kind, r, hi, n);
        lo += 1;
        hi -= 1;
    }
    if lo == hi {
        s += term(kind, r, lo, n);
    }
    s
}

/// Upper bound on `sum_{|k| > limit} term(k, n)`, valid for `limit >= max(2|n|, 1)`.
fn tail_1d(kind: ClassKind, r: f64, limit: u64) -> f64 {
    match kind {
        // |n - k| >= |k|/2 on the tail, so term <= 2^{2r} |k|^{-4r}
        ClassKind::SobolevMixed => 2f64.powf(2.0 * r + 1.0) * power_tail(4.0 * r, limit),
        ClassKind::Korobov => 2f64.powf(r + 1.0) * power_tail(2.0 * r, limit),
    }
}

fn full_upper_1d(kind: ClassKind, r: f64, n: i64, base: u64) -> f64 {
    let limit = base.max(2 * n.unsigned_abs()).max(1);
    partial_1d(kind, r, n, limit) + tail_1d(kind, r, limit)
}

fn finish(kind: ClassKind, sum: f64, kernel_n: f64) -> f64 {
    match kind {
        ClassKind::SobolevMixed => sum.sqrt() / kernel_n,
        ClassKind::Korobov => sum / kernel_n,
    }
}

fn check_inputs(spec: &ClassSpec, bx: &FrequencyBox) -> Result<()> {
    spec.validate()?;
    if bx.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: bx.dim(),
        });
    }
    if bx.is_empty() {
        return Err(Error::EmptyBox);
    }
    Ok(())
}

/// The ratio at `n`, truncated to `truncation` (`lo`) together with a certified
/// upper bound on the untruncated ratio (`hi`).
pub fn quasi_algebra_ratio(
    spec: &ClassSpec,
    n: &MultiIndex,
    truncation: &FrequencyBox,
) -> Result<Bracket> {
    check_inputs(spec, truncation)?;
    n.check_dim(spec.d)?;
    let (kind, r) = (spec.kind, spec.r);
    let kernel_n = kernel_product(r, n);
    let lo_sum = match *truncation {
        FrequencyBox::Tensor { limit, .. } => n
            .components()
            .iter()
            .map(|&nj| partial_1d(kind, r, nj, limit))
            .product(),
        FrequencyBox::HyperbolicCross { .. } => truncation
            .points()
            .iter()
            .map(|k| {
                k.components()
                    .iter()
                    .zip(n.components())
                    .map(|(&kj, &nj)| term(kind, r, kj, nj))
                    .product::<f64>()
            })
            .sum(),
    };
    let base = truncation.coordinate_extent();
    let hi_sum: f64 = n
        .components()
        .iter()
        .map(|&nj| full_upper_1d(kind, r, nj, base))
        .product();
    Ok(Bracket::new(
        finish(kind, lo_sum, kernel_n),
        finish(kind, hi_sum, kernel_n),
    ))
}

/// Sweeps [`quasi_algebra_ratio`] over `n_range` and returns the maximum.
pub fn quasi_algebra_constant(
    spec: &ClassSpec,
    n_range: &FrequencyBox,
    truncation: &FrequencyBox,
) -> Result<QuasiAlgebraConstant> {
    check_inputs(spec, truncation)?;
    if n_range.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: n_range.dim(),
        });
    }
    let points = n_range.points();
    if points.is_empty() {
        return Err(Error::EmptyBox);
    }
    let (kind, r) = (spec.kind, spec.r);
    let base = truncation.coordinate_extent();
    let mut cache: HashMap<i64, (f64, f64)> = HashMap::new();
    let mut best: Option<(f64, f64, MultiIndex)> = None;
    let mut upper: f64 = 0.0;
    for n in points {
        let bracket = match *truncation {
            FrequencyBox::Tensor { limit, .. } => {
                let (mut lo, mut hi) = (1.0, 1.0);
                for &nj in n.components() {
                    let (s, u) = *cache
                        .entry(nj)
                        .or_insert_with(|| (partial_1d(kind, r, nj, limit), full_upper_1d(kind, r, nj, base)));
                    lo *= s;
                    hi *= u;
                }
                let kn = kernel_product(r, &n);
                Bracket::new(finish(kind, lo, kn), finish(kind, hi, kn))
            }
            FrequencyBox::HyperbolicCross { .. } => quasi_algebra_ratio(spec, &n, truncation)?,
        };
        upper = upper.max(bracket.hi);
        if best.as_ref().is_none_or(|(v, _, _)| bracket.lo > *v) {
            best = Some((bracket.lo, bracket.hi, n));
        }
    }
    let (value, _, argmax) = best.expect("nonempty range");
    Ok(QuasiAlgebraConstant {
        value,
        upper,
        argmax,
        n_range: *n_range,
        truncation: *truncation,
    })
}

impl ClassSpec {
    /// Runs [`quasi_algebra_constant`] and caches its value on the spec.
    pub fn compute_quasi_algebra_constant(
        &mut self,
        n_range: &FrequencyBox,
        truncation: &FrequencyBox,
    ) -> Result<QuasiAlgebraConstant> {
        let qa = quasi_algebra_constant(self, n_range, truncation)?;
        self.quasi_algebra_constant = Some(qa.value);
        Ok(qa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn brute_ratio(spec: &ClassSpec, n: &MultiIndex, limit: u64) -> f64 {
        let mut s = 0.0;
        for k in FrequencyBox::tensor(spec.d, limit).points() {
            let p = spec.kernel_coeff(&k).unwrap() * spec.kernel_coeff(&n.sub(&k)).unwrap();
            s += match spec.kind {
                ClassKind::SobolevMixed => p * p,
                ClassKind::Korobov => p,
            };
        }
        finish(spec.kind, s, spec.kernel_coeff(n).unwrap())
    }

    #[test]
    fn ratio_at_zero_matches_zeta_limit() {
        let w = ClassSpec::sobolev(1.0, 1).unwrap();
        let b = quasi_algebra_ratio(&w, &MultiIndex::from([0]), &FrequencyBox::tensor(1, 1_000_000)).unwrap();
        let limit = (1.0 + PI.powi(4) / 45.0).sqrt();
        assert!((b.lo - limit).abs() < 1e-9, "{} vs {limit}", b.lo);
        assert!(b.lo <= limit && limit <= b.hi);
        assert!((b.lo - 1.778_945).abs() < 1e-5);
    }

    #[test]
    fn ratio_matches_brute_force_enumeration() {
        for spec in [ClassSpec::sobolev(1.0, 2).unwrap(), ClassSpec::korobov(2.0, 2).unwrap()] {
            for n in [[0, 0], [2, -1], [5, 3]] {
                let n = MultiIndex::from(n);
                let got = quasi_algebra_ratio(&spec, &n, &FrequencyBox::tensor(2, 30)).unwrap();
                let want = brute_ratio(&spec, &n, 30);
                assert!((got.lo - want).abs() <= 1e-12 * want, "{n:?}");
                assert!(got.hi >= got.lo);
            }
        }
    }

    #[test]
    fn upper_bound_dominates_large_truncations() {
        let w = ClassSpec::sobolev(0.8, 1).unwrap();
        for n in [0i64, 3, 17] {
            let n = MultiIndex::from([n]);
            let small = quasi_algebra_ratio(&w, &n, &FrequencyBox::tensor(1, 40)).unwrap();
            let big = quasi_algebra_ratio(&w, &n, &FrequencyBox::tensor(1, 200_000)).unwrap();
            assert!(small.lo <= big.lo);
            assert!(big.lo <= small.hi);
            assert!(big.hi <= small.hi + 1e-12);
        }
    }

    #[test]
    fn hyperbolic_truncation_is_enumerated() {
        let w = ClassSpec::sobolev(1.0, 2).unwrap();
        let n = MultiIndex::from([1, 2]);
        let hc = quasi_algebra_ratio(&w, &n, &FrequencyBox::hyperbolic(2, 50)).unwrap();
        let tb = quasi_algebra_ratio(&w, &n, &FrequencyBox::tensor(2, 50)).unwrap();
        assert!(hc.lo <= tb.lo);
        assert!(tb.lo <= hc.hi);
    }

    #[test]
    fn sweep_is_monotone_in_truncation_and_caches() {
        let mut w = ClassSpec::sobolev(1.0, 1).unwrap();
        let range = FrequencyBox::tensor(1, 64);
        let a = quasi_algebra_constant(&w, &range, &FrequencyBox::tensor(1, 200)).unwrap();
        let b = w.compute_quasi_algebra_constant(&range, &FrequencyBox::tensor(1, 2000)).unwrap();
        assert!(a.value <= b.value);
        assert_eq!(w.quasi_algebra_constant, Some(b.value));
        assert_eq!(b.argmax.max_abs(), 64);
        let e = ClassSpec::korobov(2.0, 2).unwrap();
        let k = quasi_algebra_constant(&e, &FrequencyBox::tensor(2, 8), &FrequencyBox::tensor(2, 100)).unwrap();
        assert!(k.value.is_finite() && k.value > 1.0 && k.upper >= k.value);
    }
}
