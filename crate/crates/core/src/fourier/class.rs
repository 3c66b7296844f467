use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{FrequencyBox, MultiIndex, TrigPolynomial};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    /// Mixed-smoothness Sobolev ball `W^r_2`: `sum_k |c_k / F_r(k)|^2 <= 1`.
    SobolevMixed,
    /// Korobov class `E^r`: `|c_k| <= F_r(k)` for every `k`.
    Korobov,
}

impl ClassKind {
    pub fn label(self) -> &'static str {
        match self {
            ClassKind::SobolevMixed => "W",
            ClassKind::Korobov => "E",
        }
    }
}

/// A smoothness class on the `d`-torus together with its product kernel
/// `F_r(k) = prod_j max(|k_j|, 1)^{-r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub kind: ClassKind,
    pub r: f64,
    pub d: usize,
    #[serde(default, skip_serializing)]
    pub quasi_algebra_constant: Option<f64>,
}

impl ClassSpec {
    pub fn new(kind: ClassKind, r: f64, d: usize) -> Result<Self> {
        let spec = ClassSpec {
            kind,
            r,
            d,
            quasi_algebra_constant: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sobolev(r: f64, d: usize) -> Result<Self> {
        Self::new(ClassKind::SobolevMixed, r, d)
    }

    pub fn korobov(r: f64, d: usize) -> Result<Self> {
        Self::new(ClassKind::Korobov, r, d)
    }

    /// Checks `d >= 1` and the smoothness range (`r > 1/2` for `W`, `r > 1` for `E`).
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let min = match self.kind {
            ClassKind::SobolevMixed => 0.5,
            ClassKind::Korobov => 1.0,
        };
        if !(self.r.is_finite() && self.r > min) {
            return Err(Error::invalid(format!(
                "smoothness r = {} must exceed {min} for class {}",
                self.r,
                self.kind.label()
            )));
        }
        Ok(())
    }

    pub fn with_quasi_algebra_constant(mut self, a: f64) -> Self {
        self.quasi_algebra_constant = Some(a);
        self
    }

    /// Short identifier such as `W1_d2` or `E2_d3`.
    pub fn id(&self) -> String {
        format!("{}{}_d{}", self.kind.label(), self.r, self.d)
    }

    /// Exponent of the one-dimensional weight `k^{-alpha}` summed by the
    /// worst-case error: `2r` for `W` (squared kernel), `r` for `E`.
    pub fn dual_exponent(&self) -> f64 {
        match self.kind {
            ClassKind::SobolevMixed => 2.0 * self.r,
            ClassKind::Korobov => self.r,
        }
    }

    pub fn kernel_coeff(&self, k: &MultiIndex) -> Result<f64> {
        k.check_dim(self.d)?;
        Ok(kernel_product(self.r, k))
    }

    /// `sqrt(sum |c_k / F(k)|^2)` for `W`; `max |c_k| / F(k)` for `E` (at most 1 iff `f` is in `E^r`).
    pub fn class_norm(&self, f: &TrigPolynomial) -> Result<f64> {
        if f.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: f.dim(),
            });
        }
        let ratios = f.coeffs().iter().map(|(k, c)| c.norm() / kernel_product(self.r, k));
        Ok(match self.kind {
            ClassKind::SobolevMixed => ratios.map(|x| x * x).sum::<f64>().sqrt(),
            ClassKind::Korobov => ratios.fold(0.0, f64::max),
        })
    }

    /// A random element on the boundary of the unit ball, supported on `bx`.
    ///
    /// Draws standard complex Gaussian `phi(k)` (tied by `phi(-k) = conj(phi(k))`
    /// when `real_valued`), normalizes it to class norm 1 and returns
    /// `c_k = F(k) phi(k)`.
    pub fn random_unit_ball_sample(
        &self,
        bx: &FrequencyBox,
        seed: u64,
        real_valued: bool,
    ) -> Result<TrigPolynomial> {
        self.sample_with(bx, &mut seed::rng(seed), real_valued)
    }

    pub fn sample_with(
        &self,
        bx: &FrequencyBox,
        rng: &mut seed::Rng,
        real_valued: bool,
    ) -> Result<TrigPolynomial> {
        if bx.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: bx.dim(),
            });
        }
        let points = bx.points();
        if points.is_empty() {
            return Err(Error::EmptyBox);
        }
        let mut phi: Vec<(MultiIndex, Complex64)> = Vec::with_capacity(points.len());
        for k in points {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            if !real_valued {
                phi.push((k, Complex64::new(re, im)));
            } else if k.is_zero() {
                phi.push((k, Complex64::new(re, 0.0)));
            } else if k.is_positive() {
                let z = Complex64::new(re, im);
                phi.push((k.neg(), z.conj()));
                phi.push((k, z));
            }
        }
        let scale = match self.kind {
            ClassKind::SobolevMixed => phi.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt(),
            ClassKind::Korobov => phi.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max),
        };
        if scale == 0.0 {
            return Err(Error::EmptyBox);
        }
        let r = self.r;
        TrigPolynomial::from_coeffs(
            self.d,
            phi.into_iter()
                .map(|(k, z)| {
                    let w = kernel_product(r, &k);
                    (k, z * (w / scale))
                }),
        )
    }
}

/// `max(|k|, 1)^{-r}` in one dimension.
pub fn kernel_1d(r: f64, k: i64) -> f64 {
    (k.unsigned_abs().max(1) as f64).powf(-r)
}

pub(crate) fn kernel_product(r: f64, k: &MultiIndex) -> f64 {
    k.components().iter().map(|&c| kernel_1d(r, c)).product()
}

/// Upper bound on `sum_{k > K} k^{-p}` (integral comparison), `p > 1`, `K >= 1`.
pub fn power_tail(p: f64, limit: u64) -> f64 {
    debug_assert!(p > 1.0 && limit >= 1);
    (limit as f64).powf(1.0 - p) / (p - 1.0)
}

/// `sum_{|k| <= K} max(|k|,1)^{-p}` in one dimension.
pub fn power_sum_1d(p: f64, limit: u64) -> f64 {
    // small terms first
    let mut s = 0.0;
    for k in (1..=limit).rev() {
        s += 2.0 * (k as f64).powf(-p);
    }
    s + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        let w = ClassSpec::sobolev(1.0, 2).unwrap();
        assert_eq!(w.kernel_coeff(&MultiIndex::from([0, 0])).unwrap(), 1.0);
        assert_eq!(w.kernel_coeff(&MultiIndex::from([2, 1])).unwrap(), 0.5);
        assert!(w.kernel_coeff(&MultiIndex::from([1])).is_err());
        let w1 = ClassSpec::sobolev(0.75, 1).unwrap();
        assert!((w1.kernel_coeff(&MultiIndex::from([16])).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn kernel_tensorizes() {
        let spec = ClassSpec::sobolev(1.3, 3).unwrap();
        for k in FrequencyBox::tensor(3, 3).points() {
            let prod: f64 = k.components().iter().map(|&c| kernel_1d(1.3, c)).product();
            assert_eq!(spec.kernel_coeff(&k).unwrap(), prod);
        }
    }

    #[test]
    fn smoothness_ranges() {
        assert!(ClassSpec::sobolev(0.5, 1).is_err());
        assert!(ClassSpec::sobolev(0.51, 1).is_ok());
        assert!(ClassSpec::korobov(1.0, 2).is_err());
        assert!(ClassSpec::korobov(1.5, 0).is_err());
    }

    #[test]
    fn class_norm_examples() {
        let one = TrigPolynomial::constant(1, 1.0);
        let w = ClassSpec::sobolev(1.0, 1).unwrap();
        let e = ClassSpec::korobov(2.0, 1).unwrap();
        assert_eq!(w.class_norm(&one).unwrap(), 1.0);
        assert_eq!(e.class_norm(&one).unwrap(), 1.0);
        let f = TrigPolynomial::monomial(MultiIndex::from([2]), 0.25);
        assert!((w.class_norm(&f).unwrap() - 0.5).abs() < 1e-15);
        // extremal element of E^r
        let ext = TrigPolynomial::from_coeffs(
            1,
            FrequencyBox::tensor(1, 5)
                .points()
                .into_iter()
                .map(|k| {
                    let c = e.kernel_coeff(&k).unwrap();
                    (k, Complex64::new(c, 0.0))
                }),
        )
        .unwrap();
        assert!((e.class_norm(&ext).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn samples_are_normalized_real_and_reproducible() {
        let bx = FrequencyBox::tensor(2, 3);
        for spec in [ClassSpec::sobolev(1.0, 2).unwrap(), ClassSpec::korobov(2.0, 2).unwrap()] {
            let f = spec.random_unit_ball_sample(&bx, 7, true).unwrap();
            assert!((spec.class_norm(&f).unwrap() - 1.0).abs() < 1e-12);
            assert!(f.is_real());
            assert_eq!(f, spec.random_unit_ball_sample(&bx, 7, true).unwrap());
            assert_ne!(f, spec.random_unit_ball_sample(&bx, 8, true).unwrap());
            let g = spec.random_unit_ball_sample(&bx, 7, false).unwrap();
            assert!((spec.class_norm(&g).unwrap() - 1.0).abs() < 1e-12);
        }
        let w = ClassSpec::sobolev(1.0, 2).unwrap();
        assert!(matches!(
            w.random_unit_ball_sample(&FrequencyBox::hyperbolic(2, 0), 1, true),
            Err(Error::EmptyBox)
        ));
    }

    #[test]
    fn tails_bound_partial_sums() {
        let p = 2.0;
        let exact = std::f64::consts::PI.powi(2) / 6.0;
        for limit in [1u64, 5, 50] {
            let partial: f64 = (1..=limit).map(|k| (k as f64).powf(-p)).sum();
            assert!(exact - partial <= power_tail(p, limit));
            assert!((power_sum_1d(p, limit) - (1.0 + 2.0 * partial)).abs() < 1e-12);
        }
    }
}
