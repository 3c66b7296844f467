use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{power_sum_1d, power_tail, ClassKind, ClassSpec};
use crate::lattice::dual::for_each_dual_point;
use crate::lattice::CubatureRule;
use crate::Bracket;

/// How [`worst_case_error`] evaluates the dual-lattice sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Precision {
    /// Closed form when the exponent is an even integer, enumeration otherwise.
    Auto { box_limit: u64 },
    /// Enumerate `|k_j| <= box_limit`, bound the rest analytically.
    Enumerate { box_limit: u64 },
    /// Bernoulli-polynomial average over the nodes (even-integer exponents only).
    ClosedForm,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Auto { box_limit: 256 }
    }
}

/// Largest even exponent handled by the closed form.
pub const MAX_CLOSED_FORM_EXPONENT: u32 = 20;

/// Worst-case integration error of an equal-weight lattice rule over the
/// unit ball of `spec`:
/// `sqrt(sum_{k in dual \ 0} F(k)^2)` for `W`, `sum_{k in dual \ 0} F(k)` for `E`.
pub fn worst_case_error(rule: &CubatureRule, spec: &ClassSpec, precision: Precision) -> Result<Bracket> {
    spec.validate()?;
    if rule.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: rule.dim(),
        });
    }
    let alpha = spec.dual_exponent();
    let sum = match precision {
        Precision::ClosedForm => {
            let s = even_exponent(alpha).ok_or_else(|| {
                Error::invalid(format!("closed form needs an even integer exponent, got {alpha}"))
            })?;
            closed_form_sum(rule, s)?
        }
        Precision::Enumerate { box_limit } => enumerated_sum(rule, alpha, box_limit)?,
        Precision::Auto { box_limit } => match even_exponent(alpha) {
            Some(s) if s <= MAX_CLOSED_FORM_EXPONENT => closed_form_sum(rule, s)?,
            _ => enumerated_sum(rule, alpha, box_limit)?,
        },
    };
    Ok(match spec.kind {
        ClassKind::SobolevMixed => sum.map_monotone(f64::sqrt),
        ClassKind::Korobov => sum,
    })
}

fn even_exponent(alpha: f64) -> Option<u32> {
    let a = alpha.round();
    (a == alpha && a >= 2.0 && a as u64 % 2 == 0 && a <= MAX_CLOSED_FORM_EXPONENT as f64).then_some(a as u32)
}

/// `sum_{k in dual, |k_j| <= K, k != 0} prod k_j*^{-alpha}` plus the tail
/// `prod (S_j + T_j) - prod S_j` with `T = 2 K^{1-alpha} / (alpha - 1)`.
pub fn enumerated_sum(rule: &CubatureRule, alpha: f64, box_limit: u64) -> Result<Bracket> {
    let (m, gens) = rule
        .lattice_structure()
        .ok_or_else(|| Error::NotLattice(rule.id()))?;
    if box_limit == 0 {
        return Err(Error::invalid("box_limit must be at least 1"));
    }
    let d = rule.dim();
    let table: Vec<f64> = (0..=box_limit).map(|k| (k.max(1) as f64).powf(-alpha)).collect();
    let mut acc = Neumaier::default();
    for_each_dual_point(m, gens, d, box_limit, |k| {
        if k.iter().any(|&c| c != 0) {
            acc.add(k.iter().map(|&c| table[c.unsigned_abs() as usize]).product());
        }
    });
    let lo = acc.total();
    let s = power_sum_1d(alpha, box_limit);
    let t = 2.0 * power_tail(alpha, box_limit);
    let tail = (s + t).powi(d as i32) - s.powi(d as i32);
    // the enumerated part is summed in round-to-nearest; pad by its accumulated error
    let slack = lo * 4.0 * f64::EPSILON;
    Ok(Bracket::new((lo - slack).max(0.0), lo + slack + tail * (1.0 + 4.0 * f64::EPSILON)))
}

/// `(1/N) sum_{x in nodes} prod_l S(x_l) - 1` with
/// `S(x) = 1 + (-1)^{s+1} (2 pi)^{2s} B_{2s}(x) / (2s)!` (here `alpha = 2s`).
pub fn closed_form_sum(rule: &CubatureRule, alpha: u32) -> Result<Bracket> {
    let (m, _) = rule
        .lattice_structure()
        .ok_or_else(|| Error::NotLattice(rule.id()))?;
    let crate::lattice::Nodes::Rational { numerators, .. } = rule.nodes() else {
        return Err(Error::NotLattice(rule.id()));
    };
    if alpha % 2 != 0 || alpha == 0 || alpha > MAX_CLOSED_FORM_EXPONENT {
        return Err(Error::invalid(format!("unsupported closed-form exponent {alpha}")));
    }
    let s1d = periodic_zeta(alpha);
    // tabulate S on the m grid points
    let table: Vec<f64> = (0..m).map(|j| s1d.eval(j as f64 / m as f64)).collect();
    let smax = table.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut acc = Neumaier::default();
    for p in numerators {
        acc.add(p.iter().map(|&v| table[v as usize]).product());
    }
    let avg = acc.total() / numerators.len() as f64;
    let value = avg - 1.0;
    let d = rule.dim() as i32;
    // first-order error of each product of d tabulated values, then the final subtraction
    let term_err = d as f64 * (s1d.abs_err * smax.powi(d - 1) + f64::EPSILON * smax.powi(d));
    let err = 2.0 * (term_err + 2.0 * f64::EPSILON * (avg.abs() + 1.0));
    Ok(Bracket::new((value - err).max(0.0), value + err))
}

/// `S(x) = sum_{k in Z} max(|k|,1)^{-alpha} e^{2 pi i k x}` for even `alpha`.
pub(crate) struct PeriodicZeta {
    /// Monomial coefficients of `S` on `[0, 1)`.
    coeffs: Vec<f64>,
    /// Bound on the evaluation error for `x` in `[0, 1)`.
    abs_err: f64,
}

impl PeriodicZeta {
    pub(crate) fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

pub(crate) fn periodic_zeta(alpha: u32) -> PeriodicZeta {
    let n = alpha as usize;
    let s = alpha / 2;
    let bern = bernoulli_numbers(n);
    let mut binom = vec![1.0f64; n + 1];
    for k in 1..=n {
        binom[k] = binom[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
    let scale = sign * std::f64::consts::TAU.powi(n as i32) / fact;
    // B_n(x) = sum_k C(n,k) B_k x^{n-k}
    let mut coeffs = vec![0.0; n + 1];
    for (k, b) in bern.iter().enumerate() {
        coeffs[n - k] = scale * binom[k] * b;
    }
    coeffs[0] += 1.0;
    let magnitude: f64 = coeffs.iter().map(|c| c.abs()).sum();
    PeriodicZeta {
        abs_err: (n as f64 + 2.0) * f64::EPSILON * magnitude,
        coeffs,
    }
}

/// `B_0..B_n` with `B_1 = -1/2`.
fn bernoulli_numbers(n: usize) -> Vec<f64> {
    let mut b = vec![0.0f64; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        // sum_{k=0}^{m} C(m+1, k) B_k = 0
        let mut c = 1.0f64;
        let mut s = 0.0;
        for (k, bk) in b.iter().enumerate().take(m) {
            s += c * bk;
            c = c * (m + 1 - k) as f64 / (k + 1) as f64;
        }
        b[m] = -s / (m + 1) as f64;
    }
    b
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Rank1Generator;
    use std::f64::consts::PI;

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_numbers(8);
        let expected = [1.0, -0.5, 1.0 / 6.0, 0.0, -1.0 / 30.0, 0.0, 1.0 / 42.0, 0.0, -1.0 / 30.0];
        for (a, e) in b.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_zeta_oracle() {
        // S(x) = 1 + 2 sum cos(2 pi k x) / k^alpha, truncated far out
        for alpha in [2u32, 4, 6] {
            let s = periodic_zeta(alpha);
            for x in [0.0, 0.1, 0.25, 0.5, 0.77] {
                let mut direct = 1.0;
                for k in (1..200_000).rev() {
                    direct += 2.0 * (2.0 * PI * k as f64 * x).cos() / (k as f64).powi(alpha as i32);
                }
                let tol = if alpha == 2 { 2e-5 } else { 1e-12 };
                assert!((s.eval(x) - direct).abs() < tol, "alpha {alpha} x {x}: {} vs {direct}", s.eval(x));
            }
        }
        let s2 = periodic_zeta(2);
        assert!((s2.eval(0.3) - (1.0 + 2.0 * PI * PI * (0.09 - 0.3 + 1.0 / 6.0))).abs() < 1e-14);
    }

    #[test]
    fn single_node_zeta() {
        let one = CubatureRule::rank1(&Rank1Generator::new(1, vec![0]).unwrap());
        let spec = ClassSpec::sobolev(1.0, 1).unwrap();
        let exact = (PI * PI / 3.0).sqrt();
        let cf = worst_case_error(&one, &spec, Precision::ClosedForm).unwrap();
        assert!(cf.contains(exact) || (cf.lo - exact).abs() < 1e-14, "{cf:?}");
        assert!((1.8137..1.8139).contains(&exact));
        let en = worst_case_error(&one, &spec, Precision::Enumerate { box_limit: 100_000 }).unwrap();
        assert!(en.contains(exact), "{en:?}");
        assert!(en.width() < 1e-4);
    }

    #[test]
    fn enumeration_agrees_with_closed_form() {
        let rule = CubatureRule::rank1(&Rank1Generator::new(5, vec![1, 3]).unwrap());
        for spec in [
            ClassSpec::sobolev(1.0, 2).unwrap(),
            ClassSpec::sobolev(2.0, 2).unwrap(),
            ClassSpec::korobov(2.0, 2).unwrap(),
        ] {
            let cf = worst_case_error(&rule, &spec, Precision::ClosedForm).unwrap();
            let en = worst_case_error(&rule, &spec, Precision::Enumerate { box_limit: 400 }).unwrap();
            assert!(en.lo <= cf.hi && cf.lo <= en.hi, "{spec:?}: {cf:?} vs {en:?}");
        }
    }

    #[test]
    fn tensor_grid_closed_form() {
        // dual of the n-grid is n Z^d: sum = (1 + 2 zeta(2)/n^2)^2 - 1 for alpha = 2
        let grid = CubatureRule::tensor_grid(4, 2).unwrap();
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        let k = worst_case_error(&grid, &spec, Precision::ClosedForm).unwrap();
        let one = 1.0 + 2.0 * PI * PI / 6.0 / 16.0;
        let exact = (one * one - 1.0).sqrt();
        assert!((k.lo - exact).abs() < 1e-12 && (k.hi - exact).abs() < 1e-12);
    }

    #[test]
    fn non_lattice_rejected() {
        let mc = CubatureRule::monte_carlo(10, 2, 1).unwrap();
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        assert!(matches!(worst_case_error(&mc, &spec, Precision::default()), Err(Error::NotLattice(_))));
    }

    #[test]
    fn odd_exponent_uses_enumeration() {
        let rule = CubatureRule::fibonacci(8).unwrap();
        let spec = ClassSpec::korobov(1.5, 2).unwrap();
        let k = worst_case_error(&rule, &spec, Precision::Auto { box_limit: 300 }).unwrap();
        assert!(k.lo > 0.0 && k.hi > k.lo);
        assert!(worst_case_error(&rule, &spec, Precision::ClosedForm).is_err());
    }

    #[test]
    fn neumaier_compensates() {
        let mut acc = Neumaier::default();
        for x in [1e16, 1.0, -1e16] {
            acc.add(x);
        }
        assert_eq!(acc.total(), 1.0);
    }
}
