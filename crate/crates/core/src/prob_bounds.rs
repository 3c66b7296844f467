//! Concentration and entropy bound calculators, and Monte Carlo design
//! experiments for the `L_2` discretization of finite function families.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::discretization::er_abs;
use crate::error::{Error, Result};
use crate::fourier::{ClassSpec, FrequencyBox, TrigPolynomial};
use crate::lattice::CubatureRule;
use crate::seed;

/// Exact mean squared Monte Carlo integration error and its simple bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McMse {
    /// `(||f||_2^2 - |I(f)|^2) / m`.
    pub exact: f64,
    /// `||f||_2^2 / m`.
    pub bound: f64,
}

pub fn mc_mse(f: &TrigPolynomial, m: u64) -> Result<McMse> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let l2 = f.l2_norm_sq();
    let mean = f.mean().norm_sqr();
    Ok(McMse {
        exact: (l2 - mean).max(0.0) / m as f64,
        bound: l2 / m as f64,
    })
}

fn check_positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

/// `2 exp(-m eta^2 / (8 M^2))` before clamping.
pub fn hoeffding_raw(m: u64, eta: f64, big_m: f64) -> f64 {
    2.0 * (-(m as f64) * eta * eta / (8.0 * big_m * big_m)).exp()
}

/// Hoeffding tail bound for `|I(f) - (1/m) sum f(x_j)| >= eta` when `||f||_inf <= M`, clamped to `[0, 1]`.
pub fn hoeffding_tail(m: u64, eta: f64, big_m: f64) -> Result<f64> {
    check_positive(&[("eta", eta), ("M", big_m)])?;
    check_m(m)?;
    Ok(hoeffding_raw(m, eta, big_m).min(1.0))
}

/// Bernstein tail bound `2 exp(-m eta^2 / (2 (M_2^2 + 2 M_inf eta / 3)))`, clamped.
pub fn bernstein_tail(m: u64, eta: f64, m2: f64, m_inf: f64) -> Result<f64> {
    check_positive(&[("eta", eta), ("M_2", m2), ("M_inf", m_inf)])?;
    check_m(m)?;
    let e = m as f64 * eta * eta / (2.0 * (m2 * m2 + 2.0 * m_inf * eta / 3.0));
    Ok((2.0 * (-e).exp()).min(1.0))
}

fn check_m(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    Ok(())
}

/// Union-bound guarantee for a family of `cardinality` functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteClassSuccess {
    /// `max(0, 1 - 2 |W| exp(-m eta^2 / (8 M^2)))`.
    pub success: f64,
    /// `min(1, 2 |W| exp(...))`: bound on the probability that some member fails.
    pub failure: f64,
    /// Smallest `m` making `success` positive.
    pub minimal_m: u64,
}

pub fn finite_class_success(m: u64, eta: f64, big_m: f64, cardinality: u64) -> Result<FiniteClassSuccess> {
    check_positive(&[("eta", eta), ("M", big_m)])?;
    check_m(m)?;
    if cardinality == 0 {
        return Err(Error::invalid("cardinality must be at least 1"));
    }
    let raw = cardinality as f64 * hoeffding_raw(m, eta, big_m);
    // success > 0  <=>  m > 8 M^2 ln(2 |W|) / eta^2
    let threshold = 8.0 * big_m * big_m * (2.0 * cardinality as f64).ln() / (eta * eta);
    let positive = |m: f64| 1.0 - cardinality as f64 * 2.0 * (-m * eta * eta / (8.0 * big_m * big_m)).exp() > 0.0;
    let minimal = least_m(threshold, positive)?;
    Ok(FiniteClassSuccess {
        success: (1.0 - raw).max(0.0),
        failure: raw.min(1.0),
        minimal_m: minimal,
    })
}

/// Shape of the entropy numbers `eps_n`, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum EntropyForm {
    /// `eps_n = c1 n^{-r}`.
    PowerLaw { c1: f64, r: f64 },
    /// `eps_1, ..., eps_N`.
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySequence {
    #[serde(flatten)]
    pub form: EntropyForm,
    /// Uniform bound `||f||_inf <= M` on the class.
    pub big_m: f64,
}

impl EntropySequence {
    pub fn power_law(c1: f64, r: f64, big_m: f64) -> Result<Self> {
        check_positive(&[("C_1", c1), ("r", r), ("M", big_m)])?;
        Ok(EntropySequence {
            form: EntropyForm::PowerLaw { c1, r },
            big_m,
        })
    }

    pub fn explicit(values: Vec<f64>, big_m: f64) -> Result<Self> {
        check_positive(&[("M", big_m)])?;
        if values.is_empty() {
            return Err(Error::invalid("entropy sequence is empty"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("entropy numbers must be positive"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("entropy numbers must be nonincreasing"));
        }
        Ok(EntropySequence {
            form: EntropyForm::Explicit { values },
            big_m,
        })
    }

    /// `eps_n`, or `None` beyond an explicit list.
    pub fn eps(&self, n: u64) -> Option<f64> {
        if n == 0 {
            return None;
        }
        match &self.form {
            EntropyForm::PowerLaw { c1, r } => Some(c1 * (n as f64).powf(-r)),
            EntropyForm::Explicit { values } => values.get(n as usize - 1).copied(),
        }
    }

    fn eps_pow2(&self, j: u32) -> Result<f64> {
        let n = 1u64
            .checked_shl(j)
            .filter(|_| j < 64)
            .ok_or(Error::Overflow("entropy index 2^j"))?;
        self.eps(n).ok_or(Error::EntropyTooShort {
            needed: n,
            available: match &self.form {
                EntropyForm::Explicit { values } => values.len(),
                EntropyForm::PowerLaw { .. } => usize::MAX,
            },
        })
    }
}

/// `J`, `S_J` and the sample size required by the chaining bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bt3Quantities {
    /// Minimal `j >= 0` with `eps_{2^j} <= eta / (8M)`.
    pub j: u32,
    /// `sum_{j=1}^{J} 2^{(j+1)/2} eps_{2^{j-1}}`.
    pub s_j: f64,
    /// Least `m` with `m (eta / S_J)^2 >= 480 M^2` (1 when `S_J = 0`).
    pub required_m: u64,
}

pub fn bt3_quantities(seq: &EntropySequence, eta: f64) -> Result<Bt3Quantities> {
    check_positive(&[("eta", eta)])?;
    let big_m = seq.big_m;
    let target = eta / (8.0 * big_m);
    let mut j = 0u32;
    loop {
        if seq.eps_pow2(j)? <= target {
            break;
        }
        j += 1;
    }
    let mut s = 0.0;
    for i in 1..=j {
        s += 2f64.powf((i as f64 + 1.0) / 2.0) * seq.eps_pow2(i - 1)?;
    }
    let required = if s == 0.0 {
        1
    } else {
        let ratio = (eta / s) * (eta / s);
        least_m(480.0 * big_m * big_m / ratio, |m| m * ratio >= 480.0 * big_m * big_m)?
    };
    Ok(Bt3Quantities {
        j,
        s_j: s,
        required_m: required,
    })
}

/// Above this, `f64` no longer separates consecutive integers.
pub const MAX_EXACT_M: u64 = 1 << 53;

/// Least integer `m >= 1` satisfying `ok`, starting from the estimate `approx`.
/// Fails with `Overflow` past [`MAX_EXACT_M`].
fn least_m(approx: f64, ok: impl Fn(f64) -> bool) -> Result<u64> {
    let overflow = Error::Overflow("required sample size");
    if !(approx.is_finite() && approx < MAX_EXACT_M as f64) {
        return Err(overflow);
    }
    let mut m = (approx.ceil() as u64).max(1);
    while !ok(m as f64) {
        m += 1;
        if m > MAX_EXACT_M {
            return Err(overflow);
        }
    }
    while m > 1 && ok((m - 1) as f64) {
        m -= 1;
    }
    Ok(m)
}

/// Least `m` with `m eta^{1/r} >= C_1`, for entropy decay `n^{-r}`, `r in (0, 1/2)`.
pub fn bc2_required_m(eta: f64, r: f64, c1: f64) -> Result<u64> {
    check_positive(&[("eta", eta), ("C_1", c1)])?;
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::invalid(format!("r must lie in (0, 1/2), got {r}")));
    }
    let p = eta.powf(1.0 / r);
    least_m(c1 / p, |m| m * p >= c1)
}

/// Least `m` with `m (eta / (1 + ln(M/eta)))^2 >= C_1`, for entropy decay `n^{-1/2}`.
pub fn bc1_required_m(eta: f64, big_m: f64, c1: f64) -> Result<u64> {
    check_positive(&[("eta", eta), ("M", big_m), ("C_1", c1)])?;
    let denom = 1.0 + (big_m / eta).ln();
    if denom <= 0.0 {
        return Err(Error::invalid("1 + ln(M/eta) must be positive"));
    }
    let p = (eta / denom) * (eta / denom);
    least_m(c1 / p, |m| m * p >= c1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    Hoeffding,
    Bernstein,
    Union,
    Bt3,
    Bc1,
    Bc2,
}

/// A probability bound together with every parameter that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub kind: TailKind,
    pub m: u64,
    pub eta: f64,
    pub parameters: BTreeMap<String, f64>,
    /// In `[0, 1]`.
    pub bound: f64,
}

/// Constants `C` and `c` in `C exp(-c m (.)^2)`; both default to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainingConstants {
    pub big_c: f64,
    pub small_c: f64,
}

impl Default for ChainingConstants {
    fn default() -> Self {
        ChainingConstants { big_c: 1.0, small_c: 1.0 }
    }
}

fn params(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

impl TailBoundReport {
    pub fn hoeffding(m: u64, eta: f64, big_m: f64) -> Result<Self> {
        Ok(TailBoundReport {
            kind: TailKind::Hoeffding,
            m,
            eta,
            parameters: params(&[("M", big_m)]),
            bound: hoeffding_tail(m, eta, big_m)?,
        })
    }

    pub fn bernstein(m: u64, eta: f64, m2: f64, m_inf: f64) -> Result<Self> {
        Ok(TailBoundReport {
            kind: TailKind::Bernstein,
            m,
            eta,
            parameters: params(&[("M_2", m2), ("M_inf", m_inf)]),
            bound: bernstein_tail(m, eta, m2, m_inf)?,
        })
    }

    pub fn union(m: u64, eta: f64, big_m: f64, cardinality: u64) -> Result<Self> {
        let s = finite_class_success(m, eta, big_m, cardinality)?;
        Ok(TailBoundReport {
            kind: TailKind::Union,
            m,
            eta,
            parameters: params(&[("M", big_m), ("cardinality", cardinality as f64), ("minimal_m", s.minimal_m as f64)]),
            bound: s.failure,
        })
    }

    /// `C exp(-c m (eta/S_J)^2)`; the bound is only asserted when `m >= required_m`,
    /// otherwise 1 is reported.
    pub fn bt3(seq: &EntropySequence, m: u64, eta: f64, k: ChainingConstants) -> Result<Self> {
        let q = bt3_quantities(seq, eta)?;
        let bound = if m >= q.required_m && q.s_j > 0.0 {
            k.big_c * (-k.small_c * m as f64 * (eta / q.s_j).powi(2)).exp()
        } else {
            1.0
        };
        Ok(TailBoundReport {
            kind: TailKind::Bt3,
            m,
            eta,
            parameters: params(&[
                ("M", seq.big_m),
                ("J", q.j as f64),
                ("S_J", q.s_j),
                ("required_m", q.required_m as f64),
                ("C", k.big_c),
                ("c", k.small_c),
            ]),
            bound: bound.clamp(0.0, 1.0),
        })
    }

    pub fn bc1(m: u64, eta: f64, big_m: f64, c1: f64, k: ChainingConstants) -> Result<Self> {
        let required = bc1_required_m(eta, big_m, c1)?;
        let x = eta / (1.0 + (big_m / eta).ln());
        let bound = if m >= required {
            k.big_c * (-k.small_c * m as f64 * x * x).exp()
        } else {
            1.0
        };
        Ok(TailBoundReport {
            kind: TailKind::Bc1,
            m,
            eta,
            parameters: params(&[
                ("M", big_m),
                ("C_1", c1),
                ("required_m", required as f64),
                ("C", k.big_c),
                ("c", k.small_c),
            ]),
            bound: bound.clamp(0.0, 1.0),
        })
    }

    pub fn bc2(m: u64, eta: f64, r: f64, c1: f64, k: ChainingConstants) -> Result<Self> {
        let required = bc2_required_m(eta, r, c1)?;
        let bound = if m >= required {
            k.big_c * (-k.small_c * m as f64 * eta.powf(1.0 / r)).exp()
        } else {
            1.0
        };
        Ok(TailBoundReport {
            kind: TailKind::Bc2,
            m,
            eta,
            parameters: params(&[
                ("r", r),
                ("C_1", c1),
                ("required_m", required as f64),
                ("C", k.big_c),
                ("c", k.small_c),
            ]),
            bound: bound.clamp(0.0, 1.0),
        })
    }
}

/// Size of a greedy sup-norm `eps`-cover of `family`, distances measured on
/// the tensor grid with `grid` points per axis. Balls are closed.
pub fn covering_estimate(family: &[TrigPolynomial], eps: f64, grid: u64) -> Result<usize> {
    if family.is_empty() {
        return Ok(0);
    }
    if !(eps >= 0.0) {
        return Err(Error::invalid("eps must be nonnegative"));
    }
    let d = family[0].dim();
    let nodes = CubatureRule::tensor_grid(grid, d)?;
    let values: Vec<Vec<crate::Complex64>> = family
        .iter()
        .map(|f| nodes.evaluations(f))
        .collect::<Result<_>>()?;
    let dist = |a: &[crate::Complex64], b: &[crate::Complex64]| {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    };
    let mut covered = vec![false; family.len()];
    let mut centers = 0;
    for i in 0..family.len() {
        if covered[i] {
            continue;
        }
        centers += 1;
        for j in i..family.len() {
            if !covered[j] && dist(&values[i], &values[j]) <= eps {
                covered[j] = true;
            }
        }
    }
    Ok(centers)
}

/// Parameters of [`random_design_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomDesignConfig {
    pub spec: ClassSpec,
    #[serde(rename = "box")]
    pub bx: FrequencyBox,
    pub m_list: Vec<u64>,
    pub trials: u64,
    pub family_size: u64,
    pub eta_grid: Vec<f64>,
    pub seed: u64,
}

/// Per-`(m, eta)` comparison of the observed failure frequency with the union bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCell {
    pub eta: f64,
    /// Fraction of trials whose family sup-defect is `>= eta`.
    pub empirical: f64,
    pub exceed_count: u64,
    pub union_prediction: f64,
    pub hoeffding_single: f64,
    /// `P(Bin(trials, prediction) >= exceed_count)`; `None` when the prediction is 1.
    pub p_value: Option<f64>,
    /// False when the count is implausible under the prediction at the 99% level.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomDesignRow {
    pub m: u64,
    pub best: f64,
    pub median: f64,
    pub worst: f64,
    pub tails: Vec<TailCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomDesignReport {
    pub config: RandomDesignConfig,
    /// `max_f ||f||_inf^2` over the family: bounds `|f|^2`, the integrand being sampled.
    pub big_m: f64,
    pub rows: Vec<RandomDesignRow>,
    /// Least-squares slope of `log best` against `log m`; `None` with fewer than two m values.
    pub best_slope: Option<f64>,
    /// Every tail cell passed the binomial consistency check.
    pub consistent: bool,
    /// The family is a finite sample, so the sup-defect per trial is a lower bound
    /// on the sup over the class.
    pub note: String,
}

/// Significance level of the binomial consistency check.
pub const CONSISTENCY_LEVEL: f64 = 0.01;

/// Draws a fixed seeded family of `family_size` real unit-ball functions.
pub fn seeded_family(spec: &ClassSpec, bx: &FrequencyBox, family_size: u64, seed: u64) -> Result<Vec<TrigPolynomial>> {
    (0..family_size)
        .map(|i| spec.sample_with(bx, &mut seed::stream(seed, i), true))
        .collect()
}

pub fn random_design_experiment(cfg: &RandomDesignConfig) -> Result<RandomDesignReport> {
    let family = seeded_family(&cfg.spec, &cfg.bx, cfg.family_size, cfg.seed)?;
    random_design_with_family(cfg, &family)
}

/// [`random_design_experiment`] over a caller-supplied family.
pub fn random_design_with_family(cfg: &RandomDesignConfig, family: &[TrigPolynomial]) -> Result<RandomDesignReport> {
    if cfg.trials == 0 || cfg.m_list.is_empty() || family.is_empty() {
        return Err(Error::invalid("need at least one trial, one m and one family member"));
    }
    if cfg.eta_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::invalid("eta values must be positive"));
    }
    let d = cfg.spec.d;
    let big_m = family
        .iter()
        .map(|f| f.sup_norm_bound().powi(2))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut rows = Vec::with_capacity(cfg.m_list.len());
    for (mi, &m) in cfg.m_list.iter().enumerate() {
        let rule_seed = cfg.seed.wrapping_add(1 + mi as u64);
        let sups: Vec<f64> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let rule = CubatureRule::monte_carlo_with(m, d, &mut seed::stream(rule_seed, t), rule_seed)?;
                family
                    .iter()
                    .map(|f| er_abs(f, &rule, 2))
                    .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)))
            })
            .collect::<Result<_>>()?;
        let mut sorted = sups.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let tails = cfg
            .eta_grid
            .iter()
            .map(|&eta| {
                let count = sups.iter().filter(|&&s| s >= eta).count() as u64;
                let union = (family.len() as f64 * hoeffding_raw(m, eta, big_m)).min(1.0);
                let p_value = if union < 1.0 {
                    Some(upper_tail(cfg.trials, union, count)?)
                } else {
                    None
                };
                Ok(TailCell {
                    eta,
                    empirical: count as f64 / cfg.trials as f64,
                    exceed_count: count,
                    union_prediction: union,
                    hoeffding_single: hoeffding_tail(m, eta, big_m)?,
                    consistent: p_value.is_none_or(|p| p >= CONSISTENCY_LEVEL),
                    p_value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(RandomDesignRow {
            m,
            best: sorted[0],
            median,
            worst: sorted[n - 1],
            tails,
        });
    }
    let best_slope = loglog_slope(&rows.iter().map(|r| (r.m as f64, r.best)).collect::<Vec<_>>());
    let consistent = rows.iter().all(|r| r.tails.iter().all(|c| c.consistent));
    Ok(RandomDesignReport {
        config: cfg.clone(),
        big_m,
        rows,
        best_slope,
        consistent,
        note: "sup-defects are maxima over a finite seeded family: lower bounds on the class supremum".into(),
    })
}

/// `P(X >= k)` for `X ~ Bin(n, p)`.
fn upper_tail(n: u64, p: f64, k: u64) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    let b = Binomial::new(p, n).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(b.sf(k - 1))
}

/// Slope of the least-squares line through `(ln x, ln y)` for positive pairs.
pub fn loglog_slope(pairs: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

impl RandomDesignReport {
    /// One row per `m`: `m,best,median,worst` then `tail@eta,union@eta` per grid value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["m".to_string(), "best".into(), "median".into(), "worst".into()];
        for eta in &self.config.eta_grid {
            header.push(format!("tail@{eta}"));
            header.push(format!("union@{eta}"));
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.m.to_string(), format!("{:e}", r.best), format!("{:e}", r.median), format!("{:e}", r.worst)];
            for c in &r.tails {
                rec.push(format!("{}", c.empirical));
                rec.push(format!("{:e}", c.union_prediction));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MultiIndex;

    #[test]
    fn mse_examples() {
        let one = TrigPolynomial::constant(1, 1.0);
        assert_eq!(mc_mse(&one, 7).unwrap().exact, 0.0);
        let cos = TrigPolynomial::from_coeffs(1, [(MultiIndex::from([1]), 0.5.into()), (MultiIndex::from([-1]), 0.5.into())]).unwrap();
        let r = mc_mse(&cos, 10).unwrap();
        assert!((r.exact - 0.05).abs() < 1e-15);
        assert!((r.bound - 0.05).abs() < 1e-15);
    }

    #[test]
    fn hoeffding_examples() {
        assert!((hoeffding_tail(800, 0.1, 1.0).unwrap() - 2.0 * (-1f64).exp()).abs() < 1e-15);
        assert!((hoeffding_tail(800, 0.1, 1.0).unwrap() - 0.73576).abs() < 1e-5);
        assert_eq!(hoeffding_tail(10, 1e-9, 1.0).unwrap(), 1.0);
        assert!(hoeffding_tail(0, 0.1, 1.0).is_err());
        assert!(hoeffding_tail(5, -0.1, 1.0).is_err());
    }

    #[test]
    fn bernstein_examples() {
        let b = bernstein_tail(1000, 0.1, 1.0, 1.0).unwrap();
        assert!((b - 2.0 * (-4.6875f64).exp()).abs() < 1e-15);
        assert!((b - 0.01840).abs() < 1e-4);
        assert!(bernstein_tail(1000, 0.05, 0.1, 1.0).unwrap() < hoeffding_tail(1000, 0.05, 1.0).unwrap());
    }

    #[test]
    fn union_examples() {
        let s = finite_class_success(800, 0.1, 1.0, 1).unwrap();
        assert!((s.success - (1.0 - 2.0 * (-1f64).exp())).abs() < 1e-15);
        assert!((s.success - 0.26424).abs() < 1e-5);
        // m > 8 ln 2 / 0.01 = 554.5
        assert_eq!(s.minimal_m, 555);
        assert_eq!(finite_class_success(800, 0.1, 1.0, 1_000_000).unwrap().success, 0.0);
        let s = finite_class_success(5000, 0.1, 1.0, 3).unwrap();
        assert!((s.success + s.failure - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bt3_boundary() {
        let seq = EntropySequence::power_law(1.0, 0.25, 1.0).unwrap();
        let eta = 8.0 * 4096f64.powf(-0.25);
        let q = bt3_quantities(&seq, eta).unwrap();
        assert_eq!(q.j, 12);
        // direct summation oracle
        let mut s = 0.0;
        for j in 1..=12 {
            s += 2f64.powf((j as f64 + 1.0) / 2.0) * 2f64.powf(-(j as f64 - 1.0) / 4.0);
        }
        assert!((q.s_j - s).abs() < 1e-12 * s);
        let needed = 480.0 * (s / eta).powi(2);
        assert!(q.required_m as f64 >= needed && (q.required_m - 1) as f64 * (eta / q.s_j).powi(2) < 480.0);
        let doubled = bt3_quantities(&seq, 2.0 * eta).unwrap();
        assert!(doubled.j <= q.j && doubled.s_j <= q.s_j);
    }

    #[test]
    fn bt3_short_list() {
        let seq = EntropySequence::explicit(vec![1.0, 0.5, 0.4, 0.3], 1.0).unwrap();
        assert!(matches!(bt3_quantities(&seq, 0.1), Err(Error::EntropyTooShort { needed: 8, available: 4 })));
        let q = bt3_quantities(&seq, 8.0 * 0.35).unwrap();
        assert_eq!(q.j, 2);
        assert!(EntropySequence::explicit(vec![0.5, 1.0], 1.0).is_err());
        // J = 0: no chaining term
        let q0 = bt3_quantities(&seq, 8.0).unwrap();
        assert_eq!((q0.j, q0.s_j, q0.required_m), (0, 0.0, 1));
    }

    #[test]
    fn bc2_examples() {
        assert_eq!(bc2_required_m(1.0, 0.25, 1.0).unwrap(), 1);
        assert_eq!(bc2_required_m(0.1, 0.25, 100.0).unwrap(), 1_000_000);
        let a = bc2_required_m(0.02, 0.25, 3.0).unwrap() as f64;
        let b = bc2_required_m(0.01, 0.25, 3.0).unwrap() as f64;
        assert!((b / a - 16.0).abs() < 1e-4);
        assert!(bc2_required_m(0.1, 0.5, 1.0).is_err());
        assert!(bc2_required_m(0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn reports_clamp() {
        let seq = EntropySequence::power_law(1.0, 0.25, 1.0).unwrap();
        let rep = TailBoundReport::bt3(&seq, 10, 0.5, ChainingConstants::default()).unwrap();
        assert_eq!(rep.bound, 1.0);
        assert_eq!(rep.parameters["C"], 1.0);
        let rep = TailBoundReport::bc2(10_000_000, 0.1, 0.25, 100.0, ChainingConstants { big_c: 5.0, small_c: 1.0 }).unwrap();
        assert!((0.0..=1.0).contains(&rep.bound));
        let rep = TailBoundReport::bc1(100, 0.5, 1.0, 1.0, ChainingConstants::default()).unwrap();
        assert!((0.0..=1.0).contains(&rep.bound));
        let json = serde_json::to_string(&TailBoundReport::hoeffding(800, 0.1, 1.0).unwrap()).unwrap();
        assert!(json.contains("\"kind\":\"hoeffding\""));
    }

    #[test]
    fn covering_examples() {
        let fam: Vec<TrigPolynomial> = (0..5).map(|i| TrigPolynomial::constant(1, i as f64)).collect();
        assert_eq!(covering_estimate(&fam, 10.0, 8).unwrap(), 1);
        assert_eq!(covering_estimate(&fam, 0.4, 8).unwrap(), 5);
        assert!(covering_estimate(&fam, 1.0, 8).unwrap() >= covering_estimate(&fam, 2.0, 8).unwrap());
    }

    #[test]
    fn constant_family_has_zero_defects() {
        let spec = ClassSpec::sobolev(1.0, 1).unwrap();
        let cfg = RandomDesignConfig {
            spec,
            bx: FrequencyBox::tensor(1, 2),
            m_list: vec![10],
            trials: 1,
            family_size: 1,
            eta_grid: vec![0.1],
            seed: 3,
        };
        let rep = random_design_with_family(&cfg, &[TrigPolynomial::constant(1, 1.0)]).unwrap();
        assert_eq!(rep.rows[0].best, 0.0);
        assert_eq!(rep.rows[0].worst, 0.0);
        assert!(rep.consistent);
    }

    #[test]
    fn experiment_is_reproducible() {
        let cfg = RandomDesignConfig {
            spec: ClassSpec::sobolev(1.0, 1).unwrap(),
            bx: FrequencyBox::tensor(1, 3),
            m_list: vec![16, 64, 256],
            trials: 20,
            family_size: 8,
            eta_grid: vec![0.5, 1.0],
            seed: 11,
        };
        let a = random_design_experiment(&cfg).unwrap();
        let b = random_design_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        assert!(a.best_slope.unwrap() < 0.0);
    }
}
