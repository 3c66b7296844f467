use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regression model for `(m, error)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RateModel {
    /// `log e = -r log m + beta log log m + c`.
    #[default]
    LogPower,
    /// `log e = -r log m + c`.
    Power,
    /// `log e = -r log m + beta log log m + c` with `beta` held fixed.
    FixedBeta { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFitReport {
    pub model: RateModel,
    pub pairs: Vec<(f64, f64)>,
    pub r_hat: f64,
    pub beta_hat: f64,
    pub c_hat: f64,
    /// Root mean square of the log-space residuals.
    pub residual: f64,
}

/// Least-squares fit of `pairs` under `model`. Needs at least four pairs,
/// `m >= 3` and positive errors.
pub fn rate_fit(pairs: &[(f64, f64)], model: RateModel) -> Result<RateFitReport> {
    if pairs.len() < 4 {
        return Err(Error::invalid(format!("rate fit needs at least 4 pairs, got {}", pairs.len())));
    }
    if let Some((m, e)) = pairs.iter().find(|(m, e)| !(*m >= 3.0 && *e > 0.0 && m.is_finite() && e.is_finite())) {
        return Err(Error::invalid(format!("rate fit needs m >= 3 and error > 0, got ({m}, {e})")));
    }
    let n = pairs.len();
    let cols = match model {
        RateModel::LogPower => 3,
        RateModel::Power | RateModel::FixedBeta { .. } => 2,
    };
    let fixed_beta = match model {
        RateModel::FixedBeta { beta } => beta,
        _ => 0.0,
    };
    let mut x = DMatrix::<f64>::zeros(n, cols);
    let mut y = DVector::<f64>::zeros(n);
    for (i, &(m, e)) in pairs.iter().enumerate() {
        let lm = m.ln();
        let llm = lm.ln();
        x[(i, 0)] = -lm;
        x[(i, cols - 1)] = 1.0;
        if cols == 3 {
            x[(i, 1)] = llm;
        }
        y[i] = e.ln() - fixed_beta * llm;
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::DegenerateFit);
    }
    let coef = svd.solve(&y, 0.0).map_err(|_| Error::DegenerateFit)?;
    let resid = &y - &x * &coef;
    let (r_hat, beta_hat, c_hat) = match model {
        RateModel::LogPower => (coef[0], coef[1], coef[2]),
        _ => (coef[0], fixed_beta, coef[1]),
    };
    Ok(RateFitReport {
        model,
        pairs: pairs.to_vec(),
        r_hat,
        beta_hat,
        c_hat,
        residual: (resid.norm_squared() / n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        [10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0].iter().map(|&m| (m, f(m))).collect()
    }

    #[test]
    fn exact_power() {
        let fit = rate_fit(&synth(|m| 1.0 / m), RateModel::LogPower).unwrap();
        assert!((fit.r_hat - 1.0).abs() < 1e-8 && fit.beta_hat.abs() < 1e-8 && fit.residual < 1e-10);
    }

    #[test]
    fn log_power() {
        let fit = rate_fit(&synth(|m| 3.0 * m.powf(-1.5) * m.ln().sqrt()), RateModel::LogPower).unwrap();
        assert!((fit.r_hat - 1.5).abs() < 1e-8);
        assert!((fit.beta_hat - 0.5).abs() < 1e-8);
        assert!((fit.c_hat - 3f64.ln()).abs() < 1e-8);
        let fixed = rate_fit(&synth(|m| m.powf(-2.0) * m.ln()), RateModel::FixedBeta { beta: 1.0 }).unwrap();
        assert!((fixed.r_hat - 2.0).abs() < 1e-10);
        let pure = rate_fit(&synth(|m| m.powf(-0.5)), RateModel::Power).unwrap();
        assert!((pure.r_hat - 0.5).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(rate_fit(&[(10.0, 1.0); 3], RateModel::Power).is_err());
        assert!(matches!(rate_fit(&[(10.0, 1.0); 5], RateModel::LogPower), Err(Error::DegenerateFit)));
        assert!(rate_fit(&[(2.0, 1.0), (10.0, 1.0), (20.0, 1.0), (30.0, 1.0)], RateModel::Power).is_err());
        assert!(rate_fit(&[(5.0, 0.0), (10.0, 1.0), (20.0, 1.0), (30.0, 1.0)], RateModel::Power).is_err());
    }
}
