//! Lower-bound constructions: fooling functions that vanish on a node set,
//! shifted pairs `(f +- 1)/2`, and the power chain `c_k (f^{2^k} +- 1)` for
//! `q = 2^s`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discretization::signed_defect;
use crate::error::{Error, Result};
use crate::fourier::{ClassKind, ClassSpec, FrequencyBox, MultiIndex, TrigPolynomial};
use crate::lattice::CubatureRule;
use crate::{tol, Complex64};

/// Relative rank cutoff for the constraint factorization.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Slack allowed in class-membership checks.
pub const MEMBERSHIP_SLACK: f64 = 1e-10;

/// A real unit-ball function vanishing on `points` with maximal mean, plus
/// everything needed to re-verify it independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoolingCertificate {
    pub f: TrigPolynomial,
    pub points: Vec<Vec<f64>>,
    /// `I(f) = f^(0) >= 0`.
    pub integral: f64,
    /// `max_j |f(xi^j)|`.
    pub residuals: f64,
    pub class_norm_value: f64,
    #[serde(rename = "box")]
    pub bx: FrequencyBox,
    /// Real parameters of the box (one per frequency after tying `k` with `-k`).
    pub parameters: usize,
    /// Numerical rank of the node constraints.
    pub rank: usize,
}

/// Positive half of a symmetric box: the zero frequency is handled separately.
fn positive_frequencies(bx: &FrequencyBox) -> Vec<MultiIndex> {
    bx.points().into_iter().filter(MultiIndex::is_positive).collect()
}

/// Maximizes `f^(0)` over real `f` supported on `bx` with `||f||_W <= 1` and
/// `f(xi^j) = 0`.
///
/// In the scaled coordinates `p_0 = f^(0)`, `p = sqrt 2 (Re, Im) f^(k) / F(k)`
/// for positive `k`, the class norm is the Euclidean norm and the node
/// conditions are linear, so the maximizer is the normalized projection of
/// `e_0` onto the null space of the constraint matrix.
pub fn fooling_function(points: &[Vec<f64>], spec: &ClassSpec, bx: &FrequencyBox) -> Result<FoolingCertificate> {
    spec.validate()?;
    if spec.kind != ClassKind::SobolevMixed {
        return Err(Error::invalid("fooling functions are built for the W class (ellipsoid constraint)"));
    }
    if bx.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: bx.dim(),
        });
    }
    if let Some(p) = points.iter().find(|p| p.len() != spec.d) {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: p.len(),
        });
    }
    if !bx.contains(&MultiIndex::zero(spec.d)) {
        return Err(Error::EmptyBox);
    }
    let freqs = positive_frequencies(bx);
    let n = 1 + 2 * freqs.len();
    let weights: Vec<f64> = freqs
        .iter()
        .map(|k| std::f64::consts::SQRT_2 * spec.kernel_coeff(k).expect("dimension checked"))
        .collect();
    let m = points.len();
    let mut a = DMatrix::<f64>::zeros(m, n);
    for (j, x) in points.iter().enumerate() {
        a[(j, 0)] = 1.0;
        for (i, (k, w)) in freqs.iter().zip(&weights).enumerate() {
            let phase: f64 = k.components().iter().zip(x).map(|(&kk, &xx)| kk as f64 * xx).sum();
            a[(j, 1 + 2 * i)] = w * phase.cos();
            a[(j, 2 + 2 * i)] = -w * phase.sin();
        }
    }
    let mut p = DVector::<f64>::zeros(n);
    p[0] = 1.0;
    let mut rank = 0;
    if m > 0 {
        let svd = a.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > RANK_TOLERANCE * smax {
                rank += 1;
                let v = v_t.row(i).transpose();
                let c = v.dot(&p);
                p.axpy(-c, &v, 1.0);
            }
        }
        // one re-orthogonalization pass keeps the residuals at rounding level
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > RANK_TOLERANCE * smax {
                let v = v_t.row(i).transpose();
                let c = v.dot(&p);
                p.axpy(-c, &v, 1.0);
            }
        }
    }
    let norm = p.norm();
    if norm <= RANK_TOLERANCE.sqrt() * 1e-2 || rank >= n {
        return Err(Error::TrivialNullspace);
    }
    p /= norm;
    let mut coeffs = vec![(MultiIndex::zero(spec.d), Complex64::new(p[0], 0.0))];
    for (i, (k, w)) in freqs.iter().zip(&weights).enumerate() {
        // f^(k) = F(k) (p_a + i p_b) / sqrt 2 = w (p_a + i p_b) / 2
        let c = Complex64::new(p[1 + 2 * i], p[2 + 2 * i]) * (w / 2.0);
        coeffs.push((k.clone(), c));
        coeffs.push((k.neg(), c.conj()));
    }
    let f = TrigPolynomial::from_coeffs(spec.d, coeffs)?;
    let residuals = points
        .iter()
        .map(|x| f.evaluate(x).map(|v| v.norm()))
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))?;
    Ok(FoolingCertificate {
        integral: f.mean().re,
        class_norm_value: spec.class_norm(&f)?,
        residuals,
        f,
        points: points.to_vec(),
        bx: *bx,
        parameters: n,
        rank,
    })
}

/// The fooling integral, or 0 when only `f = 0` vanishes on the nodes.
pub fn kappa_lower(points: &[Vec<f64>], spec: &ClassSpec, bx: &FrequencyBox) -> Result<f64> {
    match fooling_function(points, spec, bx) {
        Ok(c) => Ok(c.integral),
        Err(Error::TrivialNullspace) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// The pair `(f + 1)/2`, `(f - 1)/2` and their signed `L_2` defects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub f_plus: TrigPolynomial,
    pub f_minus: TrigPolynomial,
    pub defect_plus: f64,
    pub defect_minus: f64,
    pub integral: f64,
    pub cubature: f64,
    /// `|I(f) - Lambda(f)| / 2`.
    pub certified_er_lower: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
}

impl WitnessPair {
    pub fn max_abs_defect(&self) -> f64 {
        self.defect_plus.abs().max(self.defect_minus.abs())
    }
}

fn check_real(f: &TrigPolynomial) -> Result<()> {
    let defect = f.conjugate_symmetry_defect();
    if defect > tol::abs() {
        return Err(Error::NotReal(defect));
    }
    Ok(())
}

fn check_weights(rule: &CubatureRule) -> Result<()> {
    let s = rule.weight_sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::WeightsNotNormalized(s));
    }
    Ok(())
}

fn check_member(spec: &ClassSpec, g: &TrigPolynomial, context: &str) -> Result<f64> {
    let norm = spec.class_norm(g)?;
    if norm > 1.0 + MEMBERSHIP_SLACK {
        return Err(Error::MembershipViolation {
            norm,
            limit: 1.0,
            context: context.to_string(),
        });
    }
    Ok(norm)
}

/// Builds the shifted pair for a real unit-ball `f`. The signed defects satisfy
/// `defect_plus - defect_minus = I(f) - Lambda(f)`, so one of them is at least
/// half the integration error in absolute value.
pub fn shifted_pair(f: &TrigPolynomial, rule: &CubatureRule, spec: &ClassSpec) -> Result<WitnessPair> {
    check_real(f)?;
    check_weights(rule)?;
    check_member(spec, f, "input function")?;
    let f_plus = f.shift(1.0).scale(0.5);
    let f_minus = f.shift(-1.0).scale(0.5);
    let norm_plus = check_member(spec, &f_plus, "(f + 1)/2")?;
    let norm_minus = check_member(spec, &f_minus, "(f - 1)/2")?;
    let integral = f.mean().re;
    let cubature = rule.apply(f)?.re;
    Ok(WitnessPair {
        defect_plus: signed_defect(&f_plus, rule, 2)?,
        defect_minus: signed_defect(&f_minus, rule, 2)?,
        certified_er_lower: (integral - cubature).abs() / 2.0,
        f_plus,
        f_minus,
        integral,
        cubature,
        norm_plus,
        norm_minus,
    })
}

/// Stage `k` of the power chain: members `c_k (f^{2^k} +- 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStage {
    pub k: u32,
    pub c_k: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
    /// `I(g) - Lambda(g)` for `g = f^{2^k}`.
    pub integration_error: f64,
    /// Signed `L_2` defects of the two members.
    pub defect2_plus: f64,
    pub defect2_minus: f64,
    /// Signed `L_q` defects (`q = 2^s`) of the two members.
    pub defect_q_plus: f64,
    pub defect_q_minus: f64,
    /// `2 c_k^2 |I(g) - Lambda(g)|`; at most `max |defect2|`.
    pub stage_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerChain {
    pub s: u32,
    pub q: u32,
    pub a: f64,
    pub stages: Vec<ChainStage>,
    /// `c(s) = c_0 ... c_{s-1}`.
    pub c_s: f64,
    /// `c(s) |I(f) - Lambda(f)|`; for `s = 1` this is the shifted-pair bound.
    pub certified_lq_lower: f64,
    /// Largest `|L_q defect|` over all chain members.
    pub witnessed_lq: f64,
}

/// Constructs the chain for a real unit-ball `f` and `q = 2^s`, with
/// `c_k = 1 / (1 + a^{2^k - 1})`. Every member is checked for class membership.
pub fn power_reduction_witness(
    f: &TrigPolynomial,
    rule: &CubatureRule,
    spec: &ClassSpec,
    s: u32,
    a: f64,
) -> Result<PowerChain> {
    if s == 0 || s > 5 {
        return Err(Error::invalid("chain length s must be in 1..=5"));
    }
    if !(a >= 1.0 && a.is_finite()) {
        return Err(Error::invalid(format!("quasi-algebra constant must be >= 1, got {a}")));
    }
    check_real(f)?;
    check_weights(rule)?;
    check_member(spec, f, "input function")?;
    let q = 1u32 << s;
    let mut stages = Vec::with_capacity(s as usize);
    let mut g = f.clone();
    let mut c_s = 1.0;
    for k in 0..s {
        if k > 0 {
            g = g.pointwise_product(&g)?;
        }
        let c_k = 1.0 / (1.0 + a.powi((1i32 << k) - 1));
        c_s *= c_k;
        let plus = g.shift(1.0).scale(c_k);
        let minus = g.shift(-1.0).scale(c_k);
        let norm_plus = check_member(spec, &plus, &format!("c_{k} (f^{} + 1)", 1u32 << k))?;
        let norm_minus = check_member(spec, &minus, &format!("c_{k} (f^{} - 1)", 1u32 << k))?;
        let err = g.mean().re - rule.apply(&g)?.re;
        stages.push(ChainStage {
            k,
            c_k,
            norm_plus,
            norm_minus,
            integration_error: err,
            defect2_plus: signed_defect(&plus, rule, 2)?,
            defect2_minus: signed_defect(&minus, rule, 2)?,
            defect_q_plus: signed_defect(&plus, rule, q)?,
            defect_q_minus: signed_defect(&minus, rule, q)?,
            stage_bound: 2.0 * c_k * c_k * err.abs(),
        });
    }
    let witnessed_lq = stages
        .iter()
        .map(|st| st.defect_q_plus.abs().max(st.defect_q_minus.abs()))
        .fold(0.0, f64::max);
    Ok(PowerChain {
        s,
        q,
        a,
        certified_lq_lower: c_s * stages[0].integration_error.abs(),
        c_s,
        stages,
        witnessed_lq,
    })
}
