//! Signed and absolute discretization errors of `L_q` norms, the
//! quasi-algebra upper bound and per-rule extremal witnesses.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{check_even, ClassKind, ClassSpec, FrequencyBox, MultiIndex, TrigPolynomial};
use crate::lattice::{in_dual, worst_case_error, CubatureRule, Precision};
use crate::{seed, Bracket, Complex64};

/// `||f||_q^q - sum_j lambda_j |f(xi^j)|^q` for even `q`.
///
/// The norm comes from coefficient algebra; the cubature side from direct
/// evaluation at the nodes. Both are computed on a fixed representative of
/// `{f, conj f}`, so the result is bitwise invariant under conjugation.
pub fn signed_defect(f: &TrigPolynomial, rule: &CubatureRule, q: u32) -> Result<f64> {
    check_even(q)?;
    let g = f.conj();
    let f = if precedes(&g, f) { &g } else { f };
    let norm = f.lq_norm_q(q)?;
    let values = rule.evaluations(f)?;
    let half = (q / 2) as i32;
    let cub = rule.weighted_sum(values.into_iter().map(|v| Complex64::new(v.norm_sqr().powi(half), 0.0)));
    Ok(norm - cub.re)
}

fn precedes(a: &TrigPolynomial, b: &TrigPolynomial) -> bool {
    fn key(p: &TrigPolynomial) -> impl Iterator<Item = (&MultiIndex, u64, u64)> {
        p.coeffs().iter().map(|(k, c)| (k, c.re.to_bits(), c.im.to_bits()))
    }
    key(a).lt(key(b))
}

/// The same defect computed fully in coefficient space: `Lambda` applied to
/// the polynomial `|f|^q`.
pub fn signed_defect_algebraic(f: &TrigPolynomial, rule: &CubatureRule, q: u32) -> Result<f64> {
    let p = f.abs_pow(q)?;
    Ok(p.mean().re - rule.apply(&p)?.re)
}

/// `|signed_defect|`.
pub fn er_abs(f: &TrigPolynomial, rule: &CubatureRule, q: u32) -> Result<f64> {
    signed_defect(f, rule, q).map(f64::abs)
}

/// One evaluated defect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRecord {
    pub f_id: String,
    pub rule_id: String,
    pub class: String,
    pub q: u32,
    pub m: usize,
    pub signed_defect: f64,
    pub er_abs: f64,
}

impl DefectRecord {
    pub fn evaluate(
        f_id: impl Into<String>,
        f: &TrigPolynomial,
        rule: &CubatureRule,
        spec: &ClassSpec,
        q: u32,
    ) -> Result<Self> {
        let signed = signed_defect(f, rule, q).map_err(|e| e.in_rule(rule.id()))?;
        Ok(DefectRecord {
            f_id: f_id.into(),
            rule_id: rule.id(),
            class: spec.id(),
            q,
            m: rule.len(),
            signed_defect: signed,
            er_abs: signed.abs(),
        })
    }
}

/// Writes `rule_id,class,q,m,signed_defect,er_abs` rows.
pub fn write_defect_csv<W: Write>(records: &[DefectRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rule_id", "class", "q", "m", "signed_defect", "er_abs"])?;
    for r in records {
        w.write_record([
            r.rule_id.clone(),
            r.class.clone(),
            r.q.to_string(),
            r.m.to_string(),
            format!("{:e}", r.signed_defect),
            format!("{:e}", r.er_abs),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Upper bound `C(a, q) kappa` on `sup_f er(f, xi, Lambda, L_q)` over the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationBound {
    pub value: f64,
    pub quasi_algebra_constant: f64,
    /// `C(a, q) = a^{q-1}`.
    pub constant: f64,
    pub kappa: Bracket,
    pub q: u32,
}

/// `a^{q-1} * worst_case_error(rule, spec).hi`.
///
/// `|f|^q` is a product of `q` unit-ball factors (`f` and `conj f` alternating);
/// reducing them pairwise costs one factor `a` per product.
pub fn discretization_bound(
    rule: &CubatureRule,
    spec: &ClassSpec,
    q: u32,
    precision: Precision,
) -> Result<DiscretizationBound> {
    check_even(q)?;
    let a = spec
        .quasi_algebra_constant
        .ok_or(Error::MissingQuasiAlgebraConstant)?;
    let kappa = worst_case_error(rule, spec, precision).map_err(|e| e.in_rule(rule.id()))?;
    let constant = a.powi(q as i32 - 1);
    Ok(DiscretizationBound {
        value: constant * kappa.hi,
        quasi_algebra_constant: a,
        constant,
        kappa,
        q,
    })
}

/// A two-term function `c_0 + c_k e^{i(k,x)}` on the boundary of the unit ball
/// whose cross term is integrated with the wrong sign by the rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTermWitness {
    pub f: TrigPolynomial,
    pub k_star: MultiIndex,
    pub kernel_at_k_star: f64,
    /// `er(f, xi, L_2)`: `F(k*)` for `W`, `2 F(k*)` for `E`.
    pub er: f64,
    /// True when `k*` is proved to maximize `F` over the whole nonzero dual lattice.
    pub certified: bool,
}

/// Searches growing boxes `|k_j| <= K` (up to `max_limit`) for the nonzero dual
/// point with the largest kernel value. The search stops once
/// `(K+1)^{-r}` falls below the best value found, which certifies the maximum.
pub fn two_term_witness(rule: &CubatureRule, spec: &ClassSpec, max_limit: u64) -> Result<TwoTermWitness> {
    spec.validate()?;
    let (m, gens) = rule
        .lattice_structure()
        .ok_or_else(|| Error::NotLattice(rule.id()))?;
    if rule.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: rule.dim(),
        });
    }
    let d = spec.d;
    let mut best: Option<(f64, Vec<i64>)> = None;
    let mut limit = 1u64;
    let mut certified = false;
    loop {
        let cap = limit.min(max_limit.max(1));
        crate::lattice::dual::for_each_dual_point(m, gens, d, cap, |k| {
            if k.iter().all(|&c| c == 0) {
                return;
            }
            let w: f64 = k.iter().map(|&c| crate::fourier::kernel_1d(spec.r, c)).product();
            let replace = match &best {
                None => true,
                Some((bw, bk)) => w > *bw || (w == *bw && k > bk.as_slice()),
            };
            if replace {
                best = Some((w, k.to_vec()));
            }
        });
        if let Some((w, _)) = &best {
            if *w > ((cap + 1) as f64).powf(-spec.r) {
                certified = true;
                break;
            }
        }
        if cap >= max_limit {
            break;
        }
        limit = cap.saturating_mul(2);
    }
    debug_assert!(best.as_ref().is_none_or(|(_, k)| in_dual(m, gens, k)));
    let (w, k) = best.ok_or(Error::NoDualPoint(max_limit))?;
    let k_star = MultiIndex::new(k);
    let (c0, ck) = match spec.kind {
        ClassKind::SobolevMixed => (std::f64::consts::FRAC_1_SQRT_2, w * std::f64::consts::FRAC_1_SQRT_2),
        ClassKind::Korobov => (1.0, w),
    };
    let f = TrigPolynomial::from_coeffs(
        d,
        [(MultiIndex::zero(d), Complex64::new(c0, 0.0)), (k_star.clone(), Complex64::new(ck, 0.0))],
    )?;
    Ok(TwoTermWitness {
        f,
        k_star,
        kernel_at_k_star: w,
        er: 2.0 * c0 * ck,
        certified,
    })
}

/// Largest observed `er_abs` with the index of the sample that attained it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSup {
    pub value: f64,
    /// `None` when the witness (or nothing) attained the maximum.
    pub argmax_sample: Option<u64>,
    pub witness_er: Option<f64>,
    pub n_samples: u64,
}

/// Options for [`empirical_sup_er`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub n_samples: u64,
    pub seed: u64,
    /// Support of the random samples.
    pub sample_box: FrequencyBox,
    pub real_valued: bool,
    /// Search cap for the two-term witness (lattice rules only).
    pub witness_limit: u64,
}

/// `max er_abs` over `n_samples` random unit-ball functions and the two-term
/// witness. Sample `i` is drawn from stream `(seed, i)`, so runs with more
/// samples extend runs with fewer.
pub fn empirical_sup_er(rule: &CubatureRule, spec: &ClassSpec, q: u32, opts: &SweepOptions) -> Result<EmpiricalSup> {
    check_even(q)?;
    let witness_er = if rule.lattice_structure().is_some() {
        let w = two_term_witness(rule, spec, opts.witness_limit)?;
        Some(er_abs(&w.f, rule, q)?)
    } else {
        None
    };
    let errs: Vec<f64> = (0..opts.n_samples)
        .into_par_iter()
        .map(|i| {
            let f = spec.sample_with(&opts.sample_box, &mut seed::stream(opts.seed, i), opts.real_valued)?;
            er_abs(&f, rule, q)
        })
        .collect::<Result<_>>()?;
    let mut value = witness_er.unwrap_or(0.0);
    let mut argmax = None;
    for (i, e) in errs.into_iter().enumerate() {
        if e > value {
            value = e;
            argmax = Some(i as u64);
        }
    }
    Ok(EmpiricalSup {
        value,
        argmax_sample: argmax,
        witness_er,
        n_samples: opts.n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Rank1Generator;

    fn rule5() -> CubatureRule {
        CubatureRule::rank1(&Rank1Generator::new(5, vec![1, 3]).unwrap())
    }

    #[test]
    fn constant_has_zero_defect() {
        let one = TrigPolynomial::constant(2, 1.0);
        for q in [2, 4, 6] {
            assert_eq!(signed_defect(&one, &rule5(), q).unwrap(), 0.0);
        }
        assert!(matches!(signed_defect(&one, &rule5(), 3), Err(Error::UnsupportedExponent(3))));
    }

    #[test]
    fn cross_term() {
        let a = Complex64::new(0.7, -0.2);
        let b = Complex64::new(-0.3, 0.5);
        let f = TrigPolynomial::from_coeffs(2, [(MultiIndex::from([0, 0]), a), (MultiIndex::from([2, 1]), b)]).unwrap();
        let expected = -2.0 * (a.conj() * b).re;
        let got = signed_defect(&f, &rule5(), 2).unwrap();
        assert!((got - expected).abs() < 1e-14);
        // brute force from node values
        let rule = rule5();
        let cub: f64 = rule.points().iter().map(|x| f.evaluate(x).unwrap().norm_sqr()).sum::<f64>() / 5.0;
        assert!((a.norm_sqr() + b.norm_sqr() - cub - expected).abs() < 1e-14);
    }

    #[test]
    fn evaluation_and_algebra_agree() {
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        let rule = CubatureRule::fibonacci(7).unwrap();
        for s in 0..5 {
            let f = spec.random_unit_ball_sample(&FrequencyBox::tensor(2, 3), s, s % 2 == 0).unwrap();
            for q in [2, 4] {
                let a = signed_defect(&f, &rule, q).unwrap();
                let b = signed_defect_algebraic(&f, &rule, q).unwrap();
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-3), "q={q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn witness_m5() {
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        let w = two_term_witness(&rule5(), &spec, 64).unwrap();
        assert!(w.certified);
        assert_eq!(w.kernel_at_k_star, 0.5);
        assert_eq!(w.k_star, MultiIndex::from([2, 1]));
        assert!((spec.class_norm(&w.f).unwrap() - 1.0).abs() < 1e-12);
        assert!((er_abs(&w.f, &rule5(), 2).unwrap() - 0.5).abs() < 1e-14);
        assert!((signed_defect(&w.f, &rule5(), 2).unwrap() + 0.5).abs() < 1e-14);

        let e = ClassSpec::korobov(2.0, 2).unwrap();
        let we = two_term_witness(&rule5(), &e, 64).unwrap();
        assert!((e.class_norm(&we.f).unwrap() - 1.0).abs() < 1e-12);
        assert!((we.er - 0.5).abs() < 1e-15);
        assert!((er_abs(&we.f, &rule5(), 2).unwrap() - we.er).abs() < 1e-14);
    }

    #[test]
    fn witness_requires_lattice() {
        let mc = CubatureRule::monte_carlo(5, 2, 0).unwrap();
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        assert!(matches!(two_term_witness(&mc, &spec, 8), Err(Error::NotLattice(_))));
        let grid = CubatureRule::tensor_grid(9, 2).unwrap();
        assert!(matches!(two_term_witness(&grid, &spec, 4), Err(Error::NoDualPoint(4))));
        let w = two_term_witness(&grid, &spec, 64).unwrap();
        assert!((w.er - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn bound_requires_constant() {
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        assert!(matches!(
            discretization_bound(&rule5(), &spec, 2, Precision::ClosedForm),
            Err(Error::MissingQuasiAlgebraConstant)
        ));
        let spec = spec.with_quasi_algebra_constant(2.0);
        let b2 = discretization_bound(&rule5(), &spec, 2, Precision::ClosedForm).unwrap();
        let b4 = discretization_bound(&rule5(), &spec, 4, Precision::ClosedForm).unwrap();
        assert!((b2.value - 2.0 * b2.kappa.hi).abs() < 1e-15);
        assert!((b4.value - 4.0 * b2.value).abs() < 1e-14);
    }

    #[test]
    fn sweep_is_nested_and_reproducible() {
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        let rule = CubatureRule::fibonacci(6).unwrap();
        let opts = |n| SweepOptions {
            n_samples: n,
            seed: 9,
            sample_box: FrequencyBox::tensor(2, 6),
            real_valued: false,
            witness_limit: 64,
        };
        let zero = empirical_sup_er(&rule, &spec, 2, &opts(0)).unwrap();
        assert_eq!(Some(zero.value), zero.witness_er);
        let mut prev = zero.value;
        for n in [5, 20, 60] {
            let s = empirical_sup_er(&rule, &spec, 2, &opts(n)).unwrap();
            assert!(s.value >= prev);
            assert_eq!(s, empirical_sup_er(&rule, &spec, 2, &opts(n)).unwrap());
            prev = s.value;
        }
    }

    #[test]
    fn csv_layout() {
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        let rec = DefectRecord::evaluate("one", &TrigPolynomial::constant(2, 1.0), &rule5(), &spec, 2).unwrap();
        let mut buf = Vec::new();
        write_defect_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "rule_id,class,q,m,signed_defect,er_abs\nrank1_m5_z1-3,W1_d2,2,5,0e0,0e0\n");
    }
}
