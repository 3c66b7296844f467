use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{discretization_bound, empirical_sup_er, two_term_witness, SweepOptions};
use crate::error::{Error, Result};
use crate::experiments::{rate_fit, ExperimentConfig, RateFitReport, RuleFamily};
use crate::fourier::{ClassKind, FrequencyBox, QuasiAlgebraConstant};
use crate::lattice::{korobov_search, worst_case_error, CubatureRule};
use crate::lower_bounds::{fooling_function, power_reduction_witness, shifted_pair};
use crate::seed;

/// First line of every experiment CSV.
pub const CSV_SCHEMA: &str = "# normdisc experiment csv v1";

/// One rule of the sweep. Missing entries are `None` (e.g. no worst-case
/// error for Monte Carlo designs, no fooling function when the nodes
/// over-resolve the box).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub rule_id: String,
    /// `n` for Fibonacci, `a` for Korobov, trial index for Monte Carlo.
    pub param: u64,
    pub m: usize,
    pub q: u32,
    pub kappa_lo: Option<f64>,
    pub kappa_hi: Option<f64>,
    pub bound: Option<f64>,
    pub empirical_sup: f64,
    pub witness_er: Option<f64>,
    pub fooling_integral: Option<f64>,
    /// Certified lower bound from the shifted pair (q = 2) or the power chain (q = 2^s).
    pub pair_lower: Option<f64>,
    pub sandwich_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub quasi_algebra: Option<QuasiAlgebraConstant>,
    pub rows: Vec<ExperimentRow>,
    pub upper_fit: Option<RateFitReport>,
    pub lower_fit: Option<RateFitReport>,
    pub assertions: Vec<Assertion>,
}

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "rule_id",
            "param",
            "m",
            "q",
            "kappa_lo",
            "kappa_hi",
            "bound",
            "empirical_sup",
            "witness_er",
            "fooling_integral",
            "pair_lower",
            "sandwich_ok",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.rule_id.clone(),
                r.param.to_string(),
                r.m.to_string(),
                r.q.to_string(),
                opt(r.kappa_lo),
                opt(r.kappa_hi),
                opt(r.bound),
                format!("{:e}", r.empirical_sup),
                opt(r.witness_er),
                opt(r.fooling_integral),
                opt(r.pair_lower),
                r.sandwich_ok.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn build_rules(cfg: &ExperimentConfig) -> Result<Vec<(u64, CubatureRule)>> {
    let d = cfg.class.d;
    match &cfg.family {
        RuleFamily::Fibonacci { n_min, n_max } => (*n_min..=*n_max)
            .map(|n| Ok((n as u64, CubatureRule::fibonacci(n)?)))
            .collect(),
        RuleFamily::Korobov { m } => m
            .iter()
            .map(|&m| {
                let choice = korobov_search(m, &cfg.class, cfg.precision).map_err(|e| e.in_rule(format!("korobov_m{m}")))?;
                Ok((choice.a, CubatureRule::rank1(&choice.generator)))
            })
            .collect(),
        RuleFamily::MonteCarlo { m, trials } => {
            let mut out = Vec::new();
            for (mi, &m) in m.iter().enumerate() {
                for t in 0..*trials {
                    let s = seed::derive(cfg.seed.wrapping_add(1 + mi as u64), t);
                    out.push((t, CubatureRule::monte_carlo(m, d, s)?));
                }
            }
            Ok(out)
        }
    }
}

/// Runs the sweep described by `cfg`. Output files are not written here; see [`write_outputs`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut spec = cfg.class.clone();
    let quasi = if spec.quasi_algebra_constant.is_some() {
        None
    } else {
        let d = spec.d;
        Some(spec.compute_quasi_algebra_constant(
            &FrequencyBox::tensor(d, cfg.quasi.n_limit),
            &FrequencyBox::tensor(d, cfg.quasi.truncation),
        )?)
    };
    let a = spec.quasi_algebra_constant.expect("set above");
    let rules = build_rules(cfg)?;
    let q = cfg.q;
    let chain_s = (q.is_power_of_two() && q >= 2).then(|| q.trailing_zeros());
    let rows: Vec<ExperimentRow> = rules
        .par_iter()
        .map(|(param, rule)| -> Result<ExperimentRow> {
            let id = rule.id();
            let wrap = |e: Error| e.in_rule(id.clone());
            let lattice = rule.lattice_structure().is_some();
            let (kappa, bound, witness) = if lattice {
                let kappa = worst_case_error(rule, &spec, cfg.precision).map_err(wrap)?;
                let bound = discretization_bound(rule, &spec, q, cfg.precision).map_err(wrap)?;
                let w = two_term_witness(rule, &spec, cfg.witness_limit).map_err(wrap)?;
                let wer = crate::discretization::er_abs(&w.f, rule, q).map_err(wrap)?;
                (Some(kappa), Some(bound.value), Some(wer))
            } else {
                (None, None, None)
            };
            let emp = empirical_sup_er(
                rule,
                &spec,
                q,
                &SweepOptions {
                    n_samples: cfg.n_samples,
                    seed: cfg.seed,
                    sample_box: cfg.sample_box,
                    real_valued: false,
                    witness_limit: cfg.witness_limit,
                },
            )
            .map_err(wrap)?;
            let (fooling_integral, pair_lower) = match (&cfg.fooling_box, spec.kind) {
                (Some(bx), ClassKind::SobolevMixed) => match fooling_function(&rule.points(), &spec, bx) {
                    Ok(cert) => {
                        let lower = match chain_s {
                            Some(1) => Some(shifted_pair(&cert.f, rule, &spec).map_err(wrap)?.certified_er_lower),
                            Some(s) => Some(power_reduction_witness(&cert.f, rule, &spec, s, a).map_err(wrap)?.certified_lq_lower),
                            None => None,
                        };
                        (Some(cert.integral), lower)
                    }
                    Err(Error::TrivialNullspace) => (Some(0.0), Some(0.0)),
                    Err(e) => return Err(wrap(e)),
                },
                _ => (None, None),
            };
            let mut ok = true;
            if let Some(w) = witness {
                ok &= w <= emp.value;
            }
            if let Some(b) = bound {
                ok &= emp.value <= b;
                if let Some(l) = pair_lower {
                    ok &= l <= b;
                }
            }
            Ok(ExperimentRow {
                rule_id: id.clone(),
                param: *param,
                m: rule.len(),
                q,
                kappa_lo: kappa.map(|k| k.lo),
                kappa_hi: kappa.map(|k| k.hi),
                bound,
                empirical_sup: emp.value,
                witness_er: witness,
                fooling_integral,
                pair_lower,
                sandwich_ok: ok,
            })
        })
        .collect::<Result<_>>()?;

    // one point per distinct m (largest value), fitted only when at least four remain
    let envelope = |values: Vec<(f64, f64)>, model| -> Option<RateFitReport> {
        let mut grouped: Vec<(f64, f64)> = Vec::new();
        for (m, v) in values.into_iter().filter(|(_, v)| *v > 0.0) {
            match grouped.iter_mut().find(|(gm, _)| *gm == m) {
                Some(g) => g.1 = g.1.max(v),
                None => grouped.push((m, v)),
            }
        }
        grouped.sort_by(|a, b| a.0.total_cmp(&b.0));
        (grouped.len() >= 4).then(|| rate_fit(&grouped, model).ok()).flatten()
    };
    let upper_pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.bound.map(|b| (r.m as f64, b)))
        .collect();
    let upper_fit = if upper_pairs.is_empty() {
        envelope(rows.iter().map(|r| (r.m as f64, r.empirical_sup)).collect(), cfg.upper_fit)
    } else {
        envelope(upper_pairs, cfg.upper_fit)
    };
    let lower_fit = envelope(
        rows.iter().filter_map(|r| r.witness_er.or(r.pair_lower).map(|w| (r.m as f64, w))).collect(),
        cfg.lower_fit,
    );

    let bad: Vec<&str> = rows.iter().filter(|r| !r.sandwich_ok).map(|r| r.rule_id.as_str()).collect();
    let assertions = vec![Assertion {
        name: "sandwich".into(),
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("witness <= empirical <= bound and lower <= bound in all {} rows", rows.len())
        } else {
            format!("violated for {}", bad.join(", "))
        },
    }];
    Ok(ExperimentReport {
        config: cfg.clone(),
        quasi_algebra: quasi,
        rows,
        upper_fit,
        lower_fit,
        assertions,
    })
}

/// Writes the CSV and JSON outputs named in the config (if any).
pub fn write_outputs(report: &ExperimentReport) -> Result<()> {
    if let Some(p) = &report.config.output.csv {
        std::fs::write(p, report.csv_string()?)?;
    }
    if let Some(p) = &report.config.output.json {
        std::fs::write(p, serde_json::to_string_pretty(report)?)?;
    }
    Ok(())
}
