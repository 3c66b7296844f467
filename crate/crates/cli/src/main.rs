use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use normdisc::discretization::{discretization_bound, two_term_witness, DefectRecord};
use normdisc::experiments::{rate_fit, run_experiment, write_outputs, ExperimentConfig, RateModel};
use normdisc::lattice::{korobov_search, worst_case_error, Precision, RuleJson};
use normdisc::lower_bounds::fooling_function;
use normdisc::prob_bounds::{random_design_experiment, RandomDesignConfig};
use normdisc::{ClassKind, ClassSpec, CubatureRule, FrequencyBox, Rank1Generator, TrigPolynomial};

#[derive(Parser)]
#[command(name = "normdisc", version, about = "Sampling discretization of L_q norms on the torus")]
struct Cli {
    /// Seed for every random draw (overrides seeds in config files).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or evaluate cubature rules.
    #[command(subcommand)]
    Rule(RuleCmd),
    /// Discretization errors and upper bounds.
    #[command(subcommand)]
    Er(ErCmd),
    /// Two-term witness for a lattice rule.
    Witness {
        #[arg(long)]
        rule: PathBuf,
        #[command(flatten)]
        class: ClassArgs,
        /// Largest coordinate searched for dual lattice points.
        #[arg(long, default_value_t = 1 << 16)]
        limit: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fooling function vanishing on the nodes of a rule.
    Fool {
        #[arg(long)]
        rule: PathBuf,
        #[command(flatten)]
        class: ClassArgs,
        /// Frequency box |k_j| <= box_limit.
        #[arg(long)]
        box_limit: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random design experiment from a JSON config.
    McExperiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Fit log e = -r log m + beta log log m + c to a CSV of `m,error` rows.
    RateFit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::LogPower)]
        model: ModelArg,
        /// Fixed log power for `--model fixed-beta`.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Config-driven sweep writing CSV and JSON reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RuleCmd {
    /// Construct a rule and print its JSON description.
    Build {
        #[arg(long, value_enum)]
        kind: RuleKind,
        /// Fibonacci index or tensor grid points per axis.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        /// Rank-1 generator, comma separated.
        #[arg(long, value_delimiter = ',')]
        z: Option<Vec<u64>>,
        #[arg(long)]
        d: Option<usize>,
        /// Class used by the Korobov search.
        #[command(flatten)]
        class: OptClassArgs,
        /// Also list the nodes.
        #[arg(long)]
        with_nodes: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case error interval of a lattice rule.
    Quality {
        #[arg(long)]
        rule: PathBuf,
        #[command(flatten)]
        class: ClassArgs,
        #[command(flatten)]
        precision: PrecisionArgs,
    },
}

#[derive(Subcommand)]
enum ErCmd {
    /// Signed and absolute defect of a polynomial on a rule.
    Eval {
        #[arg(long)]
        rule: PathBuf,
        /// Polynomial JSON (`{"d":..,"coeffs":[[k..., re, im], ...]}`).
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Upper bound a^{q-1} kappa for a lattice rule.
    Bound {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[command(flatten)]
        class: ClassArgs,
        /// Use this quasi-algebra constant instead of computing it.
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, default_value_t = 64)]
        n_limit: u64,
        #[arg(long, default_value_t = 1024)]
        truncation: u64,
        #[command(flatten)]
        precision: PrecisionArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleKind {
    Fibonacci,
    Rank1,
    Korobov,
    TensorGrid,
    MonteCarlo,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    #[value(name = "W", alias = "w")]
    W,
    #[value(name = "E", alias = "e")]
    E,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    LogPower,
    Power,
    FixedBeta,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Enumerate,
    ClosedForm,
}

#[derive(Args)]
struct ClassArgs {
    #[arg(long, value_enum, default_value_t = ClassArg::W)]
    class: ClassArg,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
}

#[derive(Args)]
struct OptClassArgs {
    #[arg(long, value_enum)]
    class: Option<ClassArg>,
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct PrecisionArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long, default_value_t = 256)]
    box_limit: u64,
}

impl ClassArgs {
    fn spec(&self, d: usize) -> Result<ClassSpec> {
        let kind = match self.class {
            ClassArg::W => ClassKind::SobolevMixed,
            ClassArg::E => ClassKind::Korobov,
        };
        Ok(ClassSpec::new(kind, self.r, d)?)
    }
}

impl PrecisionArgs {
    fn precision(&self) -> Precision {
        match self.method {
            MethodArg::Auto => Precision::Auto { box_limit: self.box_limit },
            MethodArg::Enumerate => Precision::Enumerate { box_limit: self.box_limit },
            MethodArg::ClosedForm => Precision::ClosedForm,
        }
    }
}

fn load_rule(path: &Path) -> Result<CubatureRule> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let j: RuleJson = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(CubatureRule::from_json(&j)?)
}

fn emit<T: serde::Serialize + ?Sized>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => print_stdout(&(text + "\n"))?,
    }
    Ok(())
}

/// Writes to stdout, treating a closed pipe as a normal end of output.
fn print_stdout(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

/// Runs the command; `Ok(false)` means a hard assertion failed.
fn execute(cli: Cli) -> Result<bool> {
    let seed = cli.seed;
    match cli.command {
        Command::Rule(RuleCmd::Build {
            kind,
            n,
            m,
            z,
            d,
            class,
            with_nodes,
            out,
        }) => {
            let need = |v: Option<u64>, name: &str| v.with_context(|| format!("--{name} is required for this rule kind"));
            let rule = match kind {
                RuleKind::Fibonacci => CubatureRule::fibonacci(u32::try_from(need(n, "n")?)?)?,
                RuleKind::Rank1 => {
                    let z = z.context("--z is required for rank1 rules")?;
                    CubatureRule::rank1(&Rank1Generator::new(need(m, "m")?, z)?)
                }
                RuleKind::Korobov => {
                    let args = ClassArgs {
                        class: class.class.unwrap_or(ClassArg::W),
                        r: class.r.unwrap_or(1.0),
                    };
                    let spec = args.spec(d.unwrap_or(2))?;
                    let choice = korobov_search(need(m, "m")?, &spec, Precision::default())?;
                    CubatureRule::rank1(&choice.generator)
                }
                RuleKind::TensorGrid => CubatureRule::tensor_grid(need(n, "n")?, d.unwrap_or(2))?,
                RuleKind::MonteCarlo => CubatureRule::monte_carlo(need(m, "m")?, d.unwrap_or(2), seed.unwrap_or(0))?,
            };
            emit(&rule.to_json(with_nodes), out.as_deref())?;
            Ok(true)
        }
        Command::Rule(RuleCmd::Quality { rule, class, precision }) => {
            let rule = load_rule(&rule)?;
            let spec = class.spec(rule.dim())?;
            let k = worst_case_error(&rule, &spec, precision.precision())?;
            emit(
                &json!({"rule_id": rule.id(), "class": spec.id(), "m": rule.len(), "kappa": k}),
                None,
            )?;
            Ok(k.lo <= k.hi && k.lo >= 0.0)
        }
        Command::Er(ErCmd::Eval { rule, f, q, class }) => {
            let rule = load_rule(&rule)?;
            let poly: TrigPolynomial = serde_json::from_str(&fs::read_to_string(&f)?)?;
            let spec = class.spec(rule.dim())?;
            let rec = DefectRecord::evaluate(f.display().to_string(), &poly, &rule, &spec, q)?;
            emit(&rec, None)?;
            Ok(true)
        }
        Command::Er(ErCmd::Bound {
            rule,
            q,
            class,
            a,
            n_limit,
            truncation,
            precision,
        }) => {
            let rule = load_rule(&rule)?;
            let mut spec = class.spec(rule.dim())?;
            let d = spec.d;
            let quasi = match a {
                Some(a) => {
                    spec = spec.with_quasi_algebra_constant(a);
                    None
                }
                None => Some(spec.compute_quasi_algebra_constant(&FrequencyBox::tensor(d, n_limit), &FrequencyBox::tensor(d, truncation))?),
            };
            let b = discretization_bound(&rule, &spec, q, precision.precision())?;
            emit(&json!({"rule_id": rule.id(), "class": spec.id(), "bound": b, "quasi_algebra": quasi}), None)?;
            Ok(b.value.is_finite())
        }
        Command::Witness { rule, class, limit, out } => {
            let rule = load_rule(&rule)?;
            let spec = class.spec(rule.dim())?;
            let w = two_term_witness(&rule, &spec, limit)?;
            let norm = spec.class_norm(&w.f)?;
            let achieved = normdisc::discretization::er_abs(&w.f, &rule, 2)?;
            emit(
                &json!({"rule_id": rule.id(), "class": spec.id(), "witness": w, "class_norm": norm, "er_abs": achieved}),
                out.as_deref(),
            )?;
            Ok((norm - 1.0).abs() <= 1e-12 && (achieved - w.er).abs() <= 1e-10 * w.er.max(1.0))
        }
        Command::Fool { rule, class, box_limit, out } => {
            let rule = load_rule(&rule)?;
            let spec = class.spec(rule.dim())?;
            let cert = fooling_function(&rule.points(), &spec, &FrequencyBox::tensor(spec.d, box_limit))?;
            emit(&cert, out.as_deref())?;
            Ok(cert.residuals <= 1e-10 && (cert.class_norm_value - 1.0).abs() <= 1e-10 && cert.integral >= 0.0)
        }
        Command::McExperiment { config, csv, json } => {
            let mut cfg: RandomDesignConfig = serde_json::from_str(&fs::read_to_string(&config)?)
                .with_context(|| format!("parsing {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = random_design_experiment(&cfg)?;
            if let Some(p) = csv {
                let mut buf = Vec::new();
                report.write_csv(&mut buf)?;
                fs::write(&p, buf)?;
            }
            emit(&report, json.as_deref())?;
            Ok(report.consistent)
        }
        Command::RateFit { input, model, beta } => {
            let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&input)?;
            let headers = reader.headers()?.clone();
            let col = |name: &str| headers.iter().position(|h| h == name);
            let (mi, ei) = match (col("m"), col("error")) {
                (Some(a), Some(b)) => (a, b),
                _ => (0, 1),
            };
            let mut pairs = Vec::new();
            for rec in reader.records() {
                let rec = rec?;
                let m: f64 = rec.get(mi).context("missing m")?.trim().parse()?;
                let e: f64 = rec.get(ei).context("missing error")?.trim().parse()?;
                pairs.push((m, e));
            }
            let model = match model {
                ModelArg::LogPower => RateModel::LogPower,
                ModelArg::Power => RateModel::Power,
                ModelArg::FixedBeta => RateModel::FixedBeta {
                    beta: beta.context("--beta is required with --model fixed-beta")?,
                },
            };
            let fit = rate_fit(&pairs, model)?;
            emit(&fit, None)?;
            Ok(true)
        }
        Command::Run { config, csv, json } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if csv.is_some() {
                cfg.output.csv = csv;
            }
            if json.is_some() {
                cfg.output.json = json;
            }
            let report = run_experiment(&cfg)?;
            write_outputs(&report)?;
            for a in &report.assertions {
                eprintln!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
            }
            if cfg.output.csv.is_none() {
                print_stdout(&report.csv_string()?)?;
            }
            Ok(report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("hard assertion failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

