use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::RateModel;
use crate::fourier::{ClassSpec, FrequencyBox};
use crate::lattice::{is_prime, Precision};

/// The rules an experiment sweeps over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuleFamily {
    /// Fibonacci rules `n_min..=n_max` (d = 2).
    Fibonacci { n_min: u32, n_max: u32 },
    /// Korobov-searched rank-1 rules, one per prime `m`.
    Korobov { m: Vec<u64> },
    /// `trials` independent uniform designs per `m`.
    MonteCarlo { m: Vec<u64>, trials: u64 },
}

impl RuleFamily {
    pub fn is_empty(&self) -> bool {
        match self {
            RuleFamily::Fibonacci { n_min, n_max } => n_min > n_max,
            RuleFamily::Korobov { m } => m.is_empty(),
            RuleFamily::MonteCarlo { m, trials } => m.is_empty() || *trials == 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiSettings {
    /// Frequencies `n` swept for the quasi-algebra ratio.
    pub n_limit: u64,
    /// Truncation of the inner convolution sum.
    pub truncation: u64,
}

impl Default for QuasiSettings {
    fn default() -> Self {
        QuasiSettings {
            n_limit: 64,
            truncation: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

fn default_q() -> u32 {
    2
}

fn default_samples() -> u64 {
    200
}

fn default_witness_limit() -> u64 {
    1 << 16
}

/// A config-driven sweep: one row per rule of the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub class: ClassSpec,
    pub family: RuleFamily,
    #[serde(default = "default_q")]
    pub q: u32,
    /// Support of the random unit-ball samples.
    pub sample_box: FrequencyBox,
    /// Box for the fooling function; omitted to skip it.
    #[serde(default)]
    pub fooling_box: Option<FrequencyBox>,
    #[serde(default = "default_samples")]
    pub n_samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub quasi: QuasiSettings,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default = "default_witness_limit")]
    pub witness_limit: u64,
    /// Model for the upper-envelope fit.
    #[serde(default)]
    pub upper_fit: RateModel,
    /// Model for the lower-envelope fit.
    #[serde(default)]
    pub lower_fit: RateModel,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.class.validate().map_err(|e| Error::Config(e.to_string()))?;
        let d = self.class.d;
        if self.family.is_empty() {
            return Err(Error::Config("rule family is empty".into()));
        }
        if self.q == 0 || self.q % 2 == 1 {
            return Err(Error::Config(format!("q = {} must be a positive even integer", self.q)));
        }
        if self.sample_box.dim() != d || self.fooling_box.as_ref().is_some_and(|b| b.dim() != d) {
            return Err(Error::Config(format!("boxes must have dimension {d}")));
        }
        if self.sample_box.is_empty() {
            return Err(Error::Config("sample box is empty".into()));
        }
        if self.quasi.n_limit == 0 || self.quasi.truncation == 0 {
            return Err(Error::Config("quasi settings must be positive".into()));
        }
        match &self.family {
            RuleFamily::Fibonacci { n_min, .. } => {
                if d != 2 {
                    return Err(Error::Config("fibonacci rules are two-dimensional".into()));
                }
                if *n_min < 2 {
                    return Err(Error::Config("fibonacci rules need n >= 2".into()));
                }
            }
            RuleFamily::Korobov { m } => {
                if d < 2 {
                    return Err(Error::Config("korobov rules need d >= 2".into()));
                }
                if let Some(bad) = m.iter().find(|&&v| !is_prime(v)) {
                    return Err(Error::Config(format!("korobov modulus {bad} is not prime")));
                }
            }
            RuleFamily::MonteCarlo { m, .. } => {
                if m.contains(&0) {
                    return Err(Error::Config("monte carlo m must be positive".into()));
                }
            }
        }
        Ok(())
    }
}
