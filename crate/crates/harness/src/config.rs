//! Experiment configuration, loaded from TOML or JSON by file extension.

use std::path::{Path, PathBuf};

use corrarms::algorithms::DEFAULT_MAX_SAMPLES;
use corrarms::model::{make_lower_bound_instance, make_prime_instance};
use corrarms::{Caps, CorrelationMatrix, InstanceFile, ProblemInstance};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    Inline { rows: Vec<Vec<f64>>, h: usize },
    File { path: PathBuf },
    LowerBound { rhos: Vec<f64>, h: usize },
    /// The perturbed twin of a lower-bound instance.
    LowerBoundPrime { rhos: Vec<f64>, h: usize },
}

impl InstanceSpec {
    pub fn build(&self) -> Result<ProblemInstance, HarnessError> {
        Ok(match self {
            InstanceSpec::Inline { rows, h } => ProblemInstance::new(CorrelationMatrix::new(rows)?, *h)?,
            InstanceSpec::File { path } => InstanceFile::read(path)
                .map_err(|e| match e {
                    corrarms::ModelError::Io(io) => HarnessError::io(path, io),
                    other => other.into(),
                })?
                .into_instance()?,
            InstanceSpec::LowerBound { rhos, h } => make_lower_bound_instance(rhos, *h)?,
            InstanceSpec::LowerBoundPrime { rhos, h } => make_prime_instance(&make_lower_bound_instance(rhos, *h)?)?,
        })
    }
}

/// Which arm pair truth the two-arm test is run against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    Null,
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    /// Uniform sampling of `m` full vectors.
    Naive { m: u64 },
    /// Successive rejects with a budget of `n` scalar samples.
    SrC { n: u64 },
    /// Successive elimination at confidence `delta`.
    SeC { delta: f64 },
    /// The two-arm threshold test on `t` pairs drawn at correlation
    /// `rho0` (`truth = null`) or `rho1` (`truth = alternative`).
    PhiStar { rho0: f64, rho1: f64, t: u64, truth: Truth },
    /// Successive rejects fed the true distances; sampling is unchanged.
    OracleMode { n: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CapsConfig {
    pub subsets: u128,
    pub statistic_u: u128,
    /// Scalar-sample cap for successive elimination.
    pub max_samples: u64,
}

impl Default for CapsConfig {
    fn default() -> Self {
        let c = Caps::default();
        Self { subsets: c.subsets, statistic_u: c.statistic_u, max_samples: DEFAULT_MAX_SAMPLES }
    }
}

impl CapsConfig {
    pub fn enumeration(&self) -> Caps {
        Caps { subsets: self.subsets, statistic_u: self.statistic_u }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Not needed for `phi_star`, which builds its own pair.
    #[serde(default)]
    pub instance: Option<InstanceSpec>,
    pub algorithm: AlgorithmSpec,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// CSV destination; the summary goes next to it with a `.json` extension.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub caps: CapsConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        let config: Self = match ext.as_str() {
            "toml" => toml::from_str(&text)?,
            "json" => serde_json::from_str(&text)?,
            other => return Err(HarnessError::Validation(format!("unrecognized config extension '{other}'"))),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Validation(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        match &self.algorithm {
            AlgorithmSpec::Naive { m } if *m == 0 => return bad("naive: m must be positive".into()),
            AlgorithmSpec::SeC { delta } if !(*delta > 0.0 && *delta < 1.0) => {
                return bad(format!("se_c: delta must lie in (0, 1), got {delta}"))
            }
            AlgorithmSpec::PhiStar { rho0, rho1, t, .. } => {
                if !(*rho0 < 1.0 && rho0 > rho1 && *rho1 >= 0.0) {
                    return bad(format!("phi_star: need 1 > rho0 > rho1 >= 0, got {rho0}, {rho1}"));
                }
                if *t == 0 {
                    return bad("phi_star: t must be positive".into());
                }
            }
            _ => {}
        }
        let needs_instance = !matches!(self.algorithm, AlgorithmSpec::PhiStar { .. });
        if needs_instance && self.instance.is_none() {
            return bad("an instance is required for this algorithm".into());
        }
        Ok(())
    }
}
