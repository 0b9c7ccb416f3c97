//! Seeded, trial-parallel Monte Carlo runs with CSV and JSON output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use corrarms::algorithms::{naive_policy, phi_star_test, se_c, sr_c, sr_c_min_budget};
use corrarms::model::GaussianArms;
use corrarms::{AlgorithmError, AlgorithmOutcome, ArmSource, CorrelationMatrix, DistanceFeed, ProblemInstance, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AlgorithmSpec, ExperimentConfig, Truth};
use crate::error::HarnessError;
use crate::stats::{binomial_ci, mean, median, mix_seed, BinomialCi};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Parallel,
    Serial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub correct: bool,
    /// `;`-joined arm indices (0-based); the verdict for `phi_star`.
    pub selected: String,
    pub total_samples: u64,
    /// `;`-joined per-arm counts.
    pub per_arm_samples: String,
    pub wall_time_micros: u64,
    /// `completed`, `max_steps`, or `error:<message>`.
    pub terminal_reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: String,
    pub trials: u64,
    pub seed: u64,
    pub errors: u64,
    pub error_frequency: f64,
    pub error_ci: BinomialCi,
    pub completed: u64,
    pub max_steps: u64,
    pub mean_total_samples: f64,
    pub median_total_samples: f64,
    pub max_total_samples: u64,
    pub per_arm_mean_samples: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_subset: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

impl ExperimentReport {
    /// Per-arm counts parsed back from the records.
    pub fn per_arm(&self) -> Vec<Vec<u64>> {
        self.records
            .iter()
            .map(|r| r.per_arm_samples.split(';').filter(|s| !s.is_empty()).map(|s| s.parse().unwrap()).collect())
            .collect()
    }

    /// Rewrites `csv_path` and its `.json` sidecar.
    pub fn write(&self, csv_path: &Path) -> Result<PathBuf, HarnessError> {
        let file = std::fs::File::create(csv_path).map_err(|e| HarnessError::io(csv_path, e))?;
        let mut w = csv::Writer::from_writer(file);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| HarnessError::io(csv_path, e))?;
        let json_path = csv_path.with_extension("json");
        let text = serde_json::to_string_pretty(&self.summary)?;
        std::fs::write(&json_path, text + "\n").map_err(|e| HarnessError::io(&json_path, e))?;
        Ok(json_path)
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn algorithm_name(spec: &AlgorithmSpec) -> &'static str {
    match spec {
        AlgorithmSpec::Naive { .. } => "naive",
        AlgorithmSpec::SrC { .. } => "sr_c",
        AlgorithmSpec::SeC { .. } => "se_c",
        AlgorithmSpec::PhiStar { .. } => "phi_star",
        AlgorithmSpec::OracleMode { .. } => "oracle_mode",
    }
}

struct Prepared {
    instance: Option<ProblemInstance>,
    pair: Option<CorrelationMatrix>,
}

fn prepare(config: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    config.validate()?;
    if let AlgorithmSpec::PhiStar { rho0, rho1, truth, .. } = config.algorithm {
        let rho = match truth {
            Truth::Null => rho0,
            Truth::Alternative => rho1,
        };
        let pair = CorrelationMatrix::new(&[vec![1.0, rho], vec![rho, 1.0]])?;
        return Ok(Prepared { instance: None, pair: Some(pair) });
    }
    let instance = config.instance.as_ref().expect("validated").build()?;
    let (k, h) = (instance.dim(), instance.h());
    if let AlgorithmSpec::SrC { n } | AlgorithmSpec::OracleMode { n } = config.algorithm {
        let min = sr_c_min_budget(k, h);
        if n < min {
            return Err(HarnessError::Validation(format!("budget n = {n} is below the minimum {min} for K = {k}, h = {h}")));
        }
    }
    Ok(Prepared { instance: Some(instance), pair: None })
}

fn run_trial(config: &ExperimentConfig, prep: &Prepared, index: u64) -> TrialRecord {
    let seed = mix_seed(config.seed, index);
    let rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let caps = config.caps.enumeration();
    let mut record = TrialRecord {
        trial_index: index,
        seed,
        correct: false,
        selected: String::new(),
        total_samples: 0,
        per_arm_samples: String::new(),
        wall_time_micros: 0,
        terminal_reason: "completed".into(),
    };

    if let AlgorithmSpec::PhiStar { rho0, rho1, t, truth } = config.algorithm {
        let pair = prep.pair.as_ref().expect("prepared");
        let mut src = GaussianArms::new(pair, rng);
        let samples: Vec<(f64, f64)> = (0..t)
            .map(|_| {
                let obs = src.sample_step(&[0, 1]).expect("two-arm draw");
                (obs.values[0].1, obs.values[1].1)
            })
            .collect();
        match phi_star_test(&samples, rho0, rho1) {
            Ok(v) => {
                let expected = match truth {
                    Truth::Null => Verdict::Null,
                    Truth::Alternative => Verdict::Alternative,
                };
                record.correct = v == expected;
                record.selected = v.as_bit().to_string();
            }
            Err(e) => record.terminal_reason = format!("error:{e}"),
        }
        record.total_samples = src.total_samples();
        record.per_arm_samples = join(src.per_arm_samples());
        record.wall_time_micros = start.elapsed().as_micros() as u64;
        return record;
    }

    let inst = prep.instance.as_ref().expect("prepared");
    let h = inst.h();
    let mut src = GaussianArms::new(inst.matrix(), rng);
    let truth_d;
    let result: Result<AlgorithmOutcome, AlgorithmError> = match config.algorithm {
        AlgorithmSpec::Naive { m } => naive_policy(&mut src, m, h, DistanceFeed::Empirical, caps),
        AlgorithmSpec::SrC { n } => sr_c(&mut src, n, h, DistanceFeed::Empirical, caps),
        AlgorithmSpec::SeC { delta } => se_c(&mut src, delta, h, DistanceFeed::Empirical, config.caps.max_samples, caps),
        AlgorithmSpec::OracleMode { n } => {
            truth_d = inst.distances();
            sr_c(&mut src, n, h, DistanceFeed::Oracle(&truth_d), caps)
        }
        AlgorithmSpec::PhiStar { .. } => unreachable!(),
    };
    match result {
        Ok(out) => {
            record.correct = out.selected == inst.optimal_subset();
            record.selected = join(&out.selected);
            record.total_samples = out.total_samples;
            record.per_arm_samples = join(&out.per_arm_samples);
        }
        Err(AlgorithmError::MaxStepsExceeded(partial)) => {
            record.selected = join(&partial.selected);
            record.total_samples = partial.total_samples;
            record.per_arm_samples = join(&partial.per_arm_samples);
            record.terminal_reason = "max_steps".into();
        }
        Err(e) => {
            record.total_samples = src.total_samples();
            record.per_arm_samples = join(src.per_arm_samples());
            record.terminal_reason = format!("error:{e}");
        }
    }
    record.wall_time_micros = start.elapsed().as_micros() as u64;
    record
}

fn summarize(config: &ExperimentConfig, prep: &Prepared, records: &[TrialRecord]) -> Summary {
    let n = records.len() as u64;
    let errors = records.iter().filter(|r| !r.correct).count() as u64;
    let totals: Vec<f64> = records.iter().map(|r| r.total_samples as f64).collect();
    let arms: Vec<Vec<u64>> = records
        .iter()
        .map(|r| r.per_arm_samples.split(';').filter(|s| !s.is_empty()).map(|s| s.parse().unwrap()).collect())
        .collect();
    let k = arms.iter().map(Vec::len).max().unwrap_or(0);
    let per_arm_mean = (0..k).map(|i| arms.iter().map(|a| a.get(i).copied().unwrap_or(0) as f64).sum::<f64>() / n as f64).collect();
    Summary {
        algorithm: algorithm_name(&config.algorithm).into(),
        trials: n,
        seed: config.seed,
        errors,
        error_frequency: errors as f64 / n as f64,
        error_ci: binomial_ci(errors, n),
        completed: records.iter().filter(|r| r.terminal_reason == "completed").count() as u64,
        max_steps: records.iter().filter(|r| r.terminal_reason == "max_steps").count() as u64,
        mean_total_samples: mean(&totals),
        median_total_samples: median(&totals),
        max_total_samples: records.iter().map(|r| r.total_samples).max().unwrap_or(0),
        per_arm_mean_samples: per_arm_mean,
        optimal_subset: prep.instance.as_ref().map(|i| i.optimal_subset().to_vec()),
        complexity: prep.instance.as_ref().map(ProblemInstance::complexity),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_experiment_with(config, Execution::Parallel)
}

/// Records come back ordered by trial index whatever the execution mode.
pub fn run_experiment_with(config: &ExperimentConfig, mode: Execution) -> Result<ExperimentReport, HarnessError> {
    let prep = prepare(config)?;
    let records: Vec<TrialRecord> = match mode {
        Execution::Parallel => (0..config.trials).into_par_iter().map(|i| run_trial(config, &prep, i)).collect(),
        Execution::Serial => (0..config.trials).map(|i| run_trial(config, &prep, i)).collect(),
    };
    let summary = summarize(config, &prep, &records);
    Ok(ExperimentReport { records, summary })
}
