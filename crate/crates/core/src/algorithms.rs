//! Decision procedures: the uniform-sampling baseline, successive rejects
//! (fixed budget), successive elimination (fixed confidence) and the two-arm
//! threshold test.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{EstimateError, PairStatsTable};
use crate::model::{ArmSource, ModelError};
use crate::objective::{
    self, alpha, alpha_inv, log_bar, DistanceMatrix, ObjectiveError, Subset, SUBSET_ENUMERATION_CAP, U_ENUMERATION_CAP,
};

/// Default cap on scalar samples drawn by [`se_c`].
pub const DEFAULT_MAX_SAMPLES: u64 = 100_000_000;

#[derive(Debug, Error)]
pub enum AlgorithmError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("budget {n} is below the minimum {min} for K = {k}, h = {h}")]
    BudgetTooSmall { n: u64, min: u64, k: usize, h: usize },
    #[error("sample cap reached after {} samples with {} arms still active", .0.total_samples, .0.rounds.last().map_or(0, |r| r.active.len()))]
    MaxStepsExceeded(Box<AlgorithmOutcome>),
    #[error("need 1 > rho0 > rho1 >= 0, got rho0 = {0}, rho1 = {1}")]
    ParameterOrderViolated(f64, f64),
    #[error("confidence level {0} is outside (0, 1)")]
    InvalidDelta(f64),
    #[error("subset size h = {h} is invalid for K = {k}")]
    InvalidSubsetSize { h: usize, k: usize },
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("oracle distances have dimension {0}, source has {1}")]
    DimensionMismatch(usize, usize),
}

/// Where an algorithm gets the distances `1 − σ` it ranks subsets by.
#[derive(Debug, Clone, Copy)]
pub enum DistanceFeed<'a> {
    /// Difference-based estimates from the observed samples.
    Empirical,
    /// True distances. Samples are still drawn and charged as usual.
    Oracle(&'a DistanceMatrix),
}

/// Enumeration caps shared by the subset-based procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    pub subsets: u128,
    pub statistic_u: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Self { subsets: SUBSET_ENUMERATION_CAP, statistic_u: U_ENUMERATION_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    /// Round index for successive rejects, time step for successive elimination.
    pub step: u64,
    /// Number of vectors drawn so far.
    pub time: u64,
    pub active: Subset,
    pub u_values: Vec<f64>,
    pub rejected: Vec<usize>,
    /// Elimination threshold; absent for successive rejects.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmOutcome {
    pub selected: Subset,
    pub total_samples: u64,
    pub per_arm_samples: Vec<u64>,
    pub rounds: Vec<RoundTrace>,
}

struct Run<'a, 'f, S> {
    source: &'a mut S,
    feed: DistanceFeed<'f>,
    table: PairStatsTable,
    total: u64,
    per_arm: Vec<u64>,
}

impl<'a, 'f, S: ArmSource> Run<'a, 'f, S> {
    fn new(source: &'a mut S, feed: DistanceFeed<'f>) -> Result<Self, AlgorithmError> {
        let k = source.dim();
        if let DistanceFeed::Oracle(d) = feed {
            if d.dim() != k {
                return Err(AlgorithmError::DimensionMismatch(d.dim(), k));
            }
        }
        Ok(Self { source, feed, table: PairStatsTable::new(k), total: 0, per_arm: vec![0; k] })
    }

    fn draw(&mut self, arms: &[usize]) -> Result<(), AlgorithmError> {
        let obs = self.source.sample_step(arms)?;
        self.total += obs.values.len() as u64;
        for &(i, _) in &obs.values {
            self.per_arm[i] += 1;
        }
        self.table.update(&obs)?;
        Ok(())
    }

    fn distances(&self) -> Result<DistanceMatrix, AlgorithmError> {
        Ok(match self.feed {
            DistanceFeed::Empirical => self.table.distances()?,
            DistanceFeed::Oracle(d) => d.clone(),
        })
    }

    fn finish(self, selected: Subset, rounds: Vec<RoundTrace>) -> AlgorithmOutcome {
        AlgorithmOutcome { selected, total_samples: self.total, per_arm_samples: self.per_arm, rounds }
    }
}

/// Draws `m` full vectors and returns the empirically best subset.
pub fn naive_policy<S: ArmSource>(
    source: &mut S,
    m: u64,
    h: usize,
    feed: DistanceFeed<'_>,
    caps: Caps,
) -> Result<AlgorithmOutcome, AlgorithmError> {
    let k = source.dim();
    if m == 0 {
        return Err(AlgorithmError::ZeroCount("m"));
    }
    if h < 2 || h > k {
        return Err(AlgorithmError::InvalidSubsetSize { h, k });
    }
    let mut run = Run::new(source, feed)?;
    let all: Subset = (0..k).collect();
    for _ in 0..m {
        run.draw(&all)?;
    }
    let selected = objective::best_subset(&run.distances()?, h, caps.subsets)?;
    Ok(run.finish(selected, Vec::new()))
}

/// Smallest budget for which every round of [`sr_c`] gets at least one vector:
/// `K + 1 + ⌈loḡ(K/h)·(h+1)⌉`.
pub fn sr_c_min_budget(k: usize, h: usize) -> u64 {
    (k + 1) as u64 + (log_bar(k, h) * (h + 1) as f64).ceil() as u64
}

/// Cumulative vector counts `n_1 ≤ … ≤ n_{K−h}` with
/// `n_k = ⌈(n − K − 1) / (loḡ(K/h)·(K + 1 − k))⌉`.
pub fn sr_c_schedule(k: usize, h: usize, n: u64) -> Vec<u64> {
    let lb = log_bar(k, h);
    let numerator = n.saturating_sub(k as u64 + 1) as f64;
    (1..=k - h).map(|round| (numerator / (lb * (k + 1 - round) as f64)).ceil() as u64).collect()
}

/// Successive rejects for correlation under a budget of `n` scalar samples.
///
/// Round `r` tops every surviving arm up to `n_r` vectors, computes `U` on
/// the estimates at that count and rejects the arm with the largest `U`
/// (the largest index among exact ties). Stops with `h` arms.
pub fn sr_c<S: ArmSource>(
    source: &mut S,
    n: u64,
    h: usize,
    feed: DistanceFeed<'_>,
    caps: Caps,
) -> Result<AlgorithmOutcome, AlgorithmError> {
    let k = source.dim();
    if h < 2 || h >= k {
        return Err(AlgorithmError::InvalidSubsetSize { h, k });
    }
    let min = sr_c_min_budget(k, h);
    if n < min {
        return Err(AlgorithmError::BudgetTooSmall { n, min, k, h });
    }
    let schedule = sr_c_schedule(k, h, n);
    let mut run = Run::new(source, feed)?;
    let mut active: Subset = (0..k).collect();
    let mut drawn = 0;
    let mut rounds = Vec::with_capacity(k - h);
    for (round, &target) in schedule.iter().enumerate() {
        while drawn < target {
            run.draw(&active)?;
            drawn += 1;
        }
        let u = objective::statistic_u(&run.distances()?, &active, h, caps.statistic_u)?;
        let mut worst = 0;
        for (p, &v) in u.iter().enumerate() {
            if v >= u[worst] {
                worst = p;
            }
        }
        let rejected = active[worst];
        rounds.push(RoundTrace {
            step: round as u64 + 1,
            time: drawn,
            active: active.clone(),
            u_values: u,
            rejected: vec![rejected],
            threshold: None,
        });
        active.remove(worst);
    }
    Ok(run.finish(active, rounds))
}

/// `g_t = log(2K²t²/δ)/t`.
pub fn se_c_rate(k: usize, t: u64, delta: f64) -> f64 {
    let t = t as f64;
    (2.0 * (k * k) as f64 * t * t / delta).ln() / t
}

/// Elimination threshold `(α⁻¹(g_t))²`.
pub fn se_c_threshold(k: usize, t: u64, delta: f64) -> f64 {
    alpha_inv(se_c_rate(k, t, delta)).expect("g_t is positive").powi(2)
}

/// Successive elimination for correlation at confidence `δ`.
///
/// Every step reveals the whole active set, then drops each arm whose `U`
/// reaches `(α⁻¹(g_t))²`. When that would leave fewer than `h` arms, the
/// would-be-eliminated arms with the smallest `U` (smallest index among ties)
/// are kept until exactly `h` remain. The run fails with
/// [`AlgorithmError::MaxStepsExceeded`] once the next step would push the
/// total past `max_samples`.
pub fn se_c<S: ArmSource>(
    source: &mut S,
    delta: f64,
    h: usize,
    feed: DistanceFeed<'_>,
    max_samples: u64,
    caps: Caps,
) -> Result<AlgorithmOutcome, AlgorithmError> {
    let k = source.dim();
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AlgorithmError::InvalidDelta(delta));
    }
    if h < 2 || h >= k {
        return Err(AlgorithmError::InvalidSubsetSize { h, k });
    }
    if max_samples < k as u64 {
        return Err(AlgorithmError::ZeroCount("max_samples / K"));
    }
    let mut run = Run::new(source, feed)?;
    let mut active: Subset = (0..k).collect();
    let mut rounds = Vec::new();
    let mut t = 1;
    run.draw(&active)?;
    loop {
        let u = objective::statistic_u(&run.distances()?, &active, h, caps.statistic_u)?;
        let threshold = se_c_threshold(k, t, delta);
        let mut doomed: Vec<usize> = (0..active.len()).filter(|&p| u[p] >= threshold).collect();
        let keep_back = (h + doomed.len()).saturating_sub(active.len());
        if keep_back > 0 {
            // spare the lowest-U candidates
            doomed.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)));
            doomed.drain(..keep_back);
            doomed.sort_unstable();
        }
        let rejected: Vec<usize> = doomed.iter().map(|&p| active[p]).collect();
        rounds.push(RoundTrace {
            step: t,
            time: t,
            active: active.clone(),
            u_values: u,
            rejected: rejected.clone(),
            threshold: Some(threshold),
        });
        active.retain(|i| !rejected.contains(i));
        if active.len() <= h {
            break;
        }
        if run.total + active.len() as u64 > max_samples {
            let partial = run.finish(active, rounds);
            return Err(AlgorithmError::MaxStepsExceeded(Box::new(partial)));
        }
        run.draw(&active)?;
        t += 1;
    }
    Ok(run.finish(active, rounds))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Correlation `ρ₀`.
    Null,
    /// Correlation `ρ₁`.
    Alternative,
}

impl Verdict {
    pub fn as_bit(self) -> u8 {
        match self {
            Verdict::Null => 0,
            Verdict::Alternative => 1,
        }
    }
}

/// Decides between `ρ₀` and `ρ₁ < ρ₀` from an estimated distance `1 − σ̂`:
/// `Null` iff `1 − σ̂ ≤ (1 − ρ₀)·√R` with `R = (1 − ρ₁)/(1 − ρ₀)`.
pub fn phi_star_decide(distance: f64, rho0: f64, rho1: f64) -> Result<Verdict, AlgorithmError> {
    Ok(if distance <= phi_star_threshold(rho0, rho1)? { Verdict::Null } else { Verdict::Alternative })
}

pub fn phi_star_threshold(rho0: f64, rho1: f64) -> Result<f64, AlgorithmError> {
    if !(rho0 < 1.0 && rho0 > rho1 && rho1 >= 0.0) {
        return Err(AlgorithmError::ParameterOrderViolated(rho0, rho1));
    }
    let r = (1.0 - rho1) / (1.0 - rho0);
    Ok((1.0 - rho0) * r.sqrt())
}

/// The threshold test on `t` paired observations.
pub fn phi_star_test(samples: &[(f64, f64)], rho0: f64, rho1: f64) -> Result<Verdict, AlgorithmError> {
    if samples.is_empty() {
        return Err(AlgorithmError::ZeroCount("t"));
    }
    let sq: f64 = samples.iter().map(|(x, y)| (x - y) * (x - y)).sum();
    phi_star_decide(sq / (2.0 * samples.len() as f64), rho0, rho1)
}

/// Risk bound `exp(−t·α(√R))` of the threshold test.
pub fn phi_star_risk_bound(rho0: f64, rho1: f64, t: u64) -> Result<f64, AlgorithmError> {
    if !(rho0 < 1.0 && rho0 > rho1 && rho1 >= 0.0) {
        return Err(AlgorithmError::ParameterOrderViolated(rho0, rho1));
    }
    let r = (1.0 - rho1) / (1.0 - rho0);
    Ok((-(t as f64) * alpha(r.sqrt())?).exp())
}
