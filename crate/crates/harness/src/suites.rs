//! Named numerical checks of the tail bounds, divergence identities and the
//! algorithms' error guarantees.

use corrarms::algorithms::phi_star_risk_bound;
use corrarms::model::make_lower_bound_instance;
use corrarms::objective::{alpha, log_bar};
use corrarms::theory::{
    chi_square_exact_tails, chi_square_tail_bounds, kl_bivariate_conditional, kl_bivariate_correlation,
    kl_gaussian_general, kl_sigma_prime, kl_sigma_prime_monte_carlo, sigma_prime_ratio_identity,
    KL_SANDWICH_CONSTANT,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AlgorithmSpec, CapsConfig, ExperimentConfig, InstanceSpec, Truth};
use crate::error::HarnessError;
use crate::experiment::{run_experiment, ExperimentReport};
use crate::stats::mix_seed;

pub const SUITES: [&str; 8] = ["lemma5", "lemma7", "lemma8", "thm1", "thm2", "thm3", "thm4", "phi_star"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, relation: Relation::AtMost, bound, passed: measured <= bound }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, relation: Relation::AtLeast, bound, passed: measured >= bound }
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        let verdict = if self.passed { "pass" } else { "FAIL" };
        write!(f, "{verdict}  {}: {:.6e} {rel} {:.6e}", self.name, self.measured, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

pub fn verify_bounds(suite: &str, seed: u64) -> Result<SuiteReport, HarnessError> {
    let checks = match suite {
        "lemma5" => lemma5(seed)?,
        "lemma7" => lemma7()?,
        "lemma8" => lemma8(seed)?,
        "thm1" => thm1(seed)?,
        "thm2" => thm2(seed)?,
        "thm3" => thm3(seed)?,
        "thm4" => thm4(seed)?,
        "phi_star" => phi_star(seed)?,
        other => return Err(HarnessError::UnknownSuite(other.into())),
    };
    Ok(SuiteReport { suite: suite.into(), seed, checks })
}

/// Three-sigma Monte Carlo slack for a proportion near `p` over `n` trials.
pub fn slack(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

fn experiment(instance: Option<InstanceSpec>, algorithm: AlgorithmSpec, trials: u64, seed: u64) -> Result<ExperimentReport, HarnessError> {
    run_experiment(&ExperimentConfig { instance, algorithm, trials, seed, output: None, caps: CapsConfig::default() })
}

/// Exact chi-square tails against both closed-form bounds on
/// `{1, 10, 100, 1000} × {1.1, 2, 5}`, plus a Monte Carlo look at
/// `P(χ²₁₀₀/100 ≤ 1/2)`.
fn lemma5(seed: u64) -> Result<Vec<CheckResult>, HarnessError> {
    const TOL: f64 = 1e-12;
    let mut checks = Vec::new();
    for t in [1u64, 10, 100, 1000] {
        for theta in [1.1, 2.0, 5.0] {
            let b = chi_square_tail_bounds(t, theta)?;
            let (ln_lo, ln_hi) = chi_square_exact_tails(t, theta)?;
            checks.push(CheckResult::at_most(format!("ln P(Y/t <= 1/θ), t={t}, θ={theta}"), ln_lo, b.ln_lower() + TOL));
            checks.push(CheckResult::at_most(format!("ln P(Y/t >= θ), t={t}, θ={theta}"), ln_hi, b.ln_upper_sharp() + TOL));
            checks.push(CheckResult::at_most(format!("sharp vs weak upper bound, t={t}, θ={theta}"), b.upper_sharp, b.upper));
        }
    }
    let (t, n) = (100u64, 1_000_000u64);
    let chunks = 16u64;
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, c));
            let chi = ChiSquared::new(t as f64).expect("positive dof");
            (0..n / chunks).filter(|_| chi.sample(&mut rng) / t as f64 <= 0.5).count() as u64
        })
        .sum();
    let bound = chi_square_tail_bounds(t, 2.0)?.lower;
    checks.push(CheckResult::at_most("Monte Carlo P(χ²₁₀₀/100 <= 1/2)", hits as f64 / n as f64, bound + slack(bound, n)));
    Ok(checks)
}

/// Sandwich and route agreement for the bivariate divergence on the grid
/// `ρ = i/46`, all 1035 ordered pairs.
fn lemma7() -> Result<Vec<CheckResult>, HarnessError> {
    let n = 46;
    let (mut min_gap, mut max_ratio, mut max_route) = (f64::INFINITY, 0.0f64, 0.0f64);
    let mut points = 0;
    let zero = nalgebra_zero();
    for i in 0..n {
        for j in 0..i {
            let (rho0, rho1) = (i as f64 / n as f64, j as f64 / n as f64);
            let kl = kl_bivariate_correlation(rho0, rho1)?;
            let a = alpha((1.0 - rho1) / (1.0 - rho0))?;
            min_gap = min_gap.min(kl - a);
            max_ratio = max_ratio.max(kl / a);
            let cond = kl_bivariate_conditional(rho0, rho1)?;
            let general = kl_gaussian_general(&zero, &pair_cov(rho0), &zero, &pair_cov(rho1))?;
            max_route = max_route.max((kl - cond).abs()).max((kl - general).abs());
            points += 1;
        }
    }
    let near = kl_bivariate_correlation(0.5 + 1e-9, 0.5)?;
    Ok(vec![
        CheckResult::at_least("grid points", points as f64, 1000.0),
        CheckResult::at_least("min KL − α(R)", min_gap, 0.0),
        CheckResult::at_most("max KL / α(R)", max_ratio, KL_SANDWICH_CONSTANT),
        CheckResult::at_most("max route disagreement", max_route, 1e-10),
        CheckResult::at_most("KL at ρ₀ = ρ₁ + 1e-9", near, 1e-12),
    ])
}

fn nalgebra_zero() -> nalgebra::DVector<f64> {
    nalgebra::DVector::zeros(2)
}

fn pair_cov(rho: f64) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0])
}

/// The ratio identity on 100 random pairs and the closed-form divergence
/// against a Monte Carlo log-likelihood-ratio mean at 10⁶ draws.
fn lemma8(seed: u64) -> Result<Vec<CheckResult>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0f64;
    let mut max_sandwich = 0.0f64;
    for _ in 0..100 {
        let rho_h: f64 = rng.random_range(0.01..0.999);
        let rho: f64 = rng.random_range(0.0..rho_h);
        let (lhs, rhs) = sigma_prime_ratio_identity(rho_h, rho);
        max_rel = max_rel.max((lhs - rhs).abs() / rhs);
        let inst = make_lower_bound_instance(&[rho_h, rho], 2)?;
        let kl = kl_sigma_prime(&inst)?;
        max_sandwich = max_sandwich.max(kl / alpha(inst.sorted_ratios()[2])?);
    }
    let mut checks = vec![
        CheckResult::at_most("max relative error of (1−ρ)/(1−ρ′) = R²", max_rel, 1e-12),
        CheckResult::at_most("max KL(Σ′,Σ) / α(R)", max_sandwich, KL_SANDWICH_CONSTANT),
    ];
    for (i, (rho_h, rho)) in [(0.9, 0.5), (0.9, 0.7), (0.95, 0.5)].into_iter().enumerate() {
        let inst = make_lower_bound_instance(&[rho_h, rho], 2)?;
        let exact = kl_sigma_prime(&inst)?;
        let mut mc_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1000 + i as u64));
        let mc = kl_sigma_prime_monte_carlo(&inst, 1_000_000, &mut mc_rng)?;
        checks.push(CheckResult::at_most(
            format!("relative gap closed form vs Monte Carlo, ({rho_h}, {rho})"),
            (mc - exact).abs() / exact,
            0.02,
        ));
    }
    Ok(checks)
}

/// Uniform sampling with `m = 500` on the `(0.9, 0.5, 0.3)` instance against
/// `K(K−1)·exp(−m·α(R_(h+1))/8)`.
fn thm1(seed: u64) -> Result<Vec<CheckResult>, HarnessError> {
    let (rhos, h, m, trials) = (vec![0.9, 0.5, 0.3], 2, 500, 2000);
    let inst = make_lower_bound_instance(&rhos, h)?;
    let k = inst.dim() as f64;
    let bound = k * (k - 1.0) * (-(m as f64) * alpha(inst.sorted_ratios()[h])? / 8.0).exp();
    let r = experiment(Some(InstanceSpec::LowerBound { rhos, h }), AlgorithmSpec::Naive { m }, trials, seed)?;
    Ok(vec![CheckResult::at_most("naive error frequency, m = 500", r.summary.error_frequency, bound)])
}

/// Both risks of the threshold test at `(0.9, 0.5)`, `t = 20`, 10⁴ trials each.
fn phi_star(seed: u64) -> Result<Vec<CheckResult>, HarnessError> {
    let (rho0, rho1, t, trials) = (0.9, 0.5, 20, 10_000);
    let bound = phi_star_risk_bound(rho0, rho1, t)?;
    let mut checks = Vec::new();
    for (i, truth) in [Truth::Null, Truth::Alternative].into_iter().enumerate() {
        let r = experiment(None, AlgorithmSpec::PhiStar { rho0, rho1, t, truth }, trials, mix_seed(seed, i as u64))?;
        checks.push(CheckResult::at_most(
            format!("risk under {truth:?}"),
            r.summary.error_frequency,
            bound + slack(bound, trials),
        ));
    }
    Ok(checks)
}

/// Max error of uniform sampling over the pair `(Σ, Σ′)` with `m = 50`,
/// against `¼·exp(−m·KL(Σ′, Σ))` minus three-sigma slack computed at the bound.
fn thm2(seed: u64) -> Result<Vec<CheckResult>, HarnessError> {
    let (m, trials, h) = (50u64, 10_000u64, 2);
    let mut checks = Vec::new();
    for (i, rhos) in [vec![0.9, 0.5, 0.3], vec![0.9, 0.89, 0.3]].into_iter().enumerate() {
        let inst = make_lower_bound_instance(&rhos, h)?;
        let bound = corrarms::theory::risk_lower_bound(kl_sigma_prime(&inst)?, m);
        let base = mix_seed(seed, 2 * i as u64);
        let err = experiment(Some(InstanceSpec::LowerBound { rhos: rhos.clone(), h }), AlgorithmSpec::Naive { m }, trials, base)?
            .summary
            .error_frequency;
        let err_prime = experiment(
            Some(InstanceSpec::LowerBoundPrime { rhos: rhos.clone(), h }),
            AlgorithmSpec::Naive { m },
            trials,
            mix_seed(seed, 2 * i as u64 + 1),
        )?
        .summary
        .error_frequency;
        checks.push(CheckResult::at_least(
            format!("max error over (Σ, Σ′), ρ_h = {}, ρ_h+1 = {}", rhos[0], rhos[1]),
            err.max(err_prime),
            bound - slack(bound, trials),
        ));
    }
    Ok(checks)
}

/// Successive rejects at `n = 40·⌈H_C·loḡ(K/h)⌉` on two `K = 8, h = 2`
/// instances with every ratio at least 5, plus the same runs fed true
/// distances.
fn thm3(seed: u64) -> Result<Vec<CheckResult>, HarnessError> {
    let trials = 400;
    let h = 2;
    let families = [vec![0.9, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5], vec![0.9, 0.5, 0.5, 0.4, 0.3, 0.2, 0.1]];
    let mut checks = Vec::new();
    for (i, rhos) in families.into_iter().enumerate() {
        let inst = make_lower_bound_instance(&rhos, h)?;
        let k = inst.dim();
        let n = 40 * (inst.complexity() * log_bar(k, h)).ceil() as u64;
        let spec = InstanceSpec::LowerBound { rhos: rhos.clone(), h };
        let label = format!("instance {}, n = {n}", i + 1);
        let r = experiment(Some(spec.clone()), AlgorithmSpec::SrC { n }, trials, mix_seed(seed, i as u64))?;
        checks.push(CheckResult::at_least(format!("{label}: min ratio"), inst.sorted_ratios()[h], 5.0));
        checks.push(CheckResult::at_most(format!("{label}: error frequency"), r.summary.error_frequency, 0.05));
        checks.push(CheckResult::at_most(format!("{label}: max samples"), r.summary.max_total_samples as f64, n as f64));
        let o = experiment(Some(spec), AlgorithmSpec::OracleMode { n }, trials, mix_seed(seed, 100 + i as u64))?;
        checks.push(CheckResult::at_most(format!("{label}: oracle-mode errors"), o.summary.errors as f64, 0.0));
    }
    Ok(checks)
}

/// Successive elimination at `δ = 0.1` on ratios `{5, 50, 50, 50, 50, 50}`.
fn thm4(seed: u64) -> Result<Vec<CheckResult>, HarnessError> {
    let (delta, trials, h) = (0.1, 200, 2);
    let rhos = vec![0.99, 0.95, 0.5, 0.5, 0.5, 0.5, 0.5];
    let inst = make_lower_bound_instance(&rhos, h)?;
    let r = experiment(Some(InstanceSpec::LowerBound { rhos, h }), AlgorithmSpec::SeC { delta }, trials, seed)?;
    let ratios = inst.ratios();
    let near: Vec<usize> = (0..inst.dim()).filter(|&i| (ratios[i] - 5.0).abs() < 1e-9).collect();
    let far: Vec<usize> = (0..inst.dim()).filter(|&i| (ratios[i] - 50.0).abs() < 1e-6).collect();
    let arm_mean = |arms: &[usize]| arms.iter().map(|&i| r.summary.per_arm_mean_samples[i]).sum::<f64>() / arms.len() as f64;
    Ok(vec![
        CheckResult::at_least("arms with R = 5", near.len() as f64, 1.0),
        CheckResult::at_least("arms with R = 50", far.len() as f64, 5.0),
        // success ≥ 1 − δ with 95% confidence
        CheckResult::at_most("error frequency, upper 95% limit", r.summary.error_ci.high, delta),
        CheckResult::at_most("mean samples of R = 50 arms / R = 5 arm", arm_mean(&far) / arm_mean(&near), 0.5),
        CheckResult::at_most("trials hitting the sample cap", r.summary.max_steps as f64, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(verify_bounds("thm9", 0), Err(HarnessError::UnknownSuite(_))));
    }

    #[test]
    fn relations() {
        assert!(CheckResult::at_most("x", 1.0, 1.0).passed);
        assert!(!CheckResult::at_least("x", 0.5, 1.0).passed);
        assert!(slack(0.0, 10) == 0.0);
    }

    #[test]
    fn lemma7_passes() {
        assert!(verify_bounds("lemma7", 0).unwrap().passed());
    }
}
