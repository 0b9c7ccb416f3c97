//! Reference quantities used to check the guarantees numerically: chi-square
//! tail bounds, Gaussian KL divergences and the two-point risk lower bound.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, ProblemInstance};
use crate::objective::{alpha, beta, ObjectiveError};
use crate::special::{self, SpecialError};

/// Constant used for the upper sandwich `KL ≤ c·α(R)`.
pub const KL_SANDWICH_CONSTANT: f64 = 10.0;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("degrees of freedom must be at least 1")]
    ZeroDegrees,
    #[error("need 1 > rho0 > rho1 >= 0, got rho0 = {0}, rho1 = {1}")]
    ParameterOrderViolated(f64, f64),
    #[error("dimensions disagree")]
    DimensionMismatch,
    #[error("first covariance is singular")]
    SingularSigma0,
    #[error("second covariance is singular")]
    SingularSigma1,
    #[error("instance is not a member of the lower-bound family")]
    NotLowerBoundFamily,
    #[error("KL = {kl} exceeds {KL_SANDWICH_CONSTANT}·α(R) = {bound}")]
    SandwichViolated { kl: f64, bound: f64 },
}

/// Chernoff-type bounds on the tails of `Y/t` for `Y ~ χ²_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub t: u64,
    pub theta: f64,
    /// Bound on `P(Y/t ≤ 1/θ)`: `exp(−t·α(θ))`.
    pub lower: f64,
    /// Sharper bound on `P(Y/t ≥ θ)`: `exp(−(t/2)·β(θ))`.
    pub upper_sharp: f64,
    /// Weaker bound on `P(Y/t ≥ θ)`: `exp(−t·α(θ))`.
    pub upper: f64,
}

impl TailBound {
    pub fn ln_lower(&self) -> f64 {
        -(self.t as f64) * alpha(self.theta).expect("validated")
    }

    pub fn ln_upper_sharp(&self) -> f64 {
        -(self.t as f64) * 0.5 * beta(self.theta).expect("validated")
    }
}

pub fn chi_square_tail_bounds(t: u64, theta: f64) -> Result<TailBound, TheoryError> {
    if t == 0 {
        return Err(TheoryError::ZeroDegrees);
    }
    let a = alpha(theta)?;
    let b = beta(theta)?;
    let tf = t as f64;
    Ok(TailBound { t, theta, lower: (-tf * a).exp(), upper_sharp: (-0.5 * tf * b).exp(), upper: (-tf * a).exp() })
}

/// Exact `(ln P(Y/t ≤ 1/θ), ln P(Y/t ≥ θ))` for `Y ~ χ²_t`.
pub fn chi_square_exact_tails(t: u64, theta: f64) -> Result<(f64, f64), TheoryError> {
    if t == 0 {
        return Err(TheoryError::ZeroDegrees);
    }
    let tf = t as f64;
    Ok((special::ln_chi_square_cdf(tf, tf / theta)?, special::ln_chi_square_sf(tf, tf * theta)?))
}

fn check_order(rho0: f64, rho1: f64) -> Result<(), TheoryError> {
    if rho0 < 1.0 && rho0 > rho1 && rho1 >= 0.0 {
        Ok(())
    } else {
        Err(TheoryError::ParameterOrderViolated(rho0, rho1))
    }
}

/// `KL(N(μ₀, v₀), N(μ₁, v₁))` for scalars.
pub fn kl_univariate(mu0: f64, var0: f64, mu1: f64, var1: f64) -> f64 {
    0.5 * ((var1 / var0).ln() + var0 / var1 - 1.0 + (mu1 - mu0).powi(2) / var1)
}

/// `KL(N(0,Σ₀), N(0,Σ₁))` for unit-variance pairs with correlations
/// `ρ₀ > ρ₁`, via `α(R) + ½·β((1+ρ₀)/(1+ρ₁))`.
pub fn kl_bivariate_correlation(rho0: f64, rho1: f64) -> Result<f64, TheoryError> {
    check_order(rho0, rho1)?;
    let r = (1.0 - rho1) / (1.0 - rho0);
    let a = alpha(r)?;
    let kl = a + 0.5 * beta((1.0 + rho0) / (1.0 + rho1))?;
    debug_assert!(kl >= a);
    Ok(kl)
}

/// Same quantity through the conditional law of the second coordinate,
/// `KL(N(ρ₀, 1−ρ₀²), N(ρ₁, 1−ρ₁²))`.
pub fn kl_bivariate_conditional(rho0: f64, rho1: f64) -> Result<f64, TheoryError> {
    check_order(rho0, rho1)?;
    Ok(kl_univariate(rho0, 1.0 - rho0 * rho0, rho1, 1.0 - rho1 * rho1))
}

/// General Gaussian divergence
/// `½(log(det Σ₁/det Σ₀) + tr(Σ₁⁻¹Σ₀) − k + (μ₁−μ₀)ᵀΣ₁⁻¹(μ₁−μ₀))`.
/// Both covariances must be positive definite.
pub fn kl_gaussian_general(
    mu0: &DVector<f64>,
    sigma0: &DMatrix<f64>,
    mu1: &DVector<f64>,
    sigma1: &DMatrix<f64>,
) -> Result<f64, TheoryError> {
    let k = mu0.len();
    if mu1.len() != k || sigma0.shape() != (k, k) || sigma1.shape() != (k, k) {
        return Err(TheoryError::DimensionMismatch);
    }
    let chol1 = sigma1.clone().cholesky().ok_or(TheoryError::SingularSigma1)?;
    let chol0 = sigma0.clone().cholesky().ok_or(TheoryError::SingularSigma0)?;
    let ln_det = |l: &DMatrix<f64>| 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let ln_det1 = ln_det(&chol1.l());
    let ln_det0 = ln_det(&chol0.l());
    if !ln_det0.is_finite() {
        return Err(TheoryError::SingularSigma0);
    }
    if !ln_det1.is_finite() {
        return Err(TheoryError::SingularSigma1);
    }
    let trace = chol1.solve(sigma0).trace();
    let diff = mu1 - mu0;
    let maha = diff.dot(&chol1.solve(&diff));
    Ok(0.5 * (ln_det1 - ln_det0 + trace - k as f64 + maha))
}

fn family_rhos(instance: &ProblemInstance) -> Result<(f64, f64, f64), TheoryError> {
    let f = instance.family().ok_or(TheoryError::NotLowerBoundFamily)?;
    Ok((f.rhos[0], f.rhos[1], f.rho_prime()))
}

/// `KL(N(0,Σ′), N(0,Σ))` for a lower-bound instance, through its univariate
/// reduction `KL(N(ρ′, 1−ρ′²), N(ρ, 1−ρ²))` with `ρ = ρ_{h+1}`. Fails if the
/// result exceeds `10·α(R_{h+1})`.
pub fn kl_sigma_prime(instance: &ProblemInstance) -> Result<f64, TheoryError> {
    let (rho_h, rho, rho_p) = family_rhos(instance)?;
    let kl = kl_univariate(rho_p, 1.0 - rho_p * rho_p, rho, 1.0 - rho * rho);
    let bound = KL_SANDWICH_CONSTANT * alpha((1.0 - rho) / (1.0 - rho_h))?;
    if kl > bound {
        return Err(TheoryError::SandwichViolated { kl, bound });
    }
    Ok(kl)
}

/// Monte Carlo estimate of the same divergence: the mean log-likelihood ratio
/// of arm `h+1` given the block value, under `Σ′`.
pub fn kl_sigma_prime_monte_carlo<R: Rng>(instance: &ProblemInstance, samples: u64, rng: &mut R) -> Result<f64, TheoryError> {
    let (_, rho, rho_p) = family_rhos(instance)?;
    let (var, var_p) = (1.0 - rho * rho, 1.0 - rho_p * rho_p);
    let ln_density = |x: f64, mean: f64, v: f64| -0.5 * ((x - mean).powi(2) / v + v.ln());
    let mut sum = 0.0;
    for _ in 0..samples {
        let z: f64 = rng.sample(StandardNormal);
        let e: f64 = rng.sample(StandardNormal);
        let x = rho_p * z + var_p.sqrt() * e;
        sum += ln_density(x, rho_p * z, var_p) - ln_density(x, rho * z, var);
    }
    Ok(sum / samples as f64)
}

/// `((1−ρ_{h+1})/(1−ρ′_{h+1}), R²_{h+1})`; the two agree algebraically.
pub fn sigma_prime_ratio_identity(rho_h: f64, rho_next: f64) -> (f64, f64) {
    let rho_p = 1.0 - (1.0 - rho_h).powi(2) / (1.0 - rho_next);
    let r = (1.0 - rho_next) / (1.0 - rho_h);
    ((1.0 - rho_next) / (1.0 - rho_p), r * r)
}

/// `¼·exp(−t·KL)`: no test on `t` i.i.d. draws has max risk below this.
pub fn risk_lower_bound(kl: f64, t: u64) -> f64 {
    0.25 * (-(t as f64) * kl).exp()
}
