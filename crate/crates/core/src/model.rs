//! Correlated Gaussian problem instances.
//!
//! A [`CorrelationMatrix`] is a validated unit-diagonal matrix with
//! non-negative entries together with a cached lower-triangular sampling
//! factor. A [`ProblemInstance`] adds the subset size `h` and the ground truth
//! derived by exhaustive enumeration. [`GaussianArms`] draws the i.i.d. vectors
//! and reveals only the requested coordinates.
//!
//! Arms are indexed from 0 throughout the crate.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::objective::{self, DistanceMatrix, ObjectiveError, Subset};

pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-8;
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-6;
/// Largest C(K, h) accepted when enumerating the ground truth.
pub const INSTANCE_ENUMERATION_CAP: u128 = 1_000_000;

const GROUND_TRUTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("matrix is not square ({rows} rows, row {row} has {cols} entries)")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("matrix must have at least 2 arms, got {0}")]
    TooSmall(usize),
    #[error("entries ({i},{j}) and ({j},{i}) differ by {diff:e}")]
    AsymmetricBeyondTolerance { i: usize, j: usize, diff: f64 },
    #[error("diagonal entry {i} is {value}, expected 1")]
    DiagonalNotOne { i: usize, value: f64 },
    #[error("entry ({i},{j}) = {value} is outside [0, 1]")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("sampling factor reproduces the matrix only to Frobenius error {0:e}")]
    FactorizationFailed(f64),
    #[error("correlation parameters must satisfy rho_h > rho_(h+1) >= ... >= rho_K")]
    OrderingViolated,
    #[error("correlation parameter {0} is outside [0, 1)")]
    RhoOutOfRange(f64),
    #[error("subset size h = {h} is invalid for K = {k} arms (need 2 <= h < K)")]
    InvalidSubsetSize { h: usize, k: usize },
    #[error("the optimal subset is not unique")]
    NonUniqueOptimum,
    #[error("instance is not a member of the lower-bound family")]
    NotLowerBoundFamily,
    #[error("ground truth check failed: {0}")]
    GroundTruthMismatch(String),
    #[error("revealed arm set is empty")]
    EmptySubset,
    #[error("arm index {index} out of range for K = {k}")]
    IndexOutOfRange { index: usize, k: usize },
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("instance file: {0}")]
    Io(#[from] std::io::Error),
    #[error("instance file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Validated correlation matrix with its sampling factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    entries: Vec<f64>,
    factor: Vec<f64>,
}

impl CorrelationMatrix {
    /// Validates a square matrix given as rows.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let k = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(ModelError::NotSquare { rows: k, row, cols: r.len() });
            }
        }
        Self::from_row_major(k, rows.iter().flatten().copied().collect())
    }

    /// Validates a row-major `dim × dim` array.
    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self, ModelError> {
        if entries.len() != dim * dim {
            return Err(ModelError::NotSquare {
                rows: dim,
                row: 0,
                cols: entries.len().checked_div(dim).unwrap_or(0),
            });
        }
        if dim < 2 {
            return Err(ModelError::TooSmall(dim));
        }
        let at = |i: usize, j: usize| entries[i * dim + j];
        for i in 0..dim {
            for j in 0..dim {
                let v = at(i, j);
                if !v.is_finite() || v < 0.0 || v > 1.0 {
                    if i == j {
                        return Err(ModelError::DiagonalNotOne { i, value: v });
                    }
                    return Err(ModelError::NegativeEntry { i, j, value: v });
                }
                let diff = (v - at(j, i)).abs();
                if diff > SYMMETRY_TOLERANCE {
                    return Err(ModelError::AsymmetricBeyondTolerance { i, j, diff });
                }
            }
            if at(i, i) != 1.0 {
                return Err(ModelError::DiagonalNotOne { i, value: at(i, i) });
            }
        }
        let factor = sampling_factor(dim, &entries)?;
        Ok(Self { dim, entries, factor })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Lower-triangular factor `L` with `L Lᵀ` equal to the matrix, row-major.
    pub fn factor(&self) -> &[f64] {
        &self.factor
    }

    /// Frobenius norm of `L Lᵀ − Σ`.
    pub fn reconstruction_error(&self) -> f64 {
        reconstruction_error(self.dim, &self.entries, &self.factor)
    }

    /// The true distance matrix `1 − σ_jℓ`.
    pub fn distances(&self) -> DistanceMatrix {
        let k = self.dim;
        let mut d = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    d[i * k + j] = 1.0 - self.get(i, j);
                }
            }
        }
        DistanceMatrix::from_row_major(k, d).expect("1 - sigma is a valid distance matrix")
    }

    /// Writes `L z` for a standard normal vector `z` into `out`.
    pub fn transform(&self, z: &[f64], out: &mut [f64]) {
        let k = self.dim;
        for i in 0..k {
            let row = &self.factor[i * k..i * k + i + 1];
            out[i] = row.iter().zip(z).map(|(l, z)| l * z).sum();
        }
    }
}

fn reconstruction_error(k: usize, entries: &[f64], factor: &[f64]) -> f64 {
    let mut sq = 0.0;
    for i in 0..k {
        for j in 0..k {
            let v: f64 = (0..k).map(|m| factor[i * k + m] * factor[j * k + m]).sum();
            sq += (v - entries[i * k + j]).powi(2);
        }
    }
    sq.sqrt()
}

/// Cholesky when the matrix is positive definite. Otherwise the eigenvalues are
/// clipped at zero, `F = V Λ^½`, and the QR decomposition `Fᵀ = Q R` yields
/// the triangular factor `Rᵀ`.
fn sampling_factor(k: usize, entries: &[f64]) -> Result<Vec<f64>, ModelError> {
    let m = DMatrix::from_row_slice(k, k, entries);
    let lower = match m.clone().cholesky() {
        Some(chol) => chol.l(),
        None => {
            let sym = (&m + m.transpose()) * 0.5;
            let eig = SymmetricEigen::new(sym);
            let min = eig.eigenvalues.min();
            if min < -PSD_TOLERANCE {
                return Err(ModelError::NotPsd(min));
            }
            let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
            let f = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals);
            let r = f.transpose().qr().r();
            let mut l = r.transpose();
            // canonical sign: non-negative diagonal
            for c in 0..k {
                if l[(c, c)] < 0.0 {
                    l.column_mut(c).neg_mut();
                }
            }
            l
        }
    };
    let mut factor = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            factor[i * k + j] = lower[(i, j)];
        }
    }
    let err = reconstruction_error(k, entries, &factor);
    if err > RECONSTRUCTION_TOLERANCE {
        return Err(ModelError::FactorizationFailed(err));
    }
    Ok(factor)
}

/// Parameters of the lower-bound family: `rhos = [ρ_h, ρ_{h+1}, …, ρ_K]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundParams {
    pub rhos: Vec<f64>,
    pub h: usize,
}

impl LowerBoundParams {
    pub fn dim(&self) -> usize {
        self.h - 1 + self.rhos.len()
    }

    /// `ρ′_{h+1} = 1 − (1−ρ_h)² / (1−ρ_{h+1})`.
    pub fn rho_prime(&self) -> f64 {
        1.0 - (1.0 - self.rhos[0]).powi(2) / (1.0 - self.rhos[1])
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.h < 2 || self.rhos.len() < 2 {
            return Err(ModelError::InvalidSubsetSize { h: self.h, k: self.h - 1 + self.rhos.len() });
        }
        if let Some(&bad) = self.rhos.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(ModelError::RhoOutOfRange(bad));
        }
        if self.rhos[0] <= self.rhos[1] || self.rhos[1..].windows(2).any(|w| w[0] < w[1]) {
            return Err(ModelError::OrderingViolated);
        }
        Ok(())
    }

    /// Row-major entries. Arms `0..h-1` form the perfectly correlated block,
    /// arm `h-1+k` carries `rhos[k]`.
    pub fn entries(&self) -> Vec<f64> {
        let k = self.dim();
        let block = self.h - 1;
        let rho = |i: usize| self.rhos[i - block];
        let mut e = vec![0.0; k * k];
        for j in 0..k {
            for l in 0..k {
                e[j * k + l] = if j == l || (j < block && l < block) {
                    1.0
                } else if j >= block && l >= block {
                    rho(j) * rho(l)
                } else if j < block {
                    rho(l)
                } else {
                    rho(j)
                };
            }
        }
        e
    }
}

/// A correlation matrix with subset size and validated ground truth.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    matrix: CorrelationMatrix,
    h: usize,
    optimal_subset: Subset,
    ratios: Vec<f64>,
    complexity: f64,
    family: Option<LowerBoundParams>,
}

impl ProblemInstance {
    /// Enumerates all size-`h` subsets to find the unique optimum, then every
    /// suboptimality ratio and the complexity `H_C`.
    pub fn new(matrix: CorrelationMatrix, h: usize) -> Result<Self, ModelError> {
        let k = matrix.dim();
        if h < 2 || h >= k {
            return Err(ModelError::InvalidSubsetSize { h, k });
        }
        let d = matrix.distances();
        let all: Subset = (0..k).collect();
        let (best, runner_up) = objective::best_two_subsets(&d, &all, h, INSTANCE_ENUMERATION_CAP)?;
        let best_score = objective::subset_score(&d, &best)?;
        let second_score = runner_up
            .as_ref()
            .map(|s| objective::subset_score(&d, s))
            .transpose()?;
        if let Some(second) = second_score {
            if second - best_score <= 1e-12 * best_score.max(1.0) {
                return Err(ModelError::NonUniqueOptimum);
            }
        }
        let ratios = (0..k)
            .map(|i| objective::suboptimality_ratio(&d, &best, i, INSTANCE_ENUMERATION_CAP))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, r) in ratios.iter().enumerate() {
            let optimal = best.contains(&i);
            if optimal != (*r == 1.0) || (!optimal && *r <= 1.0) {
                return Err(ModelError::NonUniqueOptimum);
            }
        }
        let complexity = objective::complexity(&ratios, h)?;
        Ok(Self { matrix, h, optimal_subset: best, ratios, complexity, family: None })
    }

    pub fn matrix(&self) -> &CorrelationMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn optimal_subset(&self) -> &[usize] {
        &self.optimal_subset
    }

    /// `R_{i,Σ}` for every arm; `f64::INFINITY` when the optimal subset's
    /// outside distances all vanish.
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Ratios sorted ascending.
    pub fn sorted_ratios(&self) -> Vec<f64> {
        let mut r = self.ratios.clone();
        r.sort_by(f64::total_cmp);
        r
    }

    pub fn complexity(&self) -> f64 {
        self.complexity
    }

    pub fn family(&self) -> Option<&LowerBoundParams> {
        self.family.as_ref()
    }

    pub fn distances(&self) -> DistanceMatrix {
        self.matrix.distances()
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            dim: self.dim(),
            h: self.h,
            entries: self.matrix.entries().to_vec(),
            family: self.family.as_ref().map(|_| "lower_bound".to_string()),
            rhos: self.family.as_ref().map(|f| f.rhos.clone()),
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= GROUND_TRUTH_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Builds `Σ` of the lower-bound family and checks its ground truth:
/// the optimal subset is the first `h` arms and arm `i ≥ h` has ratio
/// `(1−ρ_i)/(1−ρ_h)`.
pub fn make_lower_bound_instance(rhos: &[f64], h: usize) -> Result<ProblemInstance, ModelError> {
    let params = LowerBoundParams { rhos: rhos.to_vec(), h };
    params.validate()?;
    let k = params.dim();
    let matrix = CorrelationMatrix::from_row_major(k, params.entries())?;
    let mut instance = ProblemInstance::new(matrix, h)?;
    if instance.optimal_subset != (0..h).collect::<Vec<_>>() {
        return Err(ModelError::GroundTruthMismatch(format!(
            "optimal subset {:?} is not the first h arms",
            instance.optimal_subset
        )));
    }
    for i in h..k {
        let expected = (1.0 - params.rhos[i + 1 - h]) / (1.0 - params.rhos[0]);
        if !close(instance.ratios[i], expected) {
            return Err(ModelError::GroundTruthMismatch(format!(
                "ratio of arm {i} is {}, expected {expected}",
                instance.ratios[i]
            )));
        }
    }
    instance.family = Some(params);
    Ok(instance)
}

/// The perturbed twin `Σ′`: `ρ_{h+1}` replaced by `ρ′_{h+1}`. Its optimal
/// subset swaps arm `h` (0-based `h-1`) for arm `h+1` (0-based `h`).
pub fn make_prime_instance(instance: &ProblemInstance) -> Result<ProblemInstance, ModelError> {
    let params = instance.family.as_ref().ok_or(ModelError::NotLowerBoundFamily)?;
    let h = params.h;
    let rho_h = params.rhos[0];
    let rho_prime = params.rho_prime();
    if rho_prime <= rho_h {
        return Err(ModelError::GroundTruthMismatch(format!(
            "rho' = {rho_prime} does not exceed rho_h = {rho_h}"
        )));
    }
    let mut rhos = params.rhos.clone();
    rhos[1] = rho_prime;
    let primed = LowerBoundParams { rhos, h };
    let k = primed.dim();
    let matrix = CorrelationMatrix::from_row_major(k, primed.entries())?;
    let mut out = ProblemInstance::new(matrix, h)?;
    let expected: Vec<usize> = (0..h - 1).chain(std::iter::once(h)).collect();
    if out.optimal_subset != expected {
        return Err(ModelError::GroundTruthMismatch(format!(
            "primed optimal subset {:?}, expected {expected:?}",
            out.optimal_subset
        )));
    }
    let expected_ratio = (1.0 - rho_h) / (1.0 - rho_prime);
    if !close(out.ratios[h - 1], expected_ratio) || !close(out.sorted_ratios()[h], expected_ratio) {
        return Err(ModelError::GroundTruthMismatch(format!(
            "primed ratio {}, expected {expected_ratio}",
            out.ratios[h - 1]
        )));
    }
    // the primed matrix is not ordered as the family requires; keep the
    // original parameters out of it
    out.family = None;
    Ok(out)
}

/// On-disk instance description. `entries` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dim: usize,
    pub h: usize,
    pub entries: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhos: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<ProblemInstance, ModelError> {
        match (self.family.as_deref(), self.rhos) {
            (Some("lower_bound"), Some(rhos)) => {
                let inst = make_lower_bound_instance(&rhos, self.h)?;
                if inst.matrix.entries() != self.entries.as_slice() || inst.dim() != self.dim {
                    return Err(ModelError::GroundTruthMismatch(
                        "entries disagree with the lower-bound parameters".into(),
                    ));
                }
                Ok(inst)
            }
            (Some(_), _) => Err(ModelError::NotLowerBoundFamily),
            (None, _) => {
                let m = CorrelationMatrix::from_row_major(self.dim, self.entries)?;
                ProblemInstance::new(m, self.h)
            }
        }
    }

    pub fn read(path: &Path) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Coordinates revealed at one time step, sorted by arm.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub t: u64,
    pub values: Vec<(usize, f64)>,
}

/// Anything that reveals arm coordinates of i.i.d. vectors, one step at a time.
pub trait ArmSource {
    fn dim(&self) -> usize;

    /// Draws the next vector and reveals `arms`. Charges `arms.len()` samples.
    fn sample_step(&mut self, arms: &[usize]) -> Result<Observation, ModelError>;
}

/// Zero-mean Gaussian vectors with a given correlation matrix.
#[derive(Debug)]
pub struct GaussianArms<'a, R> {
    matrix: &'a CorrelationMatrix,
    rng: R,
    t: u64,
    total_samples: u64,
    per_arm: Vec<u64>,
    z: Vec<f64>,
    x: Vec<f64>,
}

impl<'a, R: Rng> GaussianArms<'a, R> {
    pub fn new(matrix: &'a CorrelationMatrix, rng: R) -> Self {
        let k = matrix.dim();
        Self { matrix, rng, t: 0, total_samples: 0, per_arm: vec![0; k], z: vec![0.0; k], x: vec![0.0; k] }
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn total_samples(&self) -> u64 {
        self.total_samples
    }

    pub fn per_arm_samples(&self) -> &[u64] {
        &self.per_arm
    }

    /// A full latent vector; charges `K` samples.
    pub fn sample_full(&mut self) -> Vec<f64> {
        let all: Vec<usize> = (0..self.matrix.dim()).collect();
        self.sample_step(&all).expect("full set is valid").values.into_iter().map(|(_, v)| v).collect()
    }
}

impl<R: Rng> ArmSource for GaussianArms<'_, R> {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn sample_step(&mut self, arms: &[usize]) -> Result<Observation, ModelError> {
        let k = self.matrix.dim();
        if arms.is_empty() {
            return Err(ModelError::EmptySubset);
        }
        if let Some(&index) = arms.iter().find(|&&i| i >= k) {
            return Err(ModelError::IndexOutOfRange { index, k });
        }
        for z in self.z.iter_mut() {
            *z = self.rng.sample(StandardNormal);
        }
        self.matrix.transform(&self.z, &mut self.x);
        self.t += 1;
        let mut sorted = arms.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        self.total_samples += sorted.len() as u64;
        for &i in &sorted {
            self.per_arm[i] += 1;
        }
        Ok(Observation { t: self.t, values: sorted.iter().map(|&i| (i, self.x[i])).collect() })
    }
}
