//! Streaming pairwise statistics and the two correlation estimators.

use thiserror::Error;

use crate::model::Observation;
use crate::objective::DistanceMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum EstimateError {
    #[error("pair ({0},{1}) has no simultaneous observations")]
    NoObservations(usize, usize),
    #[error("arm index {index} out of range for K = {k}")]
    IndexOutOfRange { index: usize, k: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairStats {
    pub count: u64,
    pub sum_sq_diff: f64,
    pub sum_prod: f64,
}

/// Per-pair sufficient statistics, updated only from simultaneous reveals.
/// Stored once per unordered pair, so `(j, ℓ)` and `(ℓ, j)` always agree.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStatsTable {
    dim: usize,
    pairs: Vec<PairStats>,
}

impl PairStatsTable {
    pub fn new(dim: usize) -> Self {
        Self { dim, pairs: vec![PairStats::default(); dim * dim.saturating_sub(1) / 2] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, j: usize, l: usize) -> usize {
        let (a, b) = if j < l { (j, l) } else { (l, j) };
        // row-major upper triangle without diagonal
        a * (2 * self.dim - a - 1) / 2 + (b - a - 1)
    }

    fn checked(&self, j: usize, l: usize) -> Result<&PairStats, EstimateError> {
        for index in [j, l] {
            if index >= self.dim {
                return Err(EstimateError::IndexOutOfRange { index, k: self.dim });
            }
        }
        if j == l {
            return Err(EstimateError::NoObservations(j, l));
        }
        Ok(&self.pairs[self.slot(j, l)])
    }

    pub fn stats(&self, j: usize, l: usize) -> Result<PairStats, EstimateError> {
        self.checked(j, l).copied()
    }

    /// Folds every pair of revealed coordinates into the table.
    pub fn update(&mut self, obs: &Observation) -> Result<(), EstimateError> {
        if let Some(&(index, _)) = obs.values.iter().find(|(i, _)| *i >= self.dim) {
            return Err(EstimateError::IndexOutOfRange { index, k: self.dim });
        }
        for (p, &(j, xj)) in obs.values.iter().enumerate() {
            for &(l, xl) in &obs.values[p + 1..] {
                if j == l {
                    continue;
                }
                let slot = self.slot(j, l);
                let s = &mut self.pairs[slot];
                s.count += 1;
                s.sum_sq_diff += (xj - xl) * (xj - xl);
                s.sum_prod += xj * xl;
            }
        }
        Ok(())
    }

    /// `1 − σ̂ = Σ(x_j − x_ℓ)² / (2t)`, always `≥ 0`.
    pub fn diff_distance(&self, j: usize, l: usize) -> Result<f64, EstimateError> {
        let s = self.checked(j, l)?;
        if s.count == 0 {
            return Err(EstimateError::NoObservations(j, l));
        }
        Ok(s.sum_sq_diff / (2.0 * s.count as f64))
    }

    /// Difference-based estimate `σ̂ = 1 − Σ(x_j − x_ℓ)² / (2t)`.
    pub fn diff_estimate(&self, j: usize, l: usize) -> Result<f64, EstimateError> {
        Ok(1.0 - self.diff_distance(j, l)?)
    }

    /// Classical estimate `σ̃ = Σ x_j x_ℓ / t`. Not clamped.
    pub fn classical_estimate(&self, j: usize, l: usize) -> Result<f64, EstimateError> {
        let s = self.checked(j, l)?;
        if s.count == 0 {
            return Err(EstimateError::NoObservations(j, l));
        }
        Ok(s.sum_prod / s.count as f64)
    }

    /// Empirical distances `1 − σ̂` for all pairs. Every pair must have been
    /// observed at least once.
    pub fn distances(&self) -> Result<DistanceMatrix, EstimateError> {
        let k = self.dim;
        let mut d = vec![0.0; k * k];
        for j in 0..k {
            for l in j + 1..k {
                let v = self.diff_distance(j, l)?;
                d[j * k + l] = v;
                d[l * k + j] = v;
            }
        }
        Ok(DistanceMatrix::from_row_major(k, d).expect("squared differences are non-negative"))
    }
}
