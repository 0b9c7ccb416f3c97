//! Mean squared error of the difference-based and classical correlation
//! estimators over a grid of correlations and sample sizes.

use std::path::Path;

use corrarms::model::{ArmSource, GaussianArms};
use corrarms::{CorrelationMatrix, PairStatsTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::stats::mix_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub rho: f64,
    pub t: u64,
    pub replications: u64,
    pub mse_difference: f64,
    pub mse_classical: f64,
    /// `mse_difference / mse_classical`.
    pub ratio: f64,
}

pub fn compare_estimators(rhos: &[f64], ts: &[u64], replications: u64, seed: u64) -> Result<Vec<MseRow>, HarnessError> {
    if rhos.is_empty() || ts.is_empty() {
        return Err(HarnessError::Validation("rho and t grids must be non-empty".into()));
    }
    if let Some(r) = rhos.iter().find(|r| !(0.0..1.0).contains(*r)) {
        return Err(HarnessError::Validation(format!("rho = {r} is outside [0, 1)")));
    }
    if ts.contains(&0) || replications == 0 {
        return Err(HarnessError::Validation("t and replications must be positive".into()));
    }
    let cells: Vec<(usize, f64, u64)> =
        rhos.iter().flat_map(|&r| ts.iter().map(move |&t| (r, t))).enumerate().map(|(i, (r, t))| (i, r, t)).collect();
    cells
        .into_par_iter()
        .map(|(cell, rho, t)| {
            let m = CorrelationMatrix::new(&[vec![1.0, rho], vec![rho, 1.0]])?;
            let mut src = GaussianArms::new(&m, ChaCha8Rng::seed_from_u64(mix_seed(seed, cell as u64)));
            let (mut sd, mut sc) = (0.0, 0.0);
            for _ in 0..replications {
                let mut table = PairStatsTable::new(2);
                for _ in 0..t {
                    table.update(&src.sample_step(&[0, 1])?).expect("indices in range");
                }
                sd += (table.diff_estimate(0, 1).expect("observed") - rho).powi(2);
                sc += (table.classical_estimate(0, 1).expect("observed") - rho).powi(2);
            }
            let n = replications as f64;
            Ok(MseRow { rho, t, replications, mse_difference: sd / n, mse_classical: sc / n, ratio: sd / sc })
        })
        .collect()
}

pub fn write_rows(rows: &[MseRow], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_pair_favours_classical() {
        // 2/t against 1/t
        let rows = compare_estimators(&[0.0], &[50], 4000, 1).unwrap();
        assert!((rows[0].ratio - 2.0).abs() < 0.2, "{}", rows[0].ratio);
        assert!((rows[0].mse_difference * 50.0 - 2.0).abs() < 0.2);
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(compare_estimators(&[1.0], &[5], 10, 0).is_err());
        assert!(compare_estimators(&[], &[5], 10, 0).is_err());
        assert!(compare_estimators(&[0.5], &[0], 10, 0).is_err());
    }
}
