//! Seed mixing and summary statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

/// SplitMix64 finalizer applied to `(master, index)`; gives each trial an
/// independent substream seed.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Normal,
    ClopperPearson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialCi {
    pub low: f64,
    pub high: f64,
    pub method: CiMethod,
}

/// Two-sided 95% interval for a binomial proportion: normal approximation,
/// or exact Clopper–Pearson when fewer than 5 successes were seen.
pub fn binomial_ci(successes: u64, n: u64) -> BinomialCi {
    assert!(n > 0 && successes <= n);
    let level = 0.05;
    if successes < 5 {
        let (x, nf) = (successes as f64, n as f64);
        let low = if successes == 0 { 0.0 } else { Beta::new(x, nf - x + 1.0).unwrap().inverse_cdf(level / 2.0) };
        let high = if successes == n { 1.0 } else { Beta::new(x + 1.0, nf - x).unwrap().inverse_cdf(1.0 - level / 2.0) };
        return BinomialCi { low, high, method: CiMethod::ClopperPearson };
    }
    let z = Normal::standard().inverse_cdf(1.0 - level / 2.0);
    let p = successes as f64 / n as f64;
    let half = z * (p * (1.0 - p) / n as f64).sqrt();
    BinomialCi { low: (p - half).max(0.0), high: (p + half).min(1.0), method: CiMethod::Normal }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
