use corrarms::model::{ArmSource, GaussianArms};
use corrarms::special::ln_chi_square_cdf;
use corrarms::{CorrelationMatrix, PairStatsTable};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair(sigma: f64) -> CorrelationMatrix {
    CorrelationMatrix::new(&[vec![1.0, sigma], vec![sigma, 1.0]]).unwrap()
}

/// `(σ̂, σ̃)` after `t` draws of the pair.
fn estimate(m: &CorrelationMatrix, t: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut src = GaussianArms::new(m, &mut *rng);
    let mut table = PairStatsTable::new(2);
    for _ in 0..t {
        table.update(&src.sample_step(&[0, 1]).unwrap()).unwrap();
    }
    (table.diff_estimate(0, 1).unwrap(), table.classical_estimate(0, 1).unwrap())
}

#[test]
fn accuracy_near_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (d, _) = estimate(&pair(0.99), 1000, &mut rng);
    assert!((d - 0.99).abs() < 0.01 * 0.2, "{d}");
}

#[test]
fn accuracy_at_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let (d, c) = estimate(&pair(0.0), 10_000, &mut rng);
    assert!(d.abs() < 0.05 && c.abs() < 0.05);
}

#[test]
fn scaled_distance_is_chi_square() {
    // t·(1 − σ̂)/(1 − σ) ~ χ²_t; Kolmogorov–Smirnov against the exact CDF
    let (sigma, t, reps) = (0.7, 6usize, 4000);
    let m = pair(sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut ys: Vec<f64> = (0..reps)
        .map(|_| t as f64 * (1.0 - estimate(&m, t, &mut rng).0) / (1.0 - sigma))
        .collect();
    ys.sort_by(f64::total_cmp);
    let n = reps as f64;
    let ks = ys
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = ln_chi_square_cdf(t as f64, y).unwrap().exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // 1.63/√n is the 1% critical value
    assert!(ks < 1.63 / n.sqrt(), "KS = {ks}");
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - t as f64).abs() < 4.0 * (2.0 * t as f64 / n).sqrt());
    assert!((var / (2.0 * t as f64) - 1.0).abs() < 0.1);
}

#[test]
fn mse_ratio_matches_closed_form() {
    // MSE(σ̂) = 2(1−σ)²/t and MSE(σ̃) = (1+σ²)/t
    let (t, reps) = (40usize, 4000);
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for sigma in [0.5, 0.9] {
        let m = pair(sigma);
        let (mut se_d, mut se_c) = (0.0, 0.0);
        for _ in 0..reps {
            let (d, c) = estimate(&m, t, &mut rng);
            se_d += (d - sigma).powi(2);
            se_c += (c - sigma).powi(2);
        }
        let tf = t as f64;
        let ratio = se_d / se_c;
        let want = 2.0 * (1.0 - sigma) * (1.0 - sigma) / (1.0 + sigma * sigma);
        assert!((ratio / want - 1.0).abs() < 0.12, "σ = {sigma}: {ratio} vs {want}");
        assert!(((se_d / reps as f64) / (2.0 * (1.0 - sigma).powi(2) / tf) - 1.0).abs() < 0.1);
    }
}

#[test]
fn incomplete_gamma_matches_statrs() {
    use statrs::function::gamma::{gamma_lr, gamma_ur};
    for &a in &[0.5, 1.0, 2.5, 10.0, 50.0, 500.0] {
        for &x in &[0.01, 0.3, 1.0, 4.0, 9.0, 40.0, 120.0, 600.0] {
            let (lp, lq) = corrarms::special::ln_gamma_inc(a, x).unwrap();
            let (p, q) = (gamma_lr(a, x), gamma_ur(a, x));
            if p > 1e-280 {
                assert!((lp.exp() - p).abs() <= 1e-10 * p.max(1e-300).max(1e-12), "P({a},{x})");
            }
            if q > 1e-280 {
                assert!((lq.exp() - q).abs() <= 1e-10 * q.max(1e-12), "Q({a},{x}): {} vs {q}", lq.exp());
            }
        }
    }
}

proptest! {
    #[test]
    fn distance_estimate_is_non_negative(xs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..30)) {
        let mut table = PairStatsTable::new(2);
        for (t, &(a, b)) in xs.iter().enumerate() {
            table.update(&corrarms::model::Observation { t: t as u64, values: vec![(0, a), (1, b)] }).unwrap();
        }
        prop_assert!(table.diff_distance(0, 1).unwrap() >= 0.0);
        prop_assert!(table.diff_estimate(0, 1).unwrap() <= 1.0);
        prop_assert_eq!(table.diff_estimate(0, 1).unwrap(), table.diff_estimate(1, 0).unwrap());
    }
}
