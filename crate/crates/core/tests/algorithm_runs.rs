mod common;

use common::random_correlation;
use corrarms::algorithms::{naive_policy, se_c, se_c_threshold, sr_c, sr_c_min_budget, sr_c_schedule, DEFAULT_MAX_SAMPLES};
use corrarms::model::{make_lower_bound_instance, GaussianArms};
use corrarms::{AlgorithmError, Caps, DistanceFeed, ProblemInstance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_instance(k: usize, h: usize, seed: u64) -> Option<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ProblemInstance::new(random_correlation(k, &mut rng), h).ok()
}

#[test]
fn oracle_feed_recovers_optimum() {
    for seed in 0..20 {
        let Some(inst) = random_instance(6, 3, seed) else { continue };
        let d = inst.distances();
        let n = 2 * sr_c_min_budget(6, 3);
        let mut src = GaussianArms::new(inst.matrix(), ChaCha8Rng::seed_from_u64(seed));
        let out = sr_c(&mut src, n, 3, DistanceFeed::Oracle(&d), Caps::default()).unwrap();
        assert_eq!(out.selected, inst.optimal_subset());
        let mut src = GaussianArms::new(inst.matrix(), ChaCha8Rng::seed_from_u64(seed));
        let out = naive_policy(&mut src, 3, 3, DistanceFeed::Oracle(&d), Caps::default()).unwrap();
        assert_eq!(out.selected, inst.optimal_subset());
    }
}

#[test]
fn oracle_feed_se_c_recovers_optimum() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for seed in 0..20 {
        // the oracle run still waits for the threshold to fall below U, so
        // keep the gap R_(h+1) ≥ 1.5 to bound the run length
        let rho_h: f64 = rng.random_range(0.6..0.95);
        let top = 1.0 - 1.5 * (1.0 - rho_h);
        let mut rhos: Vec<f64> = vec![rho_h];
        rhos.extend((0..4).map(|_| rng.random_range(0.0..top)));
        rhos[1..].sort_by(|a, b| b.total_cmp(a));
        let inst = make_lower_bound_instance(&rhos, 3).unwrap();
        let d = inst.distances();
        let mut src = GaussianArms::new(inst.matrix(), ChaCha8Rng::seed_from_u64(seed));
        let out = se_c(&mut src, 0.1, 3, DistanceFeed::Oracle(&d), DEFAULT_MAX_SAMPLES, Caps::default()).unwrap();
        assert_eq!(out.selected, inst.optimal_subset());
    }
}

#[test]
fn sr_c_spends_within_budget() {
    let inst = make_lower_bound_instance(&[0.9, 0.5, 0.5, 0.4, 0.3], 3).unwrap();
    let k = inst.dim();
    for n in [sr_c_min_budget(k, 3), 200, 1000, 5000] {
        let mut src = GaussianArms::new(inst.matrix(), ChaCha8Rng::seed_from_u64(n));
        let out = sr_c(&mut src, n, 3, DistanceFeed::Empirical, Caps::default()).unwrap();
        assert!(out.total_samples <= n, "{} > {n}", out.total_samples);
        assert_eq!(out.per_arm_samples.iter().sum::<u64>(), out.total_samples);
        assert_eq!(out.rounds.len(), k - 3);
        // a rejected arm is never sampled again
        let sched = sr_c_schedule(k, 3, n);
        for (r, round) in out.rounds.iter().enumerate() {
            let arm = round.rejected[0];
            assert_eq!(out.per_arm_samples[arm], sched[r]);
        }
    }
}

#[test]
fn budget_below_minimum_is_rejected() {
    let inst = make_lower_bound_instance(&[0.9, 0.5, 0.4], 2).unwrap();
    let min = sr_c_min_budget(4, 2);
    let mut src = GaussianArms::new(inst.matrix(), ChaCha8Rng::seed_from_u64(0));
    let err = sr_c(&mut src, min - 1, 2, DistanceFeed::Empirical, Caps::default()).unwrap_err();
    assert!(matches!(err, AlgorithmError::BudgetTooSmall { .. }));
}

#[test]
fn se_c_elimination_respects_threshold() {
    let inst = make_lower_bound_instance(&[0.95, 0.5, 0.5, 0.5], 2).unwrap();
    let k = inst.dim();
    let mut src = GaussianArms::new(inst.matrix(), ChaCha8Rng::seed_from_u64(9));
    let out = se_c(&mut src, 0.05, 2, DistanceFeed::Empirical, DEFAULT_MAX_SAMPLES, Caps::default()).unwrap();
    assert_eq!(out.selected.len(), 2);
    for round in &out.rounds {
        let thr = round.threshold.unwrap();
        assert_eq!(thr, se_c_threshold(k, round.step, 0.05));
        for (p, &arm) in round.active.iter().enumerate() {
            if round.rejected.contains(&arm) {
                assert!(round.u_values[p] >= thr);
            }
        }
    }
    let expected: u64 = out.rounds.iter().map(|r| r.active.len() as u64).sum();
    assert_eq!(out.total_samples, expected);
}

#[test]
fn se_c_cap_reports_partial_run() {
    let inst = make_lower_bound_instance(&[0.5, 0.49, 0.48], 2).unwrap();
    let mut src = GaussianArms::new(inst.matrix(), ChaCha8Rng::seed_from_u64(1));
    match se_c(&mut src, 0.01, 2, DistanceFeed::Empirical, 400, Caps::default()) {
        Err(AlgorithmError::MaxStepsExceeded(partial)) => assert!(partial.total_samples <= 400),
        other => panic!("expected cap, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn schedule_is_monotone_and_fits(k in 3usize..12, h_off in 1usize..10, extra in 0u64..5000) {
        let h = 2 + h_off % (k - 2);
        prop_assume!(h < k);
        let n = sr_c_min_budget(k, h) + extra;
        let s = sr_c_schedule(k, h, n);
        prop_assert!(s[0] >= 1);
        prop_assert!(s.windows(2).all(|w| w[0] <= w[1]));
        let spent: u64 = s.iter().sum::<u64>() + h as u64 * s[s.len() - 1];
        prop_assert!(spent <= n);
    }

    #[test]
    fn same_seed_same_run(seed in any::<u64>()) {
        let inst = make_lower_bound_instance(&[0.9, 0.6, 0.4], 2).unwrap();
        let run = |s| {
            let mut src = GaussianArms::new(inst.matrix(), ChaCha8Rng::seed_from_u64(s));
            sr_c(&mut src, 300, 2, DistanceFeed::Empirical, Caps::default()).unwrap()
        };
        prop_assert_eq!(run(seed), run(seed));
    }
}
