use corrarms_harness::{
    compare_estimators, run_experiment, run_experiment_with, AlgorithmSpec, CapsConfig, Execution, ExperimentConfig,
    InstanceSpec,
};

fn config(algorithm: AlgorithmSpec, trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        instance: Some(InstanceSpec::LowerBound { rhos: vec![0.9, 0.5, 0.5, 0.4], h: 2 }),
        algorithm,
        trials,
        seed: 17,
        output: None,
        caps: CapsConfig::default(),
    }
}

/// CSV text with the timing column blanked.
fn csv_without_time(path: &std::path::Path) -> String {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "wall_time_micros").unwrap();
    let mut out = headers.iter().collect::<Vec<_>>().join(",");
    for rec in reader.records() {
        let rec = rec.unwrap();
        let row: Vec<&str> = rec.iter().enumerate().map(|(i, v)| if i == col { "" } else { v }).collect();
        out.push('\n');
        out.push_str(&row.join(","));
    }
    out
}

#[test]
fn oracle_mode_is_exact() {
    let r = run_experiment(&config(AlgorithmSpec::OracleMode { n: 200 }, 100)).unwrap();
    assert_eq!(r.summary.errors, 0);
    assert_eq!(r.summary.error_frequency, 0.0);
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let c = config(AlgorithmSpec::SrC { n: 400 }, 64);
    run_experiment(&c).unwrap().write(&a).unwrap();
    run_experiment(&c).unwrap().write(&b).unwrap();
    assert_eq!(csv_without_time(&a), csv_without_time(&b));
    let ja: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.with_extension("json")).unwrap()).unwrap();
    let jb: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(b.with_extension("json")).unwrap()).unwrap();
    assert_eq!(ja, jb);
    // rewriting replaces rather than appends
    run_experiment(&config(AlgorithmSpec::SrC { n: 400 }, 3)).unwrap().write(&a).unwrap();
    assert_eq!(csv::Reader::from_path(&a).unwrap().records().count(), 3);
}

#[test]
fn parallel_equals_serial() {
    let c = config(AlgorithmSpec::SeC { delta: 0.2 }, 40);
    let strip = |mut v: Vec<corrarms_harness::TrialRecord>| {
        v.iter_mut().for_each(|r| r.wall_time_micros = 0);
        v
    };
    let p = run_experiment_with(&c, Execution::Parallel).unwrap();
    let s = run_experiment_with(&c, Execution::Serial).unwrap();
    assert_eq!(strip(p.records), strip(s.records));
    assert_eq!(p.summary, s.summary);
}

#[test]
fn summary_is_consistent_with_records() {
    let r = run_experiment(&config(AlgorithmSpec::Naive { m: 4 }, 200)).unwrap();
    let wrong = r.records.iter().filter(|t| !t.correct).count() as f64;
    assert!(wrong > 0.0, "m = 4 should produce some errors");
    assert_eq!(r.summary.error_frequency, wrong / 200.0);
    assert!(r.summary.error_ci.low <= r.summary.error_frequency && r.summary.error_frequency <= r.summary.error_ci.high);
    assert!(r.records.iter().enumerate().all(|(i, t)| t.trial_index == i as u64));
    let per_arm = r.per_arm();
    assert!(per_arm.iter().zip(&r.records).all(|(a, t)| a.iter().sum::<u64>() == t.total_samples));
}

#[test]
fn se_c_meets_confidence_on_lower_bound_instance() {
    let mut c = config(AlgorithmSpec::SeC { delta: 0.1 }, 200);
    c.instance = Some(InstanceSpec::LowerBound { rhos: vec![0.95, 0.8, 0.6, 0.5], h: 3 });
    let r = run_experiment(&c).unwrap();
    let slack = 1.96 * (0.1f64 * 0.9 / 200.0).sqrt();
    assert!(r.summary.error_frequency <= 0.1 + slack, "{}", r.summary.error_frequency);
    assert_eq!(r.summary.max_steps, 0);
}

#[test]
fn estimator_comparison_shapes() {
    let rows = compare_estimators(&[0.0, 0.99], &[10, 100, 1000], 2000, 3).unwrap();
    assert_eq!(rows.len(), 6);
    for rho in [0.0, 0.99] {
        let cells: Vec<_> = rows.iter().filter(|r| r.rho == rho).collect();
        assert!(cells.windows(2).all(|w| w[1].mse_difference < w[0].mse_difference));
        assert!(cells.windows(2).all(|w| w[1].mse_classical < w[0].mse_classical));
    }
    let at = |rho: f64, t: u64| rows.iter().find(|r| r.rho == rho && r.t == t).unwrap();
    assert!((at(0.0, 100).ratio - 2.0).abs() < 0.25);
    assert!(at(0.99, 100).ratio <= 0.01);
    // compare_estimators is deterministic in its seed
    assert_eq!(rows, compare_estimators(&[0.0, 0.99], &[10, 100, 1000], 2000, 3).unwrap());
}
