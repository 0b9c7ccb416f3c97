use std::path::Path;
use std::process::{Command, Output};

fn corrarms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrarms")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen(dir: &Path) -> String {
    let path = dir.join("inst.json");
    let o = corrarms(&["gen-instance", "--family", "lower-bound", "--rhos", "0.9,0.5,0.3", "--h", "2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path.to_str().unwrap().to_owned()
}

#[test]
fn describe_reports_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path());
    let o = corrarms(&["describe", "--instance", &inst]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("S* = [0, 1]"), "{text}");
    assert!(text.contains("R[2] = 5"), "{text}");
    assert!(text.contains("H_C = "));
    assert!(text.contains("logbar(K/h) = "));
}

#[test]
fn run_inline_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path());
    let out = dir.path().join("runs.csv");
    let o = corrarms(&[
        "run", "--instance", &inst, "--algo", "sr-c", "--n", "300", "--trials", "20", "--seed", "4", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv_text = std::fs::read_to_string(&out).unwrap();
    assert!(csv_text.starts_with("trial_index,seed,correct,selected,total_samples,per_arm_samples,wall_time_micros,terminal_reason"));
    assert_eq!(csv_text.lines().count(), 21);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary["trials"], 20);
    assert_eq!(summary["algorithm"], "sr_c");
}

#[test]
fn run_from_toml_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "trials = 10\nseed = 2\n[instance]\nkind = \"lower_bound\"\nrhos = [0.9, 0.5, 0.3]\nh = 2\n[algorithm]\nname = \"naive\"\nm = 50\n",
    )
    .unwrap();
    let o = corrarms(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("naive: 10 trials"));
}

#[test]
fn exit_codes() {
    // validation
    let o = corrarms(&["run", "--algo", "naive", "--m", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = corrarms(&["gen-instance", "--rhos", "0.5,0.9", "--h", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = corrarms(&["verify-bounds", "--suite", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    // I/O
    let o = corrarms(&["describe", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(o.status.code(), Some(3));
    // success
    let o = corrarms(&["verify-bounds", "--suite", "lemma7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("lemma7: pass"));
}

#[test]
fn compare_estimators_prints_table() {
    let o = corrarms(&["compare-estimators", "--rhos", "0.5", "--ts", "10,100", "--replications", "200"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);
}
