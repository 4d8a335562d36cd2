use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clansim"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn every_command_runs_at_small_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["enumerate", "--L-max", "8"],
        &["alpha0", "--L-max", "8"],
        &["bounds"],
        &["sample", "--L-max", "10", "--window", "6"],
        &["estimate", "--L-max", "10", "--N", "6", "--window", "8", "--replicas", "500"],
        &["validate", "--L-max", "10", "--replicas", "500"],
        &["sweep", "--grid", "N=6,8"],
    ];
    for args in cases {
        let dir = tmp.path().join(args[0]);
        let o = run(&dir, args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let report = fs::read_to_string(dir.join(format!("{}.json", args[0]))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report).unwrap();
        assert_eq!(v["command"], args[0]);
        assert_eq!(v["config"]["seed"], 1);
    }
}

#[test]
fn tv_check_writes_its_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        tmp.path(),
        &["tv-check", "--L-max", "10", "--N", "4", "--window", "30", "--replicas", "1000"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["tv-check.json", "tv-check-histogram.csv", "tv-check-totals.csv"] {
        assert!(tmp.path().join(name).exists(), "{name}");
    }
    let totals = fs::read_to_string(tmp.path().join("tv-check-totals.csv")).unwrap();
    assert!(totals.starts_with("# config: {"));
    assert_eq!(totals.lines().count(), 1000 + 2);
}

#[test]
fn n_above_l_max_is_a_parameter_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["bounds", "--N", "20"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("L_max"), "{}", stderr(&o));
}

#[test]
fn beta_prime_below_beta_star_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["bounds", "--beta-prime", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("beta*"), "{}", stderr(&o));
}

#[test]
fn uncertified_beta_star_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["beta-star", "--tolerance", "0.1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn reports_are_not_overwritten_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["alpha0", "--L-max", "8"]).status.code(), Some(0));
    let again = run(tmp.path(), &["alpha0", "--L-max", "8"]);
    assert_eq!(again.status.code(), Some(2));
    assert!(stderr(&again).contains("--force"));
    let forced = run(tmp.path(), &["alpha0", "--L-max", "8", "--force"]);
    assert_eq!(forced.status.code(), Some(0));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"beta": 2.2, "N": 6, "seed": 9}"#).unwrap();
    let out = tmp.path().join("out");
    let o = run(&out, &["bounds", "--config", cfg.to_str().unwrap(), "--N", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("bounds.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["beta"], 2.2);
    assert_eq!(v["config"]["N"], 10);
    assert_eq!(v["config"]["seed"], 9);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"betta": 2.2}"#).unwrap();
    let o = run(tmp.path(), &["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csv_format_embeds_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["sweep", "--grid", "N=6,8", "--grid", "beta=2.0,2.2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(lines.count(), 1 + 4);
}
