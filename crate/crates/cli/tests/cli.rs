use std::path::Path;
use std::process::{Command, Output};

fn heisenberg(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heisenberg"))
        .args(args)
        .env("HEISENBERG_OUT", out)
        .output()
        .expect("binary runs")
}

#[test]
fn negative_degree_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = heisenberg(&["verify", "basis", "--max-degree", "-1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max-degree"));
}

#[test]
fn unknown_suite_and_zero_lambda_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(heisenberg(&["verify", "everything"], dir.path()).status.code(), Some(2));
    let out = heisenberg(&["verify", "basis", "--lambda", "1,0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
}

#[test]
fn basis_report_is_byte_stable_and_honours_the_env_dir() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = heisenberg(&["verify", "basis", "--seed", "5"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let ja = std::fs::read(a.path().join("report.json")).unwrap();
    let jb = std::fs::read(b.path().join("report.json")).unwrap();
    assert_eq!(ja, jb);
    assert_eq!(
        std::fs::read(a.path().join("report.txt")).unwrap(),
        std::fs::read(b.path().join("report.txt")).unwrap()
    );
    let report: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(report["pass"], true);
    let rec = &report["records"][0];
    for key in ["name", "anchor", "measured", "tolerance", "pass"] {
        assert!(rec.get(key).is_some(), "missing {key}");
    }
    assert!(a.path().join("timing.json").exists());
}

#[test]
fn impossible_tolerance_fails_with_exit_one_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let out = heisenberg(&["verify", "basis", "--tol-basis", "1e-300"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 3, "max_degree": 3, "lambdas": [2.0]}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = heisenberg(&["verify", "basis", "--config", cfg, "--seed", "8", "--format", "csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("name,anchor,measured,tolerance,bound,pass\n"));
    assert!(csv.contains("basis.scaled_gram[lambda=2]"));
    assert!(!csv.contains("lambda=1]"));

    std::fs::write(dir.path().join("bad.json"), r#"{"unknown": 1}"#).unwrap();
    let bad = dir.path().join("bad.json");
    let out = heisenberg(&["verify", "basis", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn demo_recovers_the_synthesized_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = heisenberg(&["demo", "factorize", "--blocks", "2", "--dim-residual", "3", "--seed", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("demo_factorize.json")).unwrap()).unwrap();
    assert_eq!(v["recovered"]["blocks"], 2);
    assert_eq!(v["recovered"]["residual_dim"], 3);
    assert_eq!(v["target_dim"], 17);
}

#[test]
fn empty_sweep_writes_the_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = heisenberg(&["export", "convergence", "--sweep="], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv, "N,unitarity_defect,representation_defect,plancherel_defect\n");
}

#[test]
fn convergence_is_monotone_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = heisenberg(&["export", "convergence", "--sweep", "2,4,6,10"], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let csv = std::fs::read_to_string(a.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.as_bytes(), std::fs::read(b.path().join("convergence.csv")).unwrap());
    let unitarity: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(unitarity.len(), 4);
    assert!(unitarity.windows(2).all(|w| w[1] <= w[0]), "{unitarity:?}");
}

#[test]
fn spec_dump_then_load_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.bin");
    let f = file.to_str().unwrap();
    let out = heisenberg(&["spec", "dump", "--blocks", "1", "--dim-residual", "2", "--max-degree", "3", "--file", f], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = heisenberg(&["spec", "load", f], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("spec_load.json")).unwrap()).unwrap();
    assert_eq!(v["recovered"]["blocks"], 1);
    assert_eq!(v["recovered"]["residual_dim"], 2);

    // A truncated archive is rejected.
    let bytes = std::fs::read(&file).unwrap();
    std::fs::write(&file, &bytes[..bytes.len() - 8]).unwrap();
    assert_eq!(heisenberg(&["spec", "load", f], dir.path()).status.code(), Some(1));
}

#[test]
fn verify_all_passes_at_the_default_scale() {
    let dir = tempfile::tempdir().unwrap();
    let out = heisenberg(&["verify", "all", "--n", "1", "--max-degree", "6", "--seed", "42"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    let records = report["records"].as_array().unwrap();
    assert!(records.len() >= 25);
    assert!(records.iter().all(|r| r["pass"] == true));
    assert_eq!(report["environment"]["seed"], 42);
}
