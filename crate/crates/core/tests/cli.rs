use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn polyrlt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyrlt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn instance(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("instances")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn optimal_solve_exits_zero_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let log = dir.path().join("nodes.jsonl");
    let out = polyrlt(&[
        "solve",
        &instance("mixed_bilinear.poly"),
        "--json",
        json.to_str().unwrap(),
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["status"], "optimal");
    assert!((report["objective"].as_f64().unwrap() + 10.0).abs() < 1e-6);
    for line in std::fs::read_to_string(&log).unwrap().lines() {
        let ev: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(ev.get("node_id").is_some());
    }
}

#[test]
fn maximization_reports_in_the_original_sense() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = polyrlt(&["solve", &instance("circle_max.poly"), "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!((report["objective"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-3);
}

#[test]
fn infeasible_instance_exits_one() {
    assert_eq!(code(&polyrlt(&["solve", &instance("empty_region.poly")])), 1);
}

#[test]
fn node_limit_exits_two() {
    let out = polyrlt(&["solve", &instance("quartic_box.poly"), "--node-limit", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_sixty_four() {
    let q = instance("quartic_box.poly");
    for args in [
        vec!["solve"],
        vec!["solve", q.as_str(), "--branching-rule", "widest"],
        vec!["solve", q.as_str(), "--time-limit", "0"],
        vec!["solve", q.as_str(), "--integer-mode", "rlt-first", "--milp-depth", "3"],
        vec!["solve", "/nonexistent/file.poly"],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&polyrlt(&args)), 64, "{args:?}");
    }
    assert_eq!(code(&polyrlt(&["--help"])), 0);
}

#[test]
fn bench_then_profile() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    std::fs::create_dir(&inst).unwrap();
    for name in ["quartic_box.poly", "mixed_bilinear.poly", "cubic_integer.poly"] {
        std::fs::copy(instance(name), inst.join(name)).unwrap();
    }
    let configs: PathBuf = dir.path().join("configs.json");
    std::fs::write(
        &configs,
        r#"[{"name": "dual", "config": {}},
            {"name": "sum", "config": {"branching_rule": "sum", "integer_mode": "rlt_first"}}]"#,
    )
    .unwrap();
    let records = dir.path().join("records.csv");
    let out = polyrlt(&[
        "bench",
        inst.to_str().unwrap(),
        "--configs",
        configs.to_str().unwrap(),
        "--workers",
        "2",
        "--records",
        records.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Unsolved"));
    let csv = std::fs::read_to_string(&records).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2);

    let out = polyrlt(&["profile", records.to_str().unwrap(), "--metric", "time"]);
    assert_eq!(code(&out), 0);
    let profile = String::from_utf8_lossy(&out.stdout);
    assert!(profile.lines().count() > 1);
    assert!(profile.contains("dual") && profile.contains("sum"));
}
