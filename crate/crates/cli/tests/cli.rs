use std::path::Path;
use std::process::{Command, Output};

fn ridemarket(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ridemarket")).args(args).output().expect("binary runs")
}

fn run_sweep(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--mode",
        "offline-greedy,online-nearest,online-maxmargin",
        "--drivers",
        "20,40",
        "--seeds",
        "2",
        "--set",
        "tasks=80",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    ridemarket(&args)
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_sweep(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 13);
    assert_eq!(
        lines[0],
        "mode,n_drivers,seed,total_revenue,drivers_profit,service_rate,avg_rev_per_driver,avg_tasks_per_driver,ir_violations,perf_ratio,wallclock_ms"
    );
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
}

#[test]
fn csv_is_identical_for_any_pool_size() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run_sweep(a.path(), &["--set", "threads=1"]).status.success());
    assert!(run_sweep(b.path(), &["--set", "threads=2"]).status.success());
    for name in ["results.csv", "summary.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn report_verify_recomputes_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_sweep(dir.path(), &[]).status.success());
    let report = dir.path().join("report.json");
    let out = ridemarket(&["report", "--report", report.to_str().unwrap(), "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("recomputed identically"));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_sweep(dir.path(), &["--set", "no_such_key=3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));

    let missing = ridemarket(&["run", "--config", "/nonexistent/sweep.conf"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn failed_cells_exit_with_two_and_keep_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    let out = ridemarket(&[
        "run",
        "--mode",
        "offline-greedy,exact",
        "--drivers",
        "5",
        "--set",
        "tasks=40",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exact_max_tasks"));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.contains("offline-greedy,5,0,"));
}

#[test]
fn ingest_then_bound_and_exact() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let inst = dir.path().join("market.json");
    assert!(ridemarket(&["synth", "--out", trace.to_str().unwrap(), "--trips", "200", "--seed", "3"]).status.success());
    let out = ridemarket(&[
        "ingest",
        "--trace",
        trace.to_str().unwrap(),
        "--out",
        inst.to_str().unwrap(),
        "--drivers",
        "3",
        "--tasks",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let parse = |out: Output| -> serde_json::Value {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    };
    let bound = parse(ridemarket(&["bound", "--instance", inst.to_str().unwrap()]));
    let exact = parse(ridemarket(&["exact", "--instance", inst.to_str().unwrap()]));
    let (z, opt) = (bound["objective"].as_f64().unwrap(), exact["objective"].as_f64().unwrap());
    assert!(opt <= z + 1e-6, "exact {opt} above bound {z}");
    assert!(bound["max_reduced_cost"].as_f64().unwrap() <= 1e-7);
}
