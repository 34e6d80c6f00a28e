use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn degencd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degencd"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn without_runtime(csv: &str) -> String {
    csv.lines()
        .map(|l| match l.split(',').collect::<Vec<_>>().as_slice() {
            [a, b, _] => format!("{a},{b}"),
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn missing_config_exits_2_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = degencd(&["solve", "--config", "does-not-exist.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn bad_invocations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(degencd(&[], dir.path()).status.code(), Some(2));
    assert_eq!(degencd(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(degencd(&["solve"], dir.path()).status.code(), Some(2), "solve needs a problem");
    fs::write(dir.path().join("typo.cfg"), "[integrator]\nclf_safety = 0.3\n").unwrap();
    let out = degencd(&["solve", "--problem", "p1", "--config", "typo.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("clf_safety"));
}

#[test]
fn kinetic_check_writes_lemma_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = degencd(&["kinetic-check", "--seed", "7", "--out", "k"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lemmas = fs::read_to_string(dir.path().join("k/lemmas.csv")).unwrap();
    assert!(lemmas.starts_with("lemma,params,value,bound,margin,pass\n"));
    assert!(lemmas.lines().skip(1).all(|l| l.ends_with(",true")));
    let summary = fs::read_to_string(dir.path().join("k/summary.txt")).unwrap();
    assert!(summary.contains("pass = true"));
}

#[test]
fn solve_writes_monitors_summary_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = degencd(
        &["solve", "--problem", "burgers-riemann", "--cells", "64", "--out", "s", "--snapshots", "--set", "output.checkpoints=4"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("s/report.csv")).unwrap();
    assert!(report.starts_with("name,time,value,bound,pass\n"));
    let snaps = fs::read_dir(dir.path().join("s/fields")).unwrap().count();
    assert_eq!(snaps, 5);
    let summary = fs::read_to_string(dir.path().join("s/summary.txt")).unwrap();
    assert!(summary.contains("monitors_pass = true"));
}

#[test]
fn convergence_is_reproducible_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("p1.cfg"),
        "command = convergence\nseed = 1\n[problem]\nname = advection-1d\n[study]\ngrids = 32, 64, 128\n",
    )
    .unwrap();
    for sub in ["a", "b"] {
        let out = degencd(&["convergence", "--config", "p1.cfg", "--out", sub], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |p: &str| fs::read_to_string(dir.path().join(p)).unwrap();
    let (a, b) = (read("a/report.csv"), read("b/report.csv"));
    assert!(a.starts_with("dx,error,runtime_s\n"));
    assert_eq!(without_runtime(&a), without_runtime(&b));
    assert_eq!(read("a/summary.txt"), read("b/summary.txt"));
    assert!(read("a/summary.txt").contains("pass = true"));
}

#[test]
fn failing_floor_exits_1_and_still_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = degencd(
        &["convergence", "--problem", "advection-1d", "--grids", "32,64", "--set", "study.floor=5", "--out", "f"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(fs::read_to_string(dir.path().join("f/summary.txt")).unwrap().contains("pass = false"));
}

#[test]
fn properties_command_runs_small_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = degencd(
        &["properties", "--seed", "3", "--out", "p", "--set", "properties.pairs=4", "--set", "kinetic.pairs=5", "--set", "kinetic.tuples=5", "--set", "kinetic.fields=1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("p/lemmas.csv").exists());
}
