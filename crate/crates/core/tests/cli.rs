//! End-to-end runs of the `capwalk` binary.

use std::path::Path;
use std::process::{Command, Output};

use capwalk::expcli::{read_records, Format};
use capwalk::walk::WalkPath;
use serde_json::Value;

fn capwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capwalk"))
        .args(args)
        .env_remove("CAPWALK_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn green_and_pair_capacity() {
    let g = json(&capwalk(&["green", "--point", "0,0,0", "--point", "-1,0,0"]));
    let g0 = g[0]["green"].as_f64().unwrap();
    let g1 = g[1]["green"].as_f64().unwrap();
    assert!((g0 - 1.516_386_06).abs() < 1e-8);
    assert!((g0 - g1 - 1.0).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pair.txt");
    write(&pts, "0 0 0\n1 0 0\n");
    let c = json(&capwalk(&["cap", "--points", pts.to_str().unwrap()]));
    assert!((c["capacity"].as_f64().unwrap() - 2.0 / (g0 + g1)).abs() < 1e-12);
    assert_eq!(c["points"], 2);
}

#[test]
fn ball_capacity_reports_exactness() {
    let c = json(&capwalk(&["cap", "--ball", "3"]));
    assert_eq!(c["exact"], true);
    let v = c["value"].as_f64().unwrap();
    assert!(v > 4.0 && v < 2.0 * std::f64::consts::PI / 3.0 * 4.0, "{c}");
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walk.txt");
    let p = path.to_str().unwrap();
    let out = capwalk(&["--seed", "3", "simulate", "--n", "200", "--out", p]);
    assert!(out.status.success());
    let walk = WalkPath::load(&path).unwrap();
    assert_eq!(walk.len(), 200);

    let again = dir.path().join("again.txt");
    capwalk(&["--seed", "3", "simulate", "--n", "200", "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());

    let e = json(&capwalk(&["--seed", "1", "estimate", "--path", p, "--samples", "100"]));
    let exact = capwalk::capacity::capacity_exact(walk.range()).unwrap();
    let (v, se) = (e["value"].as_f64().unwrap(), e["stderr"].as_f64().unwrap());
    assert!((v - exact).abs() < 5.0 * se, "{v} ± {se} vs {exact}");
}

#[test]
fn construct_and_realize() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sphere.txt");
    let out = capwalk(&[
        "construct",
        "--kind",
        "sphere",
        "--n",
        "100000",
        "--k",
        "0.05",
        "--realize",
        "deterministic",
        "--path-out",
        path.to_str().unwrap(),
    ]);
    let b = json(&out);
    assert_eq!(b["kind"], "sphere");
    let w = WalkPath::load(&path).unwrap();
    assert!(w.len() > 100_000);
    let j3 = b["j3"].as_f64().unwrap();
    assert!(w.diameter() <= j3 + 2.0);
}

#[test]
fn experiment_files_are_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(
        &cfg,
        "suite = \"limsup-sweep\"\nn_grid = [2000]\nseed_count = 3\n[estimator]\nsamples_per_point = 40\nexact_max_points = 100\n",
    );
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let o = capwalk(&[
            "--threads",
            threads,
            "experiment",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read_records(&out, Format::Csv).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("3", "b.csv");
    assert_eq!(a.len(), 3);
    let strip = |v: &[capwalk::expcli::ResultRecord]| v.iter().map(|r| r.without_timestamp()).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
    assert!(a.iter().all(|r| r.error.is_none() && r.cap.is_some()));
}

#[test]
fn seed_flag_overrides_seed_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(&cfg, "suite = \"identity-suite\"\nseeds = [1, 2]\n[identity]\ncases = 2\n");
    let out = capwalk(&["--seed", "77", "experiment", "--config", cfg.to_str().unwrap(), "--format", "jsonl"]);
    assert!(out.status.success());
    let lines: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|r| r["seed"] == 77));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    write(&cfg, "suite = \"identity-suite\"\n[identity]\ncasez = 3\n");
    let out = capwalk(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("casez"));

    let missing = dir.path().join("missing.toml");
    let out = capwalk(&["experiment", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.toml"));
}

#[test]
fn bad_input_is_reported() {
    let out = capwalk(&["cap", "--ball", "-1"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}
