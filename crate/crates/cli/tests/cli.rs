use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn tipfold(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tipfold"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = tipfold(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn simulate_slow_drift() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(dir.path(), &["simulate", "--mu0", "1", "--x0", "-0.5", "--eps", "0.1", "--A", "0", "--K", "10"]);
    assert!((v["mu_tp"].as_f64().unwrap() + 0.3156).abs() < 1e-3);
    let (header, rows) = read_csv(&dir.path().join("simulate.csv"));
    assert_eq!(header, ["t", "x", "mu", "region", "event_kind"]);
    assert_eq!(rows.last().unwrap()[4], "tip");
    let ts: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn simulate_fixed_point_does_not_tip() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(dir.path(), &["simulate", "--eps", "0", "--A", "0", "--mu0", "1", "--x0", "-0.4", "--tmax", "20"]);
    assert_eq!(v["tipped"], Value::Bool(false));
    assert_eq!(v["events"].as_array().unwrap().len(), 0);
}

#[test]
fn simulate_saddle_node() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(
        dir.path(),
        &["simulate", "--kind", "snb", "--alpha", "1", "--eps", "0.1", "--A", "0", "--K", "100", "--mu0", "1", "--x0", "0"],
    );
    let mu = v["mu_tp"].as_f64().unwrap();
    assert!(((mu + 0.5037) / 0.5037).abs() < 0.1);
}

#[test]
fn fold_rows() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(dir.path(), &["fold", "--omega", "5", "--A", "1"]);
    assert!((v[0]["mu_cf"].as_f64().unwrap() - 0.2471).abs() < 0.002);
    assert!((v[0]["mu_g"].as_f64().unwrap() - 0.3714).abs() < 5e-5);
    let v = ok_json(dir.path(), &["fold", "--omega", "0", "--A", "1"]);
    assert_eq!(v[0]["mu_cf"].as_f64(), Some(1.0));
    ok_json(dir.path(), &["fold", "--table"]);
    let (header, rows) = read_csv(&dir.path().join("fold.csv"));
    assert_eq!(header, ["omega", "mu_cf", "mu_g", "mu_cf_large_est", "mu_cf_small_est"]);
    assert_eq!(rows.len(), 23);
}

#[test]
fn omega_sweep_finds_transition() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(dir.path(), &["sweep", "--axis", "omega", "--grid", "0:2:101"]);
    let locs: Vec<f64> = v["transitions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["location"].as_f64().unwrap())
        .collect();
    assert!(locs.iter().any(|l| (0.30..=0.35).contains(l)), "{locs:?}");
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.transitions.json")).unwrap()).unwrap();
    assert_eq!(side, v);
    let (_, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 101);
}

#[test]
fn eps_sweep_bounded_by_fold() {
    let dir = TempDir::new().unwrap();
    ok_json(dir.path(), &["sweep", "--axis", "eps", "--grid", "0.005:0.1:20", "--omega", "5"]);
    let (header, rows) = read_csv(&dir.path().join("sweep.csv"));
    let i = header.iter().position(|h| h == "mu_tp").unwrap();
    let mu: Vec<f64> = rows.iter().map(|r| r[i].parse().unwrap()).collect();
    assert!(mu.iter().all(|&m| m <= 0.2471 + 1e-6));
}

#[test]
fn alpha_sweep_tip_times_increase() {
    let dir = TempDir::new().unwrap();
    ok_json(dir.path(), &["sweep", "--axis", "alpha", "--grid=-3:1:9L", "--x0", "0"]);
    let (header, rows) = read_csv(&dir.path().join("sweep.csv"));
    let i = header.iter().position(|h| h == "t_tp").unwrap();
    let t: Vec<f64> = rows.iter().map(|r| r[i].parse().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]), "{t:?}");
}

#[test]
fn phase_transition_counts() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(dir.path(), &["phase", "--omega", "1", "--eps", "0.02", "--A", "1", "--mu0-mult", "2"]);
    assert_eq!(v["n_max"].as_u64(), Some(8));
    let v = ok_json(dir.path(), &["phase", "--omega", "1", "--eps", "0.05", "--A", "1", "--mu0-mult", "2"]);
    assert_eq!(v["n_max"].as_u64(), Some(3));
    for key in ["Omega", "roots", "omega_star", "bounds", "jump_scale"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let v = ok_json(dir.path(), &["phase", "--A", "0"]);
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 1);
    assert_eq!(roots[0]["mu_r"].as_f64(), Some(0.0));
}

#[test]
fn estimate_and_orbit() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(dir.path(), &["estimate", "--eps", "0.1", "--K", "10"]);
    assert!((v["mu_eps"].as_f64().unwrap() + 0.3156).abs() < 1e-4);
    let v = ok_json(dir.path(), &["orbit", "--omega", "5", "--A", "1", "--mus", "0.3714,0.3"]);
    assert_eq!(v.as_array().unwrap().len(), 2);
    let (_, rows) = read_csv(&dir.path().join("orbit.csv"));
    assert_eq!(rows.len(), 2 * 1024);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| tipfold(d, args).status.code();

    let out = tipfold(d, &["simulate", "--K", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('K'));
    assert_eq!(code(&["sweep", "--axis", "omega", "--grid", "2:1:5"]), Some(2));
    assert_eq!(code(&["phase", "--eps", "0"]), Some(2));
    // a near-fold drift this slow oscillates past the event cap
    assert_eq!(
        code(&["simulate", "--eps", "5e-6", "--omega", "5", "--mu0", "0.5", "--x0", "-0.25"]),
        Some(3)
    );
    // every point is below the smoothing floor
    assert_eq!(code(&["sweep", "--axis", "alpha", "--grid=-12:-9:4L"]), Some(5));
}

#[test]
fn config_round_trip_and_precedence() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("cfg.json");
    let p = path.to_str().unwrap();
    let first = ok_json(dir.path(), &["simulate", "--eps", "0.0731", "--omega", "2.2", "--write-config", p]);
    let again = ok_json(dir.path(), &["simulate", "--config", p]);
    assert_eq!(first["config"], again["config"]);
    assert_eq!(first["mu_tp"], again["mu_tp"]);
    let over = ok_json(dir.path(), &["simulate", "--config", p, "--omega", "3"]);
    assert_eq!(over["config"]["omega"].as_f64(), Some(3.0));
    assert_eq!(over["config"]["eps"].as_f64(), Some(0.0731));
}

#[test]
fn manifest_lists_every_output_once() {
    let dir = TempDir::new().unwrap();
    ok_json(dir.path(), &["sweep", "--axis", "omega", "--grid", "0.5:1:6", "--prefix", "run1"]);
    let m: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run1.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "sweep");
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o.as_str().unwrap()).collect();
    assert_eq!(outputs.len(), 2);
    for o in outputs {
        assert!(Path::new(o).exists());
    }
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["run1.csv", "run1.manifest.json", "run1.transitions.json"]);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_tipfold"))
            .env("TIPFOLD_THREADS", threads)
            .args(["sweep", "--axis", "omega", "--grid", "0:2:41", "--prefix", threads, "--out-dir"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read_to_string(dir.path().join(format!("{threads}.csv"))).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}
