use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowuplab"))
        .args(args)
        .current_dir(dir)
        .env_remove("BLOWUPLAB_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL_SIM: &str = r#"{
  "data": {"epsilon": 3.0},
  "solver": {"dr": 0.2, "horizon": 40.0}
}"#;

#[test]
fn unknown_command_and_keys_exit_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["plot"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(tmp.path(), "c.json", r#"{"solver": {"p": 2.0, "courant": 0.5}}"#);
    let out = run(&["simulate", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("courant"));
}

#[test]
fn specfun_verify_passes_and_detects_perturbed_k() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["specfun-verify", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/specfun-verify/specfun_report.json")).unwrap())
            .unwrap();
    let w = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "wronskian")
        .unwrap();
    assert!(w["observed"].as_f64().unwrap() <= 1e-9);

    let cfg = write_config(
        tmp.path(),
        "p.json",
        r#"{"specfun": {"evaluator": "perturbed-k", "perturbation": 0.01}}"#,
    );
    let out = run(&["specfun-verify", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wronskian"));

    let cfg = write_config(tmp.path(), "e.json", r#"{"specfun": {"z_values": []}}"#);
    assert_eq!(
        run(&["specfun-verify", "--config", &cfg, "--out", "o"], tmp.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn testfam_table_rows_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["testfam-table", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rd = csv::Reader::from_path(tmp.path().join("o/testfam-table/testfam_table.csv")).unwrap();
    let mut rows = 0;
    for rec in rd.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[8], "ok");
        let r: f64 = rec[2].parse().unwrap();
        let phi: f64 = rec[4].parse().unwrap();
        if r == 1.0 {
            assert_eq!(phi, 0.0);
        }
        assert!(rec[7].parse::<f64>().unwrap() <= 1e-6);
        rows += 1;
    }
    assert!(rows > 20);
}

#[test]
fn simulate_is_deterministic_and_manifested() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.json", SMALL_SIM);
    for o in ["a", "b"] {
        let out = run(
            &["simulate", "--config", &cfg, "--out", o, "--stride", "20"],
            tmp.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(tmp.path().join("a/simulate/snapshots.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/simulate/snapshots.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,r,u"));
    // 17 significant digits, '.' decimal point
    let first = lines.next().unwrap();
    for cell in first.split(',') {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{cell}");
    }

    let run_dir = tmp.path().join("a/simulate");
    let m = manifest(&run_dir);
    assert_eq!(m["outcome"]["exit_code"], 0);
    let files = m["files"].as_array().unwrap();
    let names: Vec<_> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert!(names.contains(&"snapshots.csv") && names.contains(&"run.json"));
    for f in files {
        let bytes = fs::read(run_dir.join(f["path"].as_str().unwrap())).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"].as_str().unwrap(), hex);
    }
    assert_eq!(m["config"]["solver"]["dr"], 0.2);
    let meta: Value = serde_json::from_str(&fs::read_to_string(run_dir.join("run.json")).unwrap()).unwrap();
    assert!(meta["t_num"].as_f64().is_some());
    assert_eq!(meta["g_monotone"], true);
}

#[test]
fn env_var_overrides_out_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.json", SMALL_SIM);
    let out = Command::new(env!("CARGO_BIN_EXE_blowuplab"))
        .args(["simulate", "--config", &cfg, "--out", "flag"])
        .current_dir(tmp.path())
        .env("BLOWUPLAB_OUT", tmp.path().join("env"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("env/simulate/manifest.json").exists());
    assert!(!tmp.path().join("flag").exists());
}

#[test]
fn horizon_exhaustion_exits_with_resource_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "h.json",
        r#"{"data": {"epsilon": 0.1}, "solver": {"dr": 0.2, "horizon": 10.0}}"#,
    );
    let out = run(&["simulate", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    let m = manifest(&tmp.path().join("o/simulate"));
    assert_eq!(m["outcome"]["status"], "resource");
    assert_eq!(m["files"].as_array().unwrap().len(), 2);
}

#[test]
fn nonpositive_velocity_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "n.json",
        r#"{"data": {"g": {"kind": "bump", "a": 1.5, "b": 2.5, "amplitude": -1.0}}}"#,
    );
    for cmd in ["simulate", "sweep", "diagnose"] {
        let out = run(&[cmd, "--config", &cfg, "--out", "o"], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("∫ g U dx > 0"), "{cmd}");
    }
}

#[test]
fn sweep_then_fit_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "w.json",
        r#"{
          "data": {"epsilons": [4.0, 3.0, 2.0, 1.5]},
          "solver": {"dr": 0.1, "horizon": 100.0},
          "sweep": {"bootstrap_horizon": 100.0},
          "fit": {"slope_tolerance": 10.0}
        }"#,
    );
    let out = run(&["sweep", "--config", &cfg, "--out", "o", "--jobs", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("o/sweep");
    let body = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(body.starts_with("epsilon,t_num,dr,threshold,converged\n"));
    assert_eq!(body.lines().count(), 5);
    assert!(dir.join("sweep_threshold_1e3.csv").exists());
    let fit: Value = serde_json::from_str(&fs::read_to_string(dir.join("fit.json")).unwrap()).unwrap();
    let slope = fit["fits"][0]["slope"].as_f64().unwrap();
    assert!(slope < 0.0);

    let csv_path = dir.join("sweep.csv");
    let fcfg = write_config(
        tmp.path(),
        "f.json",
        &format!(
            r#"{{"fit": {{"inputs": [{:?}], "slope_tolerance": 10.0}}}}"#,
            csv_path.to_string_lossy()
        ),
    );
    let out = run(&["fit", "--config", &fcfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let refit: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("o/fit/fit.json")).unwrap()).unwrap();
    assert!((refit["fits"][0]["slope"].as_f64().unwrap() - slope).abs() < 1e-12);

    let out = run(&["fit", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diagnose_writes_traces_and_probes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "d.json",
        r#"{
          "data": {"epsilon": 0.4},
          "solver": {"dr": 0.1},
          "diagnose": {"horizon": 20.0, "cutoff_radii": [10.0, 20.0], "y_radii": [10.0, 15.0, 20.0], "tfm_radius": 10.0}
        }"#,
    );
    let out = run(&["diagnose", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("o/diagnose");
    for f in ["g_trace.csv", "g_source_trace.csv", "f_beta_trace.csv", "probes.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let head = fs::read_to_string(dir.join("g_trace.csv")).unwrap();
    assert!(head.starts_with("t,value\n"));
    let probes: Value = serde_json::from_str(&fs::read_to_string(dir.join("probes.json")).unwrap()).unwrap();
    assert_eq!(probes["volume"]["expected_slope"], 0.0);
    assert!(
        probes["tfm"]["fine"]["residual"].as_f64().unwrap() < probes["tfm"]["coarse"]["residual"].as_f64().unwrap()
    );
    for m in probes["masses"].as_array().unwrap() {
        assert!(m["mass"].as_f64().unwrap() >= 0.0);
    }
}
