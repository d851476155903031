//! Black-box tests of the `freeclt` binary: exit codes, output file
//! layout, byte-level determinism across runs and thread counts, and
//! strict-mode warning promotion.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_freeclt"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn freeclt")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

const RATES_CONFIG: &str = r#"{
  "measure": { "type": "two_atom", "p": 0.8 },
  "n_list": [16, 32, 64, 128],
  "resolution": 1001
}"#;

#[test]
fn rates_pass_and_emit_full_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "config.json", RATES_CONFIG);
    let out = dir.path().join("out");
    let res = run(
        &["rates", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );

    let csv = read(&out, "rates.csv");
    assert!(csv.starts_with("n,D,nD,Phi_rel,nPhi_rel,L1,sqrtn_L1,meixner_gap,eta_n,tail_mass\n"));
    assert_eq!(csv.lines().count(), 5);
    // every float is emitted with 17 significant digits
    let first_row = csv.lines().nth(1).unwrap();
    for field in first_row.split(',').skip(1) {
        let (mantissa, _) = field.split_once('e').expect("scientific notation");
        let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
        assert_eq!(digits, 17, "field {field}");
    }

    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    assert_eq!(summary["command"], "rates");
    assert_eq!(summary["pass"], true);
    let bands = summary["band_checks"].as_array().unwrap();
    assert!(bands.iter().all(|c| c["pass"] == true));
    assert!(bands
        .iter()
        .any(|c| c["name"].as_str().unwrap().contains("D")));
}

#[test]
fn rates_outputs_are_byte_identical_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "config.json", RATES_CONFIG);
    let outs: Vec<_> = (0..3).map(|k| dir.path().join(format!("out{k}"))).collect();
    let envs = [
        vec![],
        vec![("FREECLT_THREADS", "1")],
        vec![("FREECLT_THREADS", "2")],
    ];
    for (out, env) in outs.iter().zip(&envs) {
        let res = run(
            &["rates", "--config", &cfg, "--out", out.to_str().unwrap()],
            env,
        );
        assert_eq!(res.status.code(), Some(0));
    }
    for name in ["rates.csv", "summary.json"] {
        let base = read(&outs[0], name);
        assert_eq!(
            base,
            read(&outs[1], name),
            "{name} differs with FREECLT_THREADS=1"
        );
        assert_eq!(
            base,
            read(&outs[2], name),
            "{name} differs with FREECLT_THREADS=2"
        );
    }
}

#[test]
fn strict_mode_promotes_warnings_to_failure() {
    // The two-atom Meixner gap collapses once truncation stops cutting
    // the representer atoms, so its informational fit draws a low-r2
    // warning: ignored normally, fatal under --strict.
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "config.json", RATES_CONFIG);
    let out = dir.path().join("out");
    let res = run(
        &[
            "rates",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--strict",
        ],
        &[],
    );
    assert_eq!(res.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    assert_eq!(summary["pass"], true, "hard checks still pass");
    assert!(!summary["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn check_names_the_violated_invariant_for_a_corrupted_measure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "config.json",
        r#"{
          "measure": { "type": "atomic", "atoms": [[-1.0, 0.45], [1.0, 0.45]] },
          "n_list": [8, 16]
        }"#,
    );
    let out = dir.path().join("out");
    let res = run(
        &["check", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    assert_eq!(summary["pass"], false);
    let checks = summary["checks"].as_array().unwrap();
    let config_valid = checks.iter().find(|c| c["name"] == "config_valid").unwrap();
    assert_eq!(config_valid["pass"], false);
    assert!(config_valid["measured"]
        .as_str()
        .unwrap()
        .contains("weights sum"));
}

#[test]
fn check_surfaces_a_degenerate_window_scale() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "config.json",
        r#"{
          "measure": { "type": "two_atom", "p": 0.8 },
          "n_list": [8, 16],
          "eps1_scale": 0.0
        }"#,
    );
    let out = dir.path().join("out");
    let res = run(
        &["check", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    let checks = summary["checks"].as_array().unwrap();
    let config_valid = checks.iter().find(|c| c["name"] == "config_valid").unwrap();
    assert_eq!(config_valid["pass"], false);
    assert!(config_valid["measured"]
        .as_str()
        .unwrap()
        .contains("eps1_scale"));
}

#[test]
fn unreadable_or_malformed_configs_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let res = run(&["rates", "--config", missing.to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(2));

    let cfg = write_config(dir.path(), "bad.json", "{ not json");
    let res = run(&["check", "--config", &cfg], &[]);
    assert_eq!(res.status.code(), Some(2));

    // unknown fields are schema violations, not silently ignored
    let cfg = write_config(
        dir.path(),
        "unknown.json",
        r#"{ "measure": { "type": "two_atom", "p": 0.8 }, "n_list": [8], "resolutoin": 100 }"#,
    );
    let res = run(&["rates", "--config", &cfg], &[]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn symmetric_and_degenerate_inputs_pass_without_slope_gates() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "config.json",
        r#"{
          "measure": { "type": "semicircle", "t": 1.0 },
          "n_list": [8, 16, 32, 64],
          "resolution": 801
        }"#,
    );
    let out = dir.path().join("out");
    let res = run(
        &["rates", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    assert_eq!(summary["pass"], true);
    let degenerate = summary["degenerate"].as_array().unwrap();
    assert!(degenerate.iter().any(|q| q == "D"));
}

#[test]
fn density_emits_one_table_per_order() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "config.json",
        r#"{
          "measure": { "type": "two_atom", "p": 0.8 },
          "n_list": [8, 16],
          "resolution": 801
        }"#,
    );
    let out = dir.path().join("out");
    let res = run(
        &["density", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );
    for n in [8, 16] {
        let csv = read(&out, &format!("density_n{n}.csv"));
        assert!(csv.starts_with("x,p_n,v_n,weighted_residual\n"));
        assert_eq!(csv.lines().count(), 802);
    }
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    for entry in summary["density"].as_array().unwrap() {
        let mass = entry["mass"].as_f64().unwrap();
        assert!((mass - 1.0).abs() < 1e-3, "mass {mass}");
    }
}

#[test]
fn entropy_and_fisher_write_reduced_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "config.json",
        r#"{
          "measure": { "type": "two_atom", "p": 0.8 },
          "n_list": [8, 16, 32],
          "resolution": 801
        }"#,
    );
    let out_e = dir.path().join("entropy");
    let res = run(
        &[
            "entropy",
            "--config",
            &cfg,
            "--out",
            out_e.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(res.status.code(), Some(0));
    assert!(read(&out_e, "rates.csv").starts_with("n,D,n_scaled_D\n"));

    let out_f = dir.path().join("fisher");
    let res = run(
        &["fisher", "--config", &cfg, "--out", out_f.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(0));
    assert!(read(&out_f, "rates.csv").starts_with("n,Phi_rel,n_scaled_Phi_rel\n"));
}

#[test]
fn out_dir_falls_back_to_the_config_value() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("from-config");
    let body = format!(
        r#"{{
          "measure": {{ "type": "two_atom", "p": 0.8 }},
          "n_list": [8, 16, 32],
          "resolution": 801,
          "out_dir": {}
        }}"#,
        serde_json::to_string(out.to_str().unwrap()).unwrap()
    );
    let cfg = write_config(dir.path(), "config.json", &body);
    let res = run(&["entropy", "--config", &cfg], &[]);
    assert_eq!(res.status.code(), Some(0));
    assert!(out.join("rates.csv").exists());
    assert!(out.join("summary.json").exists());
}
