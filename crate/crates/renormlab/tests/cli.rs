//! End-to-end tests of the `renormlab` binary: exit codes, report
//! envelopes, CSV schemas, and run-to-run determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_renormlab"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = bin().arg(flag).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{flag} exited nonzero");
    }
    let out = bin().arg("--help").output().unwrap();
    let text = stdout_str(&out);
    for sub in ["cascade", "geometry", "markov", "conjugacy", "lemma3"] {
        assert!(text.contains(sub), "help missing subcommand {sub}");
    }
}

#[test]
fn missing_config_and_bad_subcommand_exit_one() {
    let out = bin().arg("cascade").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_exponent_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"map": {"family": "affine", "t": 0.5, "lambda": 0.6}}"#,
    );
    let out = bin().args(["cascade", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error:"));
}

#[test]
fn cascade_json_envelope_and_row_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"map": {"family": "affine", "t": 2.0}, "depth": 3}"#,
    );
    let out = bin().args(["cascade", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!(v["tool_version"].is_string());
    assert_eq!(v["config_echo"]["command"], "cascade");
    assert_eq!(v["config_echo"]["depth"], 3);
    assert!(v["config_echo"]["derived"]["lambda_inf"].is_f64());
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    // lambda_1 is the golden-ratio parameter; delta needs three lambdas,
    // so exactly the middle row carries one at depth 3.
    let l1 = rows[0]["lambda"].as_f64().unwrap();
    assert!((l1 - 0.618_033_988_749_894_9).abs() < 1e-9);
    let deltas: Vec<_> = rows.iter().filter(|r| r["delta"].is_f64()).collect();
    assert_eq!(deltas.len(), 1);
}

#[test]
fn cascade_csv_schema_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.csv");
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"map": {{"family": "affine", "t": 2.0}}, "depth": 4,
                "format": "csv", "out": {:?}}}"#,
            out_path.to_str().unwrap()
        ),
    );
    let out = bin().args(["cascade", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# cascade"));
    assert_eq!(lines.next().unwrap(), "k,lambda,delta,alpha");
    assert_eq!(lines.count(), 4);
}

#[test]
fn depth_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"map": {"family": "affine", "t": 2.0}, "depth": 3}"#,
    );
    let out = bin()
        .args(["cascade", "--config", &cfg, "--depth", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"map": {"family": "moebius", "t": 2.0, "a": 1.0}, "depth": 5}"#,
    );
    let a = bin().args(["cascade", "--config", &cfg]).output().unwrap();
    let b = bin().args(["cascade", "--config", &cfg]).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn lemma3_csv_reports_golden_ratio_at_k_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"map": {"family": "affine", "t": 2.0}, "k_values": [0.0, 2.0],
            "format": "csv"}"#,
    );
    let out = bin().args(["lemma3", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# lemma3"));
    assert_eq!(lines.next().unwrap(), "t,K,w");
    assert!(text.contains("0.6180339887"), "missing golden-ratio root:\n{text}");
}

#[test]
fn geometry_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"map": {"family": "affine", "t": 2.0}, "depth": 5, "format": "csv"}"#,
    );
    let out = bin().args(["geometry", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "n,ratio_M_I,ratio_I_I,sup_N_hn");
}

#[test]
fn markov_csv_schema_and_word_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"map": {"family": "affine", "t": 2.0}, "n_max": 3, "word_len": 2,
            "level_cap": 2, "samples": 4, "format": "csv"}"#,
    );
    let out = bin().args(["markov", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# markov"));
    assert_eq!(lines.next().unwrap(), "word,|D(g_w)|,sup_N_times_D,derivative_ratio");
    // Single-symbol words for both sides of levels 0..=2 are present.
    for w in ["0,", "-0,", "1,", "-1,"] {
        assert!(text.lines().any(|l| l.starts_with(w)), "missing row for word {w}");
    }
}

#[test]
fn conjugacy_self_reports_reliable_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"map": {"family": "affine", "t": 2.0}, "n_max": 7,
            "itinerary_depth": 16, "scales": [4, 5], "qs_grid": 32}"#,
    );
    let out = bin().args(["conjugacy", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r["reliable"], true);
        // Self-conjugacy is the identity; ratios stay near 1.
        assert!(r["max_ratio"].as_f64().unwrap() < 1.05);
    }
    assert!(v["config_echo"]["derived"]["m_hat"].is_f64());
}
