//! End-to-end checks of the binary: exit codes, config diagnostics, output
//! formats, schema stability.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jscc"))
}

#[test]
fn bad_config_key_exits_2_with_line_info() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "trials = 100\nnot_a_key = 3\n").unwrap();
    let out = bin()
        .args(["bounds", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":2:"), "missing line info: {err}");
    assert!(err.contains("not_a_key"), "missing field info: {err}");
}

#[test]
fn invalid_field_value_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "lambda = 1.5\n").unwrap();
    let out = bin()
        .args(["protocol", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
}

#[test]
fn unknown_figure_id_exits_2() {
    let out = bin().args(["figure", "numeric9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_figure_id_exits_2() {
    let out = bin().args(["figure"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_to_stdout_with_stable_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "e_over_n0_db = 0,5,10\nb_list = 4\n").unwrap();
    let out = bin()
        .args(["bounds", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "mode,b,rho,alpha,lambda,mu,e_over_n0_db,bound_lower,bound_upper_1round,\
         bound_upper_2round,mc_mse,mc_stderr,avg_energy,retx_rate"
            .replace(' ', "")
    );
    assert_eq!(text.lines().filter(|l| l.starts_with("bounds")).count(), 3);
    // Same header for a different mode.
    let out2 = bin()
        .args(["protocol", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    let text2 = String::from_utf8(out2.stdout).unwrap();
    let header2 = text2.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, header2);
}

#[test]
fn jsonl_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "e_over_n0_db = 8\nb_list = 4\n").unwrap();
    let out = bin()
        .args([
            "bounds",
            "--config",
            cfg.to_str().unwrap(),
            "--format",
            "jsonl",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let meta: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(meta["tool"], "jscc");
    assert_eq!(meta["config"]["mode"], "bounds");
    let row: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(row["mode"], "bounds");
    assert!(row["bound_lower"].is_number());
    assert!(row["mc_mse"].is_null());
}

#[test]
fn cli_seed_and_trials_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "e_over_n0_db = 10\nb_list = 2\ntrials = 50\nseed = 1\n").unwrap();
    let out = bin()
        .args([
            "mc",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "9",
            "--trials",
            "200",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# seed = 9"));
    assert!(text.contains("# trials = 200"));
}
