use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavitylab"))
        .args(args)
        .current_dir(golden_dir())
        .env_remove("CAVITYLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Compares against the stored file; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

#[test]
fn uniform_cycle_fixture() {
    let instance = stdout_ok(&["--seed", "11", "gen", "--model", "uniform", "--i2", "0.3", "--graph", "cycle", "--n", "6"]);
    check_golden("uniform_cycle6.json", &instance);
    let solved = stdout_ok(&["--threads", "1", "solve-exact", "uniform_cycle6.json"]);
    check_golden("uniform_cycle6.solve.json", &solved);
    let ce = stdout_ok(&["--threads", "1", "ce", "uniform_cycle6.json", "--depth", "4"]);
    check_golden("uniform_cycle6.ce4.json", &ce);

    let solved: Value = serde_json::from_str(&solved).unwrap();
    let ce: Value = serde_json::from_str(&ce).unwrap();
    assert!(solved["optimum"].is_f64());
    assert!(solved["argmax"].is_array());
    assert_eq!(ce["failures"], 0);
    assert_eq!(ce["nodes"].as_array().unwrap().len(), 6);
}

#[test]
fn mwis_path_fixture() {
    let instance = stdout_ok(&["--seed", "3", "gen", "--model", "mwis-exp", "--graph", "path", "--n", "8"]);
    check_golden("mwis_path8.json", &instance);
    let run = stdout_ok(&["--threads", "1", "mwis", "mwis_path8.json", "--epsilon", "0.3", "--depth", "4"]);
    check_golden("mwis_path8.run.json", &run);
    let tree = stdout_ok(&["--threads", "1", "solve-exact", "mwis_path8.json", "--method", "tree"]);
    check_golden("mwis_path8.tree.json", &tree);

    let run: Value = serde_json::from_str(&run).unwrap();
    for key in ["chosen_set", "kept_nodes", "weight", "epsilon", "depth", "seed"] {
        assert!(run.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn decay_csv_fixture() {
    let csv = stdout_ok(&["--seed", "5", "--threads", "1", "decay", "--trials", "20", "--depths", "1,2", "--n", "6"]);
    check_golden("decay_cycle6.csv", &csv);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(cavitylab::experiments::CSV_HEADER));
    assert_eq!(lines.count(), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["ce", "uniform_cycle6.json"]).status.code(), Some(1));

    let missing = run(&["solve-exact", "does_not_exist.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert!(err["error"].is_string() && err["message"].is_string());

    let bad = run(&["mwis", "mwis_path8.json", "--epsilon", "1.5"]);
    assert_eq!(bad.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(err["error"], "InvalidParams");
    assert_eq!(err["parameter"], "epsilon");
}

#[test]
fn json_experiment_output_has_report_fields() {
    let out = stdout_ok(&["--seed", "2", "--format", "json", "moment-check", "--graph", "path", "--n", "3", "--node", "1", "--trials", "200"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    for key in ["experiment", "config", "rows", "summary", "wall_time_secs", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["config"]["seed"], 2);
}
