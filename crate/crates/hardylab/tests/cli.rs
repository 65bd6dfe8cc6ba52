//! End-to-end runs of the experiment runner: config ingestion, exit codes,
//! output files, and byte-level determinism of the emitted data.

use std::fs;
use std::path::Path;

use hardylab::cli::{run, run_config, ExperimentConfig};

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "evolve.json",
        r#"{
            "name": "free",
            "kind": "evolve",
            "seed": 3,
            "grid": {"half_width": 20.0, "points": 256},
            "flow": {"a_coef": 0.0, "b_coef": 1.0},
            "initial": {"c_re": 1.0},
            "times": {"start": 0.0, "end": 1.0, "count": 6}
        }"#,
    );
    let out = dir.path().join("out");
    let code = run(&config, &out, Some(2), false);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("free_evolution.csv")).unwrap();
    assert!(csv.starts_with("t,norm,oracle_err\n"));
    assert_eq!(csv.lines().count(), 7);
    let summary = fs::read_to_string(out.join("free_summary.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(parsed["pass"], serde_json::Value::Bool(true));
    assert_eq!(parsed["kind"], "evolve");
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.json", "{ this is not json");
    let code = run(&config, &dir.path().join("out"), None, false);
    assert_eq!(code, 2);
    // Out-of-range parameter is also a config error.
    let config = write_config(
        dir.path(),
        "bad2.json",
        r#"{
            "name": "bad",
            "kind": "convexity",
            "grid": {"half_width": 20.0, "points": 256},
            "flow": {"a_coef": 0.0, "b_coef": 1.0},
            "initial": {"c_re": 1.0},
            "times": {"start": 0.0, "end": 0.4, "count": 11},
            "weight": {"kind": "static_gaussian", "gamma": -0.5}
        }"#,
    );
    let code = run(&config, &dir.path().join("out"), None, false);
    assert_eq!(code, 2);
    assert_eq!(run(Path::new("/nonexistent/config.json"), &dir.path().join("out"), None, false), 2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sweep.json",
        r#"{
            "name": "sweep",
            "kind": "carleman",
            "seed": 99,
            "operators": ["schrodinger", "parabolic"],
            "mus": [1.0],
            "epsilons": [0.5],
            "rs": [1.0, 5.0],
            "bumps": 3,
            "resolution": 64
        }"#,
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert_eq!(run(&config, &out_a, Some(2), false), 0);
    assert_eq!(run(&config, &out_b, Some(2), false), 0);
    let csv_a = fs::read(out_a.join("sweep_sweep.csv")).unwrap();
    let csv_b = fs::read(out_b.join("sweep_sweep.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "CSV must be byte-identical across runs");

    // Summaries agree once the runtime field is dropped.
    let strip = |path: &Path| {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("runtime_ms");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(
        strip(&out_a.join("sweep_summary.json")),
        strip(&out_b.join("sweep_summary.json"))
    );
}

#[test]
fn seed_env_var_overrides_config() {
    let text = r#"{
        "name": "sweep",
        "kind": "carleman",
        "seed": 5,
        "operators": ["schrodinger"],
        "mus": [1.0],
        "epsilons": [0.5],
        "rs": [1.0],
        "bumps": 2,
        "resolution": 64
    }"#;
    let config = ExperimentConfig::from_json(text).unwrap();
    let baseline = run_config(&config, false).unwrap();
    std::env::set_var("HARDYLAB_SEED", "77");
    let overridden = run_config(&config, false).unwrap();
    std::env::remove_var("HARDYLAB_SEED");
    assert_eq!(overridden.seed, 77);
    assert_eq!(baseline.seed, 5);
    assert_ne!(
        baseline.tables[0].to_csv(),
        overridden.tables[0].to_csv(),
        "a different seed must draw different bumps"
    );
}

#[test]
fn carleman_csv_has_one_row_per_combination() {
    let text = r#"{
        "name": "rows",
        "kind": "carleman",
        "seed": 1,
        "operators": ["schrodinger"],
        "mus": [0.5, 1.0],
        "epsilons": [0.1, 0.5],
        "rs": [1.0],
        "bumps": 3,
        "resolution": 64
    }"#;
    let config = ExperimentConfig::from_json(text).unwrap();
    let result = run_config(&config, false).unwrap();
    let sweep = &result.tables[0];
    assert_eq!(sweep.rows.len(), 3 * 2 * 2);
    assert_eq!(sweep.header, "bump,mu,epsilon,r,operator,lhs,rhs,margin,pass");
    // One margin heat-table per (operator, R).
    assert_eq!(result.tables.len(), 2);
}

#[test]
fn counterexample_table_shape() {
    let text = r#"{
        "name": "ce",
        "kind": "counterexample",
        "t_max": 2.0,
        "step": 0.001,
        "r_values": [1.0],
        "halfwidths": [5.0, 10.0, 20.0, 40.0]
    }"#;
    let config = ExperimentConfig::from_json(text).unwrap();
    let result = run_config(&config, false).unwrap();
    assert!(result.pass, "{:?}", result.assertions);
    let divergence = result
        .tables
        .iter()
        .find(|t| t.file_name.contains("divergence"))
        .unwrap();
    assert_eq!(
        divergence.header,
        "R,L,H0_truncated,H_minus1,H_plus1,endpoints_converged,center_divergent"
    );
    assert_eq!(divergence.rows.len(), 4);
    // The truncated center integral is rendered in scientific notation even
    // far past f64 range.
    assert!(divergence.rows[3].contains("e"));
}
