use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gibbs-entropy"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn model_reports_exact_values() {
    let u = json(&run(&["model", "--model", data("uniform.json").to_str().unwrap()]));
    assert!((u["entropy"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert!(u["pressure"].as_f64().unwrap().abs() < 1e-12);
    let q = json(&run(&["model", "--model", data("q_chain.json").to_str().unwrap()]));
    // π = (2/3, 1/3); h = −Σ π_i P_ij ln P_ij.
    let h = -(2.0 / 3.0) * (0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln()) - (1.0 / 3.0) * (0.2f64 * 0.2f64.ln() + 0.8 * 0.8f64.ln());
    assert!((q["entropy"].as_f64().unwrap() - h).abs() < 1e-12);
    let r = &q["ratio_report"];
    assert!(r["min_ratio"].as_f64().unwrap() <= 1.0 && r["max_ratio"].as_f64().unwrap() >= 1.0);
    let t = json(&run(&["model", "--model", data("q_chain_table.json").to_str().unwrap()]));
    assert!((t["entropy"].as_f64().unwrap() - q["entropy"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn malformed_potentials_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    std::fs::write(&missing, r#"{"alphabet": 2, "range": 1, "values": {"00": 0, "10": 0, "11": 0}}"#).unwrap();
    let out = run(&["model", "--model", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing value for block \"01\""), "{}", stderr(&out));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"alphabet\": 2,\n  \"range\": 1,\n  \"values\": {\"00\": }\n}").unwrap();
    let out = run(&["model", "--model", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("broken.json:4:"), "{}", stderr(&out));
}

#[test]
fn estimate_on_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.txt");
    std::fs::write(&s, "0101\n").unwrap();
    let v = json(&run(&["estimate", "--sample", s.to_str().unwrap(), "--k", "2"]));
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs[0]["estimator"], "plugin-rate");
    assert!((recs[0]["value"].as_f64().unwrap() - 2f64.ln() / 2.0).abs() < 1e-15);
    assert_eq!(recs[1]["estimator"], "conditional");
    assert_eq!(recs[1]["value"].as_f64().unwrap(), 0.0);
    assert_eq!(v["seed"], 0);
}

#[test]
fn estimate_with_schedule_reports_k() {
    let q = data("q_chain.json");
    let args = ["estimate", "--model", q.to_str().unwrap(), "--n", "65536", "--schedule", "main1", "--alpha", "0.5"];
    let v = json(&run(&[&args[..], &["--seed", "9"]].concat()));
    assert_eq!(v["config"]["k"], 4);
    assert_eq!(v["records"][0]["k"], 4);
    assert_eq!(v["config"]["schedule"]["kind"], "main1");
    assert_eq!(v["seed"], 9);

    let out = run(&[&args[..], &["--k", "5"]].concat());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("main1"), "{}", stderr(&out));
}

#[test]
fn main2_hypothesis_is_enforced() {
    let q = data("q_chain.json");
    let out = run(&["estimate", "--model", q.to_str().unwrap(), "--n", "4096", "--schedule", "main2"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("main2"), "{}", stderr(&out));
    let ok = run(&["estimate", "--model", q.to_str().unwrap(), "--n", "4096", "--schedule", "main2", "--theta", "0.25"]);
    assert_eq!(json(&ok)["config"]["k"], 4);
}

#[test]
fn saturated_hitting_time_exits_5() {
    let q = data("q_chain.json");
    let out = run(&["estimate", "--model", q.to_str().unwrap(), "--n", "40", "--k", "2", "--hitting", "--horizon", "5"]);
    assert_eq!(code(&out), 5);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["hitting"]["saturated"], true);
    assert!(v["hitting"]["w"].is_null());

    let out = run(&["estimate", "--model", q.to_str().unwrap(), "--n", "6", "--k", "1", "--hitting", "--seed", "2"]);
    let v = json(&out);
    assert_eq!(v["hitting"]["saturated"], false);
    assert!(v["hitting"]["w"].as_u64().unwrap() >= 1);
}

#[test]
fn sample_round_trips_through_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("x.txt");
    let q = data("q_chain.json");
    let out = run(&["sample", "--model", q.to_str().unwrap(), "--n", "1000", "--seed", "4", "--out", s.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&s).unwrap();
    assert!(text.starts_with("# alphabet=2 n=1000 seed=4"));
    let from_file = json(&run(&["estimate", "--sample", s.to_str().unwrap(), "--k", "3"]));
    let drawn = json(&run(&["estimate", "--model", q.to_str().unwrap(), "--n", "1000", "--k", "3", "--seed", "4"]));
    for i in 0..2 {
        assert_eq!(from_file["records"][i]["value"], drawn["records"][i]["value"]);
    }
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("exp.json");
    let model = data("q_chain.json");
    std::fs::write(&p, body.replace("MODEL", &model.display().to_string())).unwrap();
    p
}

#[test]
fn experiment_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": "MODEL", "estimator": "conditional", "k": 3, "n_grid": [512, 1024],
            "t_grid": [0.005, 0.01, 0.02], "replicas": 200, "seed": 11}"#,
    );
    let mut csvs = Vec::new();
    for run_dir in ["a", "b"] {
        let out_dir = dir.path().join(run_dir);
        let out = run(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        csvs.push(std::fs::read(out_dir.join("tails.csv")).unwrap());
        let summary: Value = serde_json::from_slice(&std::fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["seed"], 11);
        assert_eq!(summary["config"]["replicas"], 200);
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3);

    let other = dir.path().join("c");
    run(&["experiment", "--config", cfg.to_str().unwrap(), "--seed", "12", "--out", other.to_str().unwrap()]);
    assert_ne!(std::fs::read(other.join("tails.csv")).unwrap(), csvs[0]);
}

#[test]
fn main1_experiment_fits_d() {
    let dir = tempfile::tempdir().unwrap();
    let t: Vec<String> = (1..=20).map(|i| format!("{}", 0.002 * i as f64)).collect();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"model": "MODEL", "estimator": "plugin-rate", "schedule": {{"kind": "main1", "alpha": 0.5}},
                "n_grid": [4096], "t_grid": [{}], "replicas": 400, "seed": 3}}"#,
            t.join(",")
        ),
    );
    let v = json(&run(&["experiment", "--config", cfg.to_str().unwrap()]));
    let fit = &v["fits"][0];
    assert_eq!(fit["kind"], "main1-tail");
    assert!(fit["fit"]["constants"]["D"]["value"].as_f64().unwrap() > 0.0);
    assert_eq!(fit["fit"]["constants"]["D"]["provenance"], "fitted");
    assert!(fit["fit"]["r2"].as_f64().is_some());
    assert!(v["variance_fit"]["d"].as_f64().unwrap() > 0.0);
    assert!(v["invariants"].as_array().unwrap().iter().all(|i| i["passed"] == true));
}

#[test]
fn waiting_experiment_has_two_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": "MODEL", "estimator": "hitting-rate", "n_grid": [8],
            "t_grid": [0.05, 0.1, 0.2, 0.3], "replicas": 200, "seed": 5, "center": "exact-entropy"}"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("tails.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",upper,")).count(), 4);
    assert_eq!(csv.lines().filter(|l| l.contains(",lower,")).count(), 4);
}

#[test]
fn unusable_points_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": "MODEL", "estimator": "hitting-rate", "n_grid": [20], "horizon": 3,
            "t_grid": [0.1], "replicas": 100, "seed": 5}"#,
    );
    let out = run(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 5);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["unusable"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_experiment_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"model": "MODEL", "estimator": "lz77", "n_grid": [10], "t_grid": [0.1], "replicas": 100, "seed": 1}"#);
    assert_eq!(code(&run(&["experiment", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn oracle_and_explaw() {
    let v = json(&run(&["oracle", "--n", "6", "--sweep"]));
    assert_eq!(v["violations"], 0);
    assert_eq!(v["reports"].as_array().unwrap().len(), (1..=6).sum::<usize>());
    let q = data("q_chain.json");
    let v = json(&run(&["explaw", "--model", q.to_str().unwrap(), "--word", "0110", "--replicas", "1000", "--seed", "1"]));
    assert!(v["report"]["lambda_hat"].as_f64().unwrap() > 0.0);
    assert_eq!(v["seed"], 1);
}

#[test]
fn help_documents_csv_columns_and_exit_codes() {
    let out = run(&["experiment", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for col in gibbs_entropy::experiment::CSV_COLUMNS {
        assert!(text.contains(col), "{col} missing from --help");
    }
    let out = run(&["--help"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Exit codes"));
}
