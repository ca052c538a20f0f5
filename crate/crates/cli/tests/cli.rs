use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jsonschema::{Registry, Validator};
use ncprob::harness::Counterexample;
use ncprob_cli::output::CSV_COLUMNS;
use ncprob_cli::schema;
use serde_json::Value;

fn ncprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncprob"))
        .args(args)
        .env_remove("NCPROB_DIM_CAP")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn validator(schema_text: &str) -> Validator {
    let report: Value = serde_json::from_str(schema::REPORT).unwrap();
    let registry = Registry::new()
        .add("https://example.org/ncprob/report.schema.json", report)
        .unwrap()
        .prepare()
        .unwrap();
    let schema: Value = serde_json::from_str(schema_text).unwrap();
    jsonschema::options().with_registry(&registry).build(&schema).unwrap()
}

fn assert_valid(v: &Validator, doc: &Value) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn main_reports<'a>(doc: &'a Value, name: &'a str) -> impl Iterator<Item = &'a Value> + 'a {
    doc["records"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r["reports"].as_array().unwrap())
        .filter(move |r| r["name"] == name)
}

#[test]
fn classical_etemadi_verify_passes_with_oracle_agreement() {
    let out = ncprob(&[
        "verify",
        "--inequality",
        "etemadi",
        "--classical",
        "--n",
        "2",
        "--lambda",
        "0.5",
        "--trials",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_valid(&validator(schema::SUITE), &doc);
    assert_eq!(doc["report"]["trials"], 100);
    assert_eq!(doc["report"]["failures"], 0);
    assert_eq!(doc["oracle"]["report"]["failures"], 0);
    assert_eq!(main_reports(&doc, "etemadi").count(), 100);
    let oracle: Vec<&Value> = main_reports(&doc["oracle"], "oracle-etemadi").collect();
    assert_eq!(oracle.len(), 100);
    assert!(oracle.iter().all(|r| r["lhs"].as_f64().unwrap() <= 1e-10));
}

#[test]
fn increasing_weights_are_a_usage_error() {
    let out = ncprob(&["verify", "--inequality", "hajek-renyi", "--alphas", "1,2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-increasing"));
}

#[test]
fn huge_threshold_gives_a_vacuous_lower_bound() {
    let out = ncprob(&["verify", "--inequality", "kolmogorov-type", "--n", "1", "--lambda", "1e9", "--trials", "20"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let reports: Vec<&Value> = main_reports(&doc, "kolmogorov-type").collect();
    assert_eq!(reports.len(), 20);
    for r in reports {
        assert_eq!(r["aux"]["lower_vacuous"], 1.0);
        assert!(r["pass"].as_bool().unwrap());
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["verify"],
        vec!["verify", "--inequality", "nope"],
        vec!["verify", "--inequality", "etemadi", "--trials", "0"],
        vec!["verify", "--inequality", "etemadi", "--lambda", "-1"],
        vec!["verify", "--inequality", "etemadi", "--n", "12", "--dims", "3"],
        vec!["sweep", "--inequality", "etemadi", "--lambda", "1", "--trials", "0"],
        vec!["sweep", "--inequality", "etemadi", "--n", "6..2"],
        vec!["demo", "unknown"],
        vec!["oracle", "--fair-coins", "--n", "2", "--query", "tail", "--t", "1"],
    ] {
        let out = ncprob(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn dimension_cap_comes_from_the_environment() {
    let args = ["verify", "--inequality", "etemadi", "--n", "3", "--dims", "3", "--trials", "2"];
    let ok = Command::new(env!("CARGO_BIN_EXE_ncprob")).args(args).output().unwrap();
    assert_eq!(code(&ok), 0);
    let capped = Command::new(env!("CARGO_BIN_EXE_ncprob"))
        .args(args)
        .env("NCPROB_DIM_CAP", "16")
        .output()
        .unwrap();
    assert_eq!(code(&capped), 2);
}

#[test]
fn zero_tolerance_failures_write_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let cx = dir.path().join("cx");
    let out = ncprob(&[
        "verify",
        "--inequality",
        "etemadi",
        "--classical",
        "--n",
        "2",
        "--lambda",
        "0.5",
        "--trials",
        "100",
        "--seed",
        "7",
        "--tolerance",
        "0",
        "--counterexamples",
        cx.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let files: Vec<_> = fs::read_dir(&cx).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!files.is_empty());
    for f in files {
        let c: Counterexample = serde_json::from_str(&fs::read_to_string(&f).unwrap()).unwrap();
        assert!(c.reports.iter().any(|r| !r.pass));
        assert!(c.instance.get("lambda").is_some() || c.instance.get("table").is_some());
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("strict.json");
    fs::write(&config, r#"{"tolerances": {"idempotence": 0}}"#).unwrap();
    let cx = dir.path().join("cx");
    let out = ncprob(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--inequality",
        "kolmogorov-type",
        "--n",
        "3",
        "--dims",
        "2",
        "--trials",
        "5",
        "--counterexamples",
        cx.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(fs::read_dir(&cx).unwrap().count() > 0);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{"command": "verify", "inequality": "hajek-renyi", "n": 2, "trials": 3, "seed": 11, "alphas": [1.0, 0.5]}"#,
    )
    .unwrap();
    let out = ncprob(&["verify", "--config", config.to_str().unwrap(), "--trials", "4"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["report"]["trials"], 4);
    assert_eq!(doc["report"]["seed"], 11);
    let wrong = ncprob(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&wrong), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["verify", "--inequality", "hajek-renyi", "--trials", "8", "--seed", "5"];
    assert_eq!(ncprob(&args).stdout, ncprob(&args).stdout);
}

#[test]
fn output_file_is_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = ncprob(&[
        "verify",
        "--inequality",
        "series-witness",
        "--fair-coins",
        "--epsilon",
        "0.5",
        "--trials",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_valid(&validator(schema::SUITE), &doc);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn lambda_sweep_on_two_coins() {
    let out = ncprob(&[
        "sweep",
        "--inequality",
        "etemadi",
        "--fair-coins",
        "--n",
        "2",
        "--lambda",
        "0.25,0.5,1,2",
    ]);
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, CSV_COLUMNS);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[7] == "true"));
    let lambdas: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(lambdas, vec![0.25, 0.5, 1.0, 2.0]);
    // τ(p) = P(max |S_k| ≥ 3λ) for two fair coins
    let taus: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert_eq!(taus, vec![1.0, 0.5, 0.0, 0.0]);
}

#[test]
fn kolmogorov_type_lower_bound_grows_with_n() {
    let out = ncprob(&[
        "sweep",
        "--inequality",
        "kolmogorov-type",
        "--fair-coins",
        "--n",
        "2..6",
        "--lambda",
        "0.5",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_valid(&validator(schema::ROWS), &doc);
    let rows = doc.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let mut previous = f64::NEG_INFINITY;
    for (row, n) in rows.iter().zip(2..=6) {
        assert_eq!(row["n"], n);
        let lower = row["lower"].as_f64().unwrap();
        let expected = 1.0 - 1.5f64.powi(2) / n as f64;
        assert!((lower - expected).abs() <= 1e-12, "n = {n}: {lower} vs {expected}");
        assert!(lower > previous);
        previous = lower;
    }
}

fn write_coins(dir: &Path) -> String {
    let path = dir.join("coins.json");
    fs::write(
        &path,
        r#"{"variables": [{"outcomes": [1, -1], "probs": ["1/2", "1/2"]}, {"outcomes": [1, -1], "probs": [0.5, 0.5]}]}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn oracle_queries_on_fair_coins() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_coins(dir.path());
    let q = |extra: &[&str]| {
        let mut args = vec!["oracle", "--table", table.as_str()];
        args.extend_from_slice(extra);
        let out = ncprob(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        stdout(&out).trim().to_string()
    };
    assert_eq!(q(&["--query", "max-abs-partial-sum", "--t", "1.2"]), "0.500000000000000");
    assert_eq!(q(&["--query", "var", "--k", "1"]), "1.00000000000000");
    assert_eq!(q(&["--query", "tail", "--k", "2", "--t", "3"]), "0");
    assert_eq!(q(&["--query", "second-moment"]), "2.00000000000000");
    let j: Value = serde_json::from_str(&q(&["--query", "tail", "--k", "1", "--t", "0.4", "--format", "json"])).unwrap();
    assert_eq!(j["value"], 1.0);
}

#[test]
fn oracle_rejects_malformed_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"variables": [{"outcomes": [1, -1], "probs": [0.5, 0.6]}]}"#).unwrap();
    let out = ncprob(&["oracle", "--table", path.to_str().unwrap(), "--query", "var", "--k", "1"]);
    assert_eq!(code(&out), 2);
    fs::write(&path, "{not json").unwrap();
    let out = ncprob(&["oracle", "--table", path.to_str().unwrap(), "--query", "var", "--k", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn remark_matrices_demo() {
    let out = ncprob(&["demo", "remark-matrices"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["total"]["re"], serde_json::json!([[8.0, 0.0], [0.0, 8.0]]));
    assert_eq!(doc["total"]["im"], serde_json::json!([[0.0, 0.0], [0.0, 0.0]]));
    assert!(doc["first_commutator"].as_f64().unwrap() > 0.1);
    assert!(doc["tail_commutators"].as_array().unwrap().iter().all(|v| v.as_f64().unwrap() <= 1e-12));
    let lambdas: Vec<f64> = doc["runs"].as_array().unwrap().iter().map(|r| r["lambda"].as_f64().unwrap()).collect();
    assert_eq!(lambdas, vec![0.5, 1.0, 2.0, 3.0]);
    for run in doc["runs"].as_array().unwrap() {
        assert!(run["result"]["reports"].as_array().unwrap().iter().all(|r| r["pass"] == true));
    }
}

#[test]
fn two_coins_demo_prints_the_chains() {
    let out = ncprob(&["demo", "two-coins"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let main = doc["etemadi"]["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "etemadi")
        .unwrap();
    assert_eq!(main["aux"]["tau_p"], 0.5);
    for chain in ["hajek_renyi", "kolmogorov_type", "etemadi"] {
        assert_eq!(doc[chain]["trace"]["e_sequence"].as_array().unwrap().len(), 3, "{chain}");
        assert_eq!(doc[chain]["trace"]["p_sequence"].as_array().unwrap().len(), 2, "{chain}");
    }
    let report = validator(schema::REPORT);
    for r in doc["etemadi"]["reports"].as_array().unwrap() {
        assert_valid(&report, r);
    }
}
