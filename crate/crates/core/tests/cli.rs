use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_resonance-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn point_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

#[test]
fn membership_reports_component() {
    let f = point_file(r#"{"2,1": [1, 1], "3,1": [-1, 1]}"#);
    let out = run(&[
        "membership",
        "--n",
        "3",
        "--point",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["resonant"], Value::Bool(true));
    assert_eq!(doc["components"], serde_json::json!(["C_{1,2,3}"]));
    assert_eq!(doc["kernel_dim"], doc["h1_direct"]);
}

#[test]
fn membership_case1_point_is_not_resonant() {
    let f = point_file(r#"{"2,1": [1, 1], "3,4": [1, 1]}"#);
    let out = run(&[
        "membership",
        "--n",
        "4",
        "--point",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["resonant"], Value::Bool(false));
}

#[test]
fn malformed_input_exits_2() {
    let f = point_file(r#"{"2,1": [1, 1"#);
    let out = run(&[
        "membership",
        "--n",
        "3",
        "--point",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let g = point_file(r#"{"9,1": [1, 1]}"#);
    let out = run(&[
        "membership",
        "--n",
        "3",
        "--point",
        g.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        run(&["membership", "--family", "custom", "--n", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["verify", "--n", "3", "--samples", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn n_range_is_enforced() {
    assert_eq!(run(&["verify", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["hilbert", "--n", "7"]).status.code(), Some(2));
    let out = run(&["components", "--n", "7", "--max-n-override"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["count"], 21 + 35);
}

#[test]
fn hilbert_side_by_side() {
    let out = run(&["hilbert", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["computed"], serde_json::json!([1, 12, 48, 64, 0]));
    assert_eq!(doc["computed"], doc["expected"]);
    let out = run(&["hilbert", "--n", "3", "--family", "product-free"]);
    assert_eq!(json_of(&out)["computed"], serde_json::json!([1, 6, 9, 0]));
}

#[test]
fn component_listings() {
    assert_eq!(json_of(&run(&["components", "--n", "4"]))["count"], 10);
    assert_eq!(json_of(&run(&["components", "--n", "5"]))["count"], 20);
    let doc = json_of(&run(&[
        "components",
        "--n",
        "3",
        "--family",
        "product-free",
    ]));
    assert_eq!(doc["count"], 2);
    for c in doc["components"].as_array().unwrap() {
        assert_eq!(c["dim"], 3);
    }
}

#[test]
fn verify_exit_codes() {
    let out = run(&["verify", "--n", "3", "--samples", "100", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["passed"], Value::Bool(true));
    let names: Vec<&str> = doc["sections"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["forward", "reverse", "case-targeted", "oracle"]);
}

#[test]
fn verify_with_replay() {
    let out = run(&[
        "verify",
        "--n",
        "4",
        "--samples",
        "50",
        "--seed",
        "7",
        "--proof-replay",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(
        doc["proof_replay"]["case1"]["exponents"],
        serde_json::json!([11, 7])
    );
    assert_eq!(doc["proof_replay"]["m3"]["verdict"], Value::Bool(true));
    assert_eq!(doc["proof_replay"]["case2"]["fitted_exponents"][1], 4);
    assert_eq!(doc["proof_replay"]["case2"]["fitted_exponents"][2], 3);
}

#[test]
fn json_is_byte_identical_across_runs_and_threads() {
    let args = ["verify", "--n", "3", "--samples", "30", "--seed", "11"];
    let a = bin()
        .args(args)
        .env("RESONANCE_LAB_THREADS", "1")
        .output()
        .unwrap();
    let b = bin()
        .args(args)
        .env("RESONANCE_LAB_THREADS", "4")
        .output()
        .unwrap();
    let c = bin().args(args).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn csv_has_one_row_per_sample() {
    let out = run(&["verify", "--n", "2", "--samples", "10", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    // 10 forward samples on C_{1,2} and the same 10 in the oracle section
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| &r[8] == "true"));
}

#[test]
fn product_free_contrast_verifies() {
    let out = run(&[
        "verify",
        "--n",
        "3",
        "--family",
        "product-free",
        "--samples",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["product_free_dims"], serde_json::json!([3]));
    assert_eq!(doc["mccool_dims"], serde_json::json!([2, 3]));
}

#[test]
fn presentation_export_round_trips() {
    let out = run(&["presentation", "--n", "3"]);
    let f = point_file(std::str::from_utf8(&out.stdout).unwrap());
    let out = run(&["hilbert", "--presentation", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["computed"], serde_json::json!([1, 6, 9, 0]));
}
