use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stabent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabent"))
        .args(args)
        .env_remove("STABENT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_lines(out: &Output) -> Vec<Value> {
    stdout(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const INJECTION: &str = r#"[
  {"op": "clifford", "gates": [["CNOT", 0, 1]]},
  {"op": "measure", "qubit": 1, "keep": false, "then": [], "else": [{"op": "clifford", "gates": [["X", 0], ["S", 0]]}]}
]"#;

/// `|T⟩ ⊗ |+⟩`.
const T_PLUS: &str = r#"{"n": 2, "amplitudes": [[0.5, 0], [0.5, 0], [0.3535533905932738, 0.3535533905932738], [0.3535533905932738, 0.3535533905932738]]}"#;

#[test]
fn entropy_of_named_states() {
    let t = json_lines(&stabent(&["entropy", "--state", "T", "--alpha", "2"]));
    assert!((t[0]["entropy_bits"].as_f64().unwrap() - 0.415037).abs() < 1e-6);
    let z = json_lines(&stabent(&["entropy", "--state", "zeros:4", "--alpha", "2"]));
    assert_eq!(z[0]["entropy_bits"].as_f64().unwrap(), 0.0);
    let ccz = json_lines(&stabent(&["entropy", "--state", "ccz", "--alpha", "2,3"]));
    assert_eq!(ccz.len(), 2);
    assert!((ccz[0]["purity"].as_f64().unwrap() - 11.0 / 32.0).abs() < 1e-12);
    assert!((ccz[1]["purity"].as_f64().unwrap() - 23.0 / 128.0).abs() < 1e-12);
    assert_eq!(ccz[1]["nullity"], 3);
}

#[test]
fn bounds_table_has_headline_rows() {
    let rows: Vec<Value> = serde_json::from_str(&stdout(&stabent(&["bounds", "--alpha", "2"]))).unwrap();
    let heads: Vec<(String, f64)> = rows
        .iter()
        .filter_map(|r| r["headline"].as_f64().map(|h| (r["source"].as_str().unwrap().to_string(), h)))
        .collect();
    assert_eq!(
        heads,
        vec![("C^3Z".into(), 0.9), ("C^4Z".into(), 0.5), ("C^2S".into(), 0.8), ("C^3S".into(), 0.5)]
    );
    let text = stdout(&stabent(&["bounds", "--alpha", "2", "--format", "text"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 37);
    assert!(lines[0].starts_with("source"));
    let col = lines[0].find("rate_bound").unwrap();
    assert!(lines.iter().skip(1).all(|l| l[col..].starts_with(|c: char| c.is_ascii_digit())));
}

#[test]
fn single_bound_row() {
    let rows: Vec<Value> = serde_json::from_str(&stdout(&stabent(&["bounds", "--source", "ckz:4", "--target", "ccz"]))).unwrap();
    assert_eq!(rows[0]["prob_bound"].as_f64().unwrap(), 0.9375);
    assert_eq!(rows[0]["source_purity"], "197/512");
}

#[test]
fn protocol_reports() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "tp.json", T_PLUS);
    let prog = write(dir.path(), "inj.json", INJECTION);
    let out: Value = serde_json::from_str(&stdout(&stabent(&[
        "protocol", "--state", &state, "--program", &prog, "--report", "monotones",
    ])))
    .unwrap();
    assert_eq!(out["num_branches"], 1);
    let m2 = out["entries"][0]["monotones"]["alpha_2"]["entropy"].as_f64().unwrap();
    assert!((m2 - (4.0f64 / 3.0).log2()).abs() < 1e-12);

    let measure_all = write(
        dir.path(),
        "all.json",
        r#"[{"op": "measure", "qubit": 0, "keep": true, "then": [], "else": []},
            {"op": "measure", "qubit": 1, "keep": true, "then": [], "else": []}]"#,
    );
    let out: Value = serde_json::from_str(&stdout(&stabent(&[
        "protocol", "--state", "haar:2:4", "--program", &measure_all, "--report", "monotones",
    ])))
    .unwrap();
    assert_eq!(out["num_branches"], 4);
    for e in out["entries"].as_array().unwrap() {
        assert!(e["monotones"]["alpha_2"]["entropy"].as_f64().unwrap().abs() < 1e-12);
    }

    let empty = write(dir.path(), "empty.json", "[]");
    let out: Value = serde_json::from_str(&stdout(&stabent(&["protocol", "--state", "T", "--program", &empty]))).unwrap();
    assert_eq!(out["num_branches"], 1);
    assert_eq!(out["entries"][0]["weight"], 1.0);
}

#[test]
fn ill_typed_protocol_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(dir.path(), "bad.json", r#"[{"op": "trace_out", "qubit": 0}]"#);
    let out = stabent(&["protocol", "--state", "T", "--program", &prog]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step 0"));
}

#[test]
fn roof_of_pure_state_is_plain_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("h.json");
    stdout(&stabent(&["state", "gen", "--name", "haar:2:11", "-o", file.to_str().unwrap()]));
    let roof: Value = serde_json::from_str(&stdout(&stabent(&["roof", "--state", file.to_str().unwrap(), "--alpha", "2"]))).unwrap();
    let plain = json_lines(&stabent(&["entropy", "--state", file.to_str().unwrap(), "--alpha", "2"]));
    assert!((roof["extended_entropy"].as_f64().unwrap() - plain[0]["entropy_bits"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn roof_of_density_file() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write(dir.path(), "mm.json", r#"{"n": 1, "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}"#);
    let roof: Value = serde_json::from_str(&stdout(&stabent(&["roof", "--state", &rho, "--restarts", "4", "--min"]))).unwrap();
    assert!(roof["extended_entropy"].as_f64().unwrap() < 1e-9);
    assert!(roof["min_entropy"].as_f64().unwrap() < 1e-9);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["verify", "--suite", "lemma2", "--trials", "20", "--seed", "5"];
    let (a, b) = (stdout(&stabent(&args)), stdout(&stabent(&args)));
    assert_eq!(a, b);
    let four = Command::new(env!("CARGO_BIN_EXE_stabent"))
        .args(args)
        .env("STABENT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&four), a);
    let spec = ["spectrum", "--state", "haar:3:2"];
    assert_eq!(stdout(&stabent(&spec)), stdout(&stabent(&spec)));
}

#[test]
fn verify_all_passes() {
    let out = stabent(&["verify", "--suite", "all", "--trials", "200", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let reports: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.len(), 8);
    assert!(reports.iter().all(|r| r["failures"].as_array().unwrap().is_empty()));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(stabent(&["entropy"]).status.code(), Some(2));
    assert_eq!(stabent(&["entropy", "--state", "nonsense"]).status.code(), Some(2));
    assert_eq!(stabent(&["entropy", "--state", "T", "--bogus"]).status.code(), Some(2));
    assert_eq!(stabent(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(stabent(&["spectrum", "--state", "zeros:14"]).status.code(), Some(2));
    assert_eq!(stabent(&["--threads", "0", "bounds"]).status.code(), Some(2));
}

#[test]
fn state_gen_round_trips() {
    let text = stdout(&stabent(&["state", "gen", "--name", "cks:2"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["amplitudes"][3][1].as_f64().unwrap(), 0.5);
}
