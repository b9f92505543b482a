//! End-to-end tests of the `qmetro` binary: fixture values, reason strings,
//! exit codes, byte-stable output, and schema validity of bound reports.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmetro")).args(args).output().expect("binary runs")
}

fn stdout_text(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_str(&stdout_text(out)).expect("stdout parses as JSON")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Parses a CSV table into (header, rows of cells).
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("header").split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn cell_f64(row: &[String], idx: usize) -> f64 {
    row[idx].parse().unwrap_or_else(|_| panic!("cell {} = {:?} is numeric", idx, row[idx]))
}

fn tmp_path(tag: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("qmetro-cli-{}-{}", tag, std::process::id()))
}

// ---------------------------------------------------------------------------
// Minimal JSON Schema checker covering the subset used by the shipped schema:
// type, required, properties, additionalProperties, enum, items, $ref.

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn type_matches(spec: &Value, v: &Value) -> bool {
    match spec {
        Value::String(s) => s == type_name(v),
        Value::Array(options) => options.iter().any(|s| type_matches(s, v)),
        _ => panic!("schema type spec must be string or array"),
    }
}

fn resolve<'a>(root: &'a Value, node: &'a Value) -> &'a Value {
    match node.get("$ref") {
        Some(Value::String(r)) => {
            let path = r.strip_prefix("#/").expect("local ref");
            let mut cur = root;
            for seg in path.split('/') {
                cur = cur.get(seg).expect("ref target exists");
            }
            cur
        }
        _ => node,
    }
}

fn validate(root: &Value, schema: &Value, v: &Value, at: &str) {
    let schema = resolve(root, schema);
    if let Some(t) = schema.get("type") {
        assert!(type_matches(t, v), "{}: type {} violates {}", at, type_name(v), t);
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        assert!(options.contains(v), "{}: {} not in enum", at, v);
    }
    if let Value::Object(obj) = v {
        if let Some(Value::Array(req)) = schema.get("required") {
            for key in req {
                let key = key.as_str().expect("required entries are strings");
                assert!(obj.contains_key(key), "{}: missing required key {}", at, key);
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        if let Some(props) = props {
            for (key, sub) in props {
                if let Some(val) = obj.get(key) {
                    validate(root, sub, val, &format!("{}/{}", at, key));
                }
            }
        }
        if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
            for key in obj.keys() {
                assert!(
                    props.map(|p| p.contains_key(key)).unwrap_or(false),
                    "{}: unexpected key {}",
                    at,
                    key
                );
            }
        }
    }
    if let (Value::Array(items), Some(item_schema)) = (v, schema.get("items")) {
        for (i, item) in items.iter().enumerate() {
            validate(root, item_schema, item, &format!("{}/{}", at, i));
        }
    }
}

fn assert_valid_report(report: &Value) {
    let schema_text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/schema/report.schema.json"
    ))
    .expect("schema ships with the crate");
    let schema: Value = serde_json::from_str(&schema_text).expect("schema parses");
    validate(&schema, &schema, report, "report");
}

// ---------------------------------------------------------------------------

#[test]
fn bounds_report_matches_closed_forms_and_schema() {
    let out = run(&["bounds", "--model", "dephasing", "--eta", "0.9", "--param", "phase"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    assert_valid_report(&report);

    let ce = report["bounds"]["ce"]["value"].as_f64().unwrap();
    assert!((ce - 4.263158).abs() <= 1e-5, "ce = {}", ce);
    let rld = report["bounds"]["rld"]["value"].as_f64().unwrap();
    assert!((rld - 0.81 / 0.19).abs() <= 1e-9, "rld = {}", rld);
    let plain = report["bounds"]["channel_qfi"]["value"].as_f64().unwrap();
    assert!((plain - 0.81).abs() <= 1e-9, "channel_qfi = {}", plain);
    assert_eq!(report["bounds"]["qs"]["applicability"], "ok");
    assert_eq!(report["model"], "dephasing");
    assert_eq!(report["parameter"], "phase");

    // Identical invocations must produce identical bytes.
    let again = run(&["bounds", "--model", "dephasing", "--eta", "0.9", "--param", "phase"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn inapplicable_bounds_carry_reason_strings() {
    let out = run(&["bounds", "--model", "loss", "--eta", "0.9", "--param", "phase"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    assert_valid_report(&report);
    assert_eq!(report["bounds"]["rld"]["applicability"], "phi_extremal");
    assert!(report["bounds"]["rld"]["value"].is_null());
    assert_eq!(report["bounds"]["cs"]["applicability"], "phi_extremal");

    let out = run(&["bounds", "--model", "spem", "--eta", "0.5", "--param", "phase"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    assert_valid_report(&report);
    assert_eq!(report["bounds"]["qs"]["applicability"], "alpha_not_scalar");
    assert!(report["bounds"]["qs"]["value"].is_null());
    let ce = report["bounds"]["ce"]["value"].as_f64().unwrap();
    assert!((ce - 4.0).abs() <= 1e-5, "spem ce = {}", ce);
}

#[test]
fn fully_dephasing_point_reports_zero_information() {
    let out = run(&["bounds", "--model", "dephasing", "--eta", "0", "--param", "phase"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    assert_valid_report(&report);
    let plain = report["bounds"]["channel_qfi"]["value"].as_f64().unwrap();
    assert!(plain.abs() <= 1e-12, "channel_qfi = {}", plain);
}

#[test]
fn sql_table_matches_closed_forms_and_is_deterministic() {
    let out = run(&["table", "sql", "--eta", "0.5"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_text(&out);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["eta", "model", "ce", "qs", "rld", "cs"]);
    assert_eq!(rows.len(), 4);

    let depol = rows.iter().find(|r| r[1] == "depolarization").unwrap();
    assert!((cell_f64(depol, 2) - 0.5).abs() <= 1e-5, "depol ce = {}", depol[2]);
    let loss = rows.iter().find(|r| r[1] == "loss").unwrap();
    assert_eq!(loss[4], "na");
    assert_eq!(loss[5], "na");
    let spem = rows.iter().find(|r| r[1] == "spontaneous_emission").unwrap();
    assert_eq!(spem[3], "na");

    let again = run(&["table", "sql", "--eta", "0.5"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn freq_table_matches_closed_forms() {
    let out = run(&["table", "freq", "--gamma", "1"]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = csv_rows(&stdout_text(&out));
    assert_eq!(header, ["model", "plain", "extended", "ce_asymptotic", "enhancement"]);
    assert_eq!(rows.len(), 4);

    let e = std::f64::consts::E;
    let deph = rows.iter().find(|r| r[0] == "dephasing").unwrap();
    assert!((cell_f64(deph, 1) - 0.18394).abs() <= 1e-5, "plain = {}", deph[1]);
    assert!((cell_f64(deph, 4) - e.sqrt()).abs() <= 1e-9);
    let depol = rows.iter().find(|r| r[0] == "depolarization").unwrap();
    assert!((cell_f64(depol, 4) - (4.0 * e / 3.0).sqrt()).abs() <= 1e-9);
    let spem = rows.iter().find(|r| r[0] == "spontaneous_emission").unwrap();
    assert!((cell_f64(spem, 4) - 2.0 * e.sqrt()).abs() <= 1e-9);
    assert!((cell_f64(spem, 3) - 4.0).abs() <= 1e-9);
}

#[test]
fn grid_misuse_is_a_usage_error() {
    assert_eq!(exit_code(&run(&["table", "sql", "--eta-grid", "0.9:0.1:0.1"])), 2);
    assert_eq!(exit_code(&run(&["table", "sql", "--eta-grid", "0.1:0.9:0"])), 2);
    assert_eq!(exit_code(&run(&["table", "dec", "--eta", "1.0"])), 2);
    assert_eq!(exit_code(&run(&["table", "freq", "--eta", "0.5"])), 2);
    assert_eq!(exit_code(&run(&["table", "chqfi", "--gamma", "1"])), 2);
}

#[test]
fn finite_n_tracks_the_asymptotic_interpolation() {
    let out = run(&["finite-n", "--model", "dephasing", "--eta", "0.9", "--n", "1,10,100"]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = csv_rows(&stdout_text(&out));
    assert_eq!(header, ["n", "finite_n_ce", "interpolation"]);
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let v = cell_f64(row, 1);
        let interp = cell_f64(row, 2);
        assert!((v / interp - 1.0).abs() <= 1e-4, "n = {}: {} vs {}", row[0], v, interp);
    }
}

#[test]
fn mz_bayes_reproduces_the_noiseless_cost_and_writes_alpha() {
    let alpha_path = tmp_path("alpha.csv");
    let out = run(&[
        "mz",
        "bayes",
        "--eta-a",
        "1",
        "--eta-b",
        "1",
        "--n",
        "2",
        "--alpha-out",
        alpha_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = csv_rows(&stdout_text(&out));
    assert_eq!(header, ["n", "minimal_cost", "lower_bound", "classical_cost"]);
    let row = &rows[0];
    let cost = cell_f64(row, 1);
    assert!((cost - 0.585786).abs() <= 1e-6, "minimal cost = {}", cost);
    assert!(cell_f64(row, 2) <= cost + 1e-12);
    assert!(cell_f64(row, 3) >= cost - 1e-12);

    let alpha_text = std::fs::read_to_string(&alpha_path).expect("alpha file written");
    std::fs::remove_file(&alpha_path).ok();
    let (alpha_header, alpha_rows) = csv_rows(&alpha_text);
    assert_eq!(alpha_header, ["k", "alpha"]);
    assert_eq!(alpha_rows.len(), 3);
    let norm2: f64 = alpha_rows.iter().map(|r| cell_f64(r, 1).powi(2)).sum();
    assert!((norm2 - 1.0).abs() <= 1e-10, "|alpha|^2 = {}", norm2);

    // The coefficient file needs an unambiguous photon number.
    let out = run(&["mz", "bayes", "--eta-a", "1", "--eta-b", "1", "--n", "2,3", "--alpha-out", "x"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn mz_freq_respects_the_input_independent_ceiling() {
    let out = run(&["mz", "freq", "--eta-a", "0.7", "--eta-b", "1", "--n", "2,4"]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = csv_rows(&stdout_text(&out));
    assert_eq!(header, ["n", "optimal_bound", "noon_qfi", "escher_bound", "coherent_fi"]);
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let opt = cell_f64(row, 1);
        let noon = cell_f64(row, 2);
        let escher = cell_f64(row, 3);
        assert!(opt <= escher + 1e-9, "optimal {} above ceiling {}", opt, escher);
        assert!(noon <= escher + 1e-9);
        assert!(opt >= noon - 1e-9, "optimized input beaten by NOON: {} < {}", opt, noon);
    }
    assert_eq!(exit_code(&run(&["mz", "freq", "--eta-a", "0.7", "--eta-b", "1", "--n", "300"])), 4);
}

#[test]
fn mz_bound_emits_the_three_reference_curves() {
    let out = run(&["mz", "bound", "--eta-a", "0.7", "--eta-b", "0.85", "--n", "10"]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = csv_rows(&stdout_text(&out));
    assert_eq!(header, ["n", "escher_bound", "asymptotic_bound", "coherent_fi"]);
    let row = &rows[0];
    let ra = (0.3f64 / 0.7).sqrt();
    let rb = (0.15f64 / 0.85).sqrt();
    let asym = 10.0 * 4.0 / (ra + rb).powi(2);
    assert!((cell_f64(row, 2) - asym).abs() <= 1e-9 * asym);
    let ta = (1.0f64 + 0.3 * 10.0 / 0.7).sqrt();
    let tb = (1.0f64 + 0.15 * 10.0 / 0.85).sqrt();
    let escher = (20.0 / (ta + tb)).powi(2);
    assert!((cell_f64(row, 1) - escher).abs() <= 1e-9 * escher);
    let crb = 0.25 * (1.0 / 0.7f64.sqrt() + 1.0 / 0.85f64.sqrt()).powi(2);
    assert!((cell_f64(row, 3) - 10.0 / crb).abs() <= 1e-9 * 10.0 / crb);

    // The asymptotic line does not exist for the noiseless interferometer.
    let out = run(&["mz", "bound", "--eta-a", "1", "--eta-b", "1", "--n", "10"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn ghz_fixture_and_scale_limit() {
    let out = run(&["ghz", "--eta", "0.8", "--n", "2"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    let chi = report["chi"].as_f64().unwrap();
    assert!((chi - 1.315068).abs() <= 1e-5, "chi = {}", chi);
    let qfi = report["qfi"].as_f64().unwrap();
    let closed = 12.0 * 0.64 / ((1.0 - 0.64) * (1.0 + 3.0 * 0.64));
    assert!((qfi - closed).abs() <= 1e-9 * closed, "qfi = {}", qfi);

    assert_eq!(exit_code(&run(&["ghz", "--eta", "0.8", "--n", "100"])), 4);
}

#[test]
fn binomial_record_reports_exact_statistics() {
    let out = run(&["binomial", "--n", "12", "--k", "4", "--phi", "0.8"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    assert!((report["fi"].as_f64().unwrap() - 12.0).abs() <= 1e-9);
    let mse = report["p_avg_mse"].as_f64().unwrap();
    assert!((mse - 1.0 / 84.0).abs() <= 1e-12, "p_avg_mse = {}", mse);
    for key in ["ml", "local_efficient", "bayes_h", "avg_cost_h", "p_mmse"] {
        assert!(report[key].is_number(), "missing {}", key);
    }

    let out = run(&["binomial", "--n", "12", "--k", "4", "--phi", "0.8", "--csv"]);
    let (header, rows) = csv_rows(&stdout_text(&out));
    assert_eq!(header[0], "n");
    assert_eq!(rows.len(), 1);

    assert_eq!(exit_code(&run(&["binomial", "--n", "4", "--k", "9", "--phi", "0.8"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(exit_code(&run(&["bounds", "--model", "nonsense", "--eta", "0.5", "--param", "phase"])), 2);
    assert_eq!(exit_code(&run(&["bounds", "--model", "dephasing", "--eta", "1.5", "--param", "phase"])), 2);
    assert_eq!(exit_code(&run(&["bounds", "--model", "dephasing", "--eta", "0.5", "--param", "strength", "--json", "--csv"])), 2);
    assert_eq!(exit_code(&run(&["table", "nosuch"])), 2);
}

#[test]
fn out_flag_redirects_the_report_to_a_file() {
    let path = tmp_path("report.json");
    let direct = run(&["bounds", "--model", "depolarization", "--eta", "0.6", "--param", "strength"]);
    assert_eq!(exit_code(&direct), 0);
    let filed = run(&[
        "bounds",
        "--model",
        "depolarization",
        "--eta",
        "0.6",
        "--param",
        "strength",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&filed), 0);
    assert!(filed.stdout.is_empty());
    let content = std::fs::read(&path).expect("file written");
    std::fs::remove_file(&path).ok();
    assert_eq!(content, direct.stdout);
    let report: Value = serde_json::from_slice(&content).unwrap();
    assert_valid_report(&report);
    assert_eq!(report["parameter"], "strength");
}

#[test]
fn table_json_mode_emits_row_objects() {
    let out = run(&["table", "chqfi", "--eta", "0.5", "--json"]);
    assert_eq!(exit_code(&out), 0);
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let deph = rows.iter().find(|r| r["model"] == "dephasing").unwrap();
    assert!((deph["channel_qfi"].as_f64().unwrap() - 0.25).abs() <= 1e-9);
    assert!((deph["extended_qfi"].as_f64().unwrap() - 0.25).abs() <= 1e-7);
    assert!((deph["rld"].as_f64().unwrap() - 1.0 / 3.0).abs() <= 1e-9);
    let loss = rows.iter().find(|r| r["model"] == "loss").unwrap();
    assert!(loss["rld"].is_null());
}
