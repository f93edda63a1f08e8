use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

struct Run {
    code: i32,
    json: Value,
    csv: Vec<u8>,
    raw_json: Vec<u8>,
    stderr: String,
}

fn cfslab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfslab")).current_dir(dir).args(args).env_remove("CFSLAB_THREADS").output().expect("binary runs")
}

/// Runs with `--json out.json --csv out.csv` in a fresh directory.
fn run(args: &[&str]) -> Run {
    let dir = TempDir::new().unwrap();
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--json", "out.json", "--csv", "out.csv"]);
    let out = cfslab(dir.path(), &full);
    let code = out.status.code().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    let raw_json = std::fs::read(dir.path().join("out.json")).unwrap_or_default();
    let csv = std::fs::read(dir.path().join("out.csv")).unwrap_or_default();
    let json = serde_json::from_slice(&raw_json).unwrap_or(Value::Null);
    Run { code, json, csv, raw_json, stderr }
}

fn exit_code(args: &[&str]) -> i32 {
    let dir = TempDir::new().unwrap();
    cfslab(dir.path(), args).status.code().unwrap()
}

fn records(csv: &[u8]) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_reader(csv);
    let header = r.headers().unwrap().clone();
    let rows = r.records().map(|x| x.unwrap()).collect();
    (header, rows)
}

fn column(header: &csv::StringRecord, name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn kernel_dual_paths_agree() {
    let r = run(&["kernel", "--mass", "1", "--epsilon", "0.01", "--n", "2", "--xi", "0,1,0,0", "--method", "both"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(f(&r.json["result"]["max_cross_dev"]) < 1e-6);
    let (header, rows) = records(&r.csv);
    assert_eq!(header.len(), 4 + 32 + 8 + 2 + 2 + 1 + 1);
    let dev: f64 = rows[0][column(&header, "cross_dev")].parse().unwrap();
    assert!(dev < 1e-6);
}

#[test]
fn kernel_coincidence_has_no_spatial_vector_part() {
    for method in ["quadrature", "bessel"] {
        let r = run(&["kernel", "--epsilon", "0.01", "--xi", "0,0,0,0", "--method", method]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let (header, rows) = records(&r.csv);
        for name in ["v1_re", "v1_im", "v2_re", "v2_im", "v3_re", "v3_im"] {
            let v: f64 = rows[0][column(&header, name)].parse().unwrap();
            assert_eq!(v, 0.0, "{method} {name}");
        }
        let v0: f64 = rows[0][column(&header, "v0_re")].parse().unwrap();
        assert!(v0 < 0.0);
    }
}

#[test]
fn kernel_several_points_and_row_major_entries() {
    let r = run(&["kernel", "--xi", "0.3,1,0,0", "--xi=-0.5,0,0.8,0.2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = records(&r.csv);
    assert_eq!(rows.len(), 2);
    // P = v_0 γ⁰ + … + β: entry (0,0) is v_0 + β, entry (0,2) carries only v_3.
    let row = &rows[1];
    let get = |n: &str| -> f64 { row[column(&header, n)].parse().unwrap() };
    assert!((get("p00_re") - get("v0_re") - get("beta_re")).abs() <= 1e-12 * get("p00_re").abs());
    assert!((get("p02_re") - get("v3_re")).abs() <= 1e-12 * get("v3_re").abs().max(1e-300));
    assert_eq!(r.json["result"]["points"].as_array().unwrap().len(), 2);
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(exit_code(&["kernel", "--epsilon", "0"]), 2);
    assert_eq!(exit_code(&["kernel", "--epsilon", "-0.1"]), 2);
    assert_eq!(exit_code(&["kernel", "--xi", "0,1"]), 2);
    assert_eq!(exit_code(&["kernel", "--n", "3"]), 2);
    assert_eq!(exit_code(&["scan", "nu", "--grid", "0.1,0.2,5"]), 2);
    assert_eq!(exit_code(&["scan", "cone-detect", "--box", "nowhere"]), 2);
    assert_eq!(exit_code(&["algebra", "commutant", "--modes", "30"]), 2);
    assert_eq!(exit_code(&["algebra", "commutant", "--points", "cube:3"]), 2);
    assert_eq!(exit_code(&["acceptance", "--only", "11"]), 2);
    assert_eq!(exit_code(&["no-such-command"]), 2);
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "epsilon = 0.01\nwidth = 3\n").unwrap();
    assert_eq!(cfslab(dir.path(), &["--config", "bad.toml", "kernel"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_cfslab")).args(["scan", "nu"]).env("CFSLAB_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_with_three() {
    // the closed form refuses points on the null cone
    let r = run(&["kernel", "--xi", "1,1,0,0", "--method", "bessel"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("null cone"));
}

#[test]
fn classify_validation_grid() {
    let r = run(&["classify", "--epsilon", "0.01", "--mass", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json["result"]["correct"], 40);
    assert_eq!(r.json["result"]["counts"]["spacelike"], 20);
    assert_eq!(r.json["result"]["counts"]["timelike"], 20);
    let (header, rows) = records(&r.csv);
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|row| &row[column(&header, "correct")] == "true"));
}

#[test]
fn classify_explicit_points_and_tolerance_round_trip() {
    let r = run(&["classify", "--xi", "0,0,0,0", "--xi", "0,1,0,0", "--tol-modulus", "0.002", "--tol-imag", "3e-6"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = records(&r.csv);
    assert_eq!(&rows[0][column(&header, "kind")], "timelike");
    assert_eq!(&rows[1][column(&header, "kind")], "spacelike");
    for row in &rows {
        assert_eq!(row[column(&header, "tol_modulus")].parse::<f64>().unwrap(), 0.002);
        assert_eq!(row[column(&header, "tol_imag")].parse::<f64>().unwrap(), 3e-6);
    }
    assert_eq!(f(&r.json["config"]["classify"]["tol_imag"]), 3e-6);
}

#[test]
fn scan_nu_exponent() {
    let r = run(&["scan", "nu", "--mass", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let e = f(&r.json["result"]["fits"]["nu_plus"]["exponent"]);
    assert!((e + 3.0).abs() < 0.05, "{e}");
    let t = f(&r.json["result"]["fits"]["trace_vac"]["exponent"]);
    assert!((t + 2.0).abs() < 0.05, "{t}");
    assert_eq!(r.json["config"]["grid"]["count"], 12);
    let (_, rows) = records(&r.csv);
    assert_eq!(rows.len(), 24);
}

#[test]
fn scan_cone_detection_presets() {
    let on = run(&["scan", "cone-detect", "--box", "on-cone-default"]);
    assert_eq!(on.code, 0, "{}", on.stderr);
    assert!(f(&on.json["result"]["fits"]["cone_detection_regularized"]["exponent"]) <= -1.8);
    let off = run(&["scan", "cone-detect", "--box", "off-cone-default"]);
    assert_eq!(off.code, 0, "{}", off.stderr);
    assert!(f(&off.json["result"]["fits"]["cone_detection_regularized"]["exponent"]) >= -0.2);
}

#[test]
fn scan_thresholds_drive_the_exit_code() {
    let ok = run(&["scan", "lemma-integral", "--grid", "1e-2,1e-3,6", "--outer", "6"]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    let fail = run(&["scan", "lemma-integral", "--grid", "1e-2,1e-3,6", "--outer", "6", "--exponent-min", "-1"]);
    assert_eq!(fail.code, 1);
    assert_eq!(fail.json["passed"], false);
    assert_eq!(fail.json["config"]["scan"]["exponent_max"], Value::Null);
    // a custom box carries no preset thresholds
    let free = run(&["scan", "lemma-integral", "--grid", "1e-2,1e-3,6", "--outer", "6", "--box", "bump:1,1,0,0:0.25"]);
    assert_eq!(free.code, 0);
    assert!(free.json["checks"].as_object().unwrap().is_empty());
}

#[test]
fn scan_norm_probe_and_commutator() {
    let r = run(&["scan", "norm-probe", "--nodes", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = records(&r.csv);
    assert_eq!(header.iter().collect::<Vec<_>>(), ["eps", "image_norm", "state_norm", "ratio", "config_hash"]);
    assert_eq!(rows.len(), 6);
    let c = run(&["scan", "commutator", "--modes", "16", "--grid", "1e-1,1e-2,6"]);
    assert!(c.code == 0 || c.code == 1, "{}", c.stderr);
    assert!(c.json["result"]["fits"]["commutator_ratio"]["exponent"].is_f64());
}

#[test]
fn algebra_commutant_and_timeslice() {
    for (cmd, points) in [("commutant", "ball:8"), ("timeslice", "slice:8")] {
        let r = run(&["algebra", cmd, "--points", points, "--modes", "32"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert_eq!(r.json["result"]["commutant"]["dimension"], 1);
        let (_, rows) = records(&r.csv);
        assert_eq!(rows.len(), 8);
    }
}

#[test]
fn algebra_trace_check_and_dump() {
    let r = run(&["algebra", "trace-check", "--f", "gaussian-default", "--modes", "16", "--dump"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(f(&r.json["result"]["relative_residual"]) < 1e-6);
    let modes = r.json["result"]["basis"]["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 16);
    assert_eq!(modes[0]["momentum"].as_array().unwrap().len(), 3);
    assert_eq!(modes[0]["polarization"].as_array().unwrap().len(), 8);
    let op = &r.json["result"]["operators"][0];
    assert_eq!(op["entries"].as_array().unwrap().len(), 256);
    assert_eq!(op["entries"][0].as_array().unwrap().len(), 2);
}

#[test]
fn algebra_span_and_dirac_sequence() {
    let s = run(&["algebra", "span", "--modes", "16"]);
    assert_eq!(s.code, 0, "{}", s.stderr);
    assert_eq!(s.json["result"]["span"]["full"], true);
    // the default 1e-3 target is out of reach at this truncation
    let d = run(&["algebra", "dirac-seq", "--modes", "16", "--epsilon", "0.05", "--ns", "2,4,8"]);
    assert_eq!(d.code, 1, "{}", d.stderr);
    let steps = d.json["result"]["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 3);
    assert!(f(&steps[2]["relative_gap"]) < f(&steps[0]["relative_gap"]));
    let loose = run(&["algebra", "dirac-seq", "--modes", "16", "--epsilon", "0.05", "--ns", "2,4,8", "--max-dirac-gap", "1.5"]);
    assert_eq!(loose.code, 0);
}

#[test]
fn outputs_are_bit_reproducible() {
    for args in [&["classify"][..], &["kernel", "--xi", "0.2,0.7,0,0.1", "--method", "both"], &["algebra", "commutant", "--points", "ball:3", "--modes", "16"]] {
        let a = run(args);
        let b = run(args);
        assert!(a.code <= 1, "{}", a.stderr);
        assert_eq!(a.code, b.code);
        assert_eq!(a.raw_json, b.raw_json);
        assert_eq!(a.csv, b.csv);
    }
    let a = run(&["algebra", "commutant", "--points", "ball:3", "--modes", "16", "--seed", "1"]);
    let b = run(&["algebra", "commutant", "--points", "ball:3", "--modes", "16", "--seed", "2"]);
    assert_ne!(a.json["config_hash"], b.json["config_hash"]);
    assert_ne!(a.json["result"]["points"], b.json["result"]["points"]);
}

#[test]
fn sequential_and_parallel_agree() {
    let par = run(&["scan", "cone-detect", "--box", "off-cone-default", "--grid", "1e-2,1e-3,6", "--outer", "6"]);
    let seq = run(&["--sequential", "scan", "cone-detect", "--box", "off-cone-default", "--grid", "1e-2,1e-3,6", "--outer", "6"]);
    assert_eq!(par.json["result"], seq.json["result"]);
    assert_eq!(seq.json["config"]["parallel"], false);
}

#[test]
fn documents_embed_config_and_hashes() {
    let r = run(&["kernel", "--xi", "0,1,0,0"]);
    let j = &r.json;
    assert_eq!(j["schema_version"], 1);
    assert_eq!(j["command"], "kernel");
    assert_eq!(f(&j["config"]["epsilon"]), 0.01);
    let compact = serde_json::to_vec(&j["config"]).unwrap();
    let hex = |b: &[u8]| -> String { Sha256::digest(b).iter().map(|x| format!("{x:02x}")).collect() };
    assert_eq!(j["config_hash"].as_str().unwrap(), hex(&compact));
    assert_eq!(j["csv_sha256"].as_str().unwrap(), hex(&r.csv));
    assert_eq!(j["content_hash"].as_str().unwrap().len(), 64);
    // RFC 4180: CRLF line ends, the hash column on every row
    let text = String::from_utf8(r.csv.clone()).unwrap();
    assert!(text.ends_with("\r\n"));
    let (header, rows) = records(&r.csv);
    let hc = column(&header, "config_hash");
    assert!(rows.iter().all(|row| &row[hc] == j["config_hash"].as_str().unwrap()));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "epsilon = 0.02\nseed = 9\n\n[kernel]\nxi = [[0.0, 2.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]]\nmethod = \"both\"\n",
    )
    .unwrap();
    let out = cfslab(dir.path(), &["--config", "run.toml", "--epsilon", "0.03", "kernel", "--json", "o.json"]);
    assert_eq!(out.status.code(), Some(0));
    let j: Value = serde_json::from_slice(&std::fs::read(dir.path().join("o.json")).unwrap()).unwrap();
    assert_eq!(f(&j["config"]["epsilon"]), 0.03);
    assert_eq!(j["config"]["seed"], 9);
    assert_eq!(j["config"]["kernel"]["method"], "both");
    assert_eq!(j["result"]["points"].as_array().unwrap().len(), 2);
    // the printed configuration reloads to itself
    let printed = cfslab(dir.path(), &["--config", "run.toml", "config"]);
    std::fs::write(dir.path().join("again.toml"), &printed.stdout).unwrap();
    let again = cfslab(dir.path(), &["--config", "again.toml", "config"]);
    assert_eq!(printed.stdout, again.stdout);
}

#[test]
fn json_goes_to_stdout_by_default() {
    let dir = TempDir::new().unwrap();
    let out = cfslab(dir.path(), &["scan", "nu"]);
    assert_eq!(out.status.code(), Some(0));
    let j: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["command"], "scan nu");
}

#[test]
fn acceptance_subset_and_known_failures() {
    let r = run(&["acceptance", "--only", "2,10"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json["result"]["criteria"].as_array().unwrap().len(), 2);
    assert!(r.stderr.contains("criterion 2: PASS"));
    let strict = run(&["acceptance", "--only", "9"]);
    assert_eq!(strict.code, 1);
    let allowed = run(&["acceptance", "--only", "9", "--allow-known-failures"]);
    assert_eq!(allowed.code, 0);
    assert_eq!(allowed.json["result"]["criteria"][0]["passed"], false);
}
