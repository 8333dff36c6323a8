use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssweight"))
        .args(args)
        .env_remove("SSWEIGHT_NO_PARALLEL")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_scenario(dir: &Path, spec: &str) -> Value {
    let path = dir.join("s.json");
    let out = run(&["scenario", spec, "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn save(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn check_all_on_ngon_passes() {
    let out = run(&["check", "--all", "--scenario", "ngon:3"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("0 fail"));
}

#[test]
fn every_builtin_checks_clean() {
    let list = stdout(&run(&["scenario", "--list"]));
    for spec in list.lines() {
        let out = run(&["check", "--all", "--scenario", spec, "--format", "json"]);
        assert_eq!(code(&out), 0, "{spec}");
    }
}

#[test]
fn degenerate_pairing_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = write_scenario(dir.path(), "ngon:3");
    doc["faces"][0]["pairing"]["0"] = serde_json::json!([["0"]]);
    let path = save(dir.path(), "broken.json", &doc);

    let out = run(&["validate", &path]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("pairing_not_perfect"), "{}", stdout(&out));

    let out = run(&["validate", &path, "--format", "json"]);
    assert_eq!(code(&out), 1);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let located = v["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|x| x["kind"] == "pairing_not_perfect" && x["face"] == serde_json::json!([1]));
    assert!(located, "{v:#}");

    // Checks on broken input fail with witnesses rather than refusing to run.
    let out = run(&["check", "--h1", &path, "--format", "json"]);
    assert_eq!(code(&out), 1);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    for r in v["results"].as_array().unwrap() {
        if r["status"] == "fail" {
            assert!(r.get("witness").is_some(), "{r:#}");
        }
    }
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["e2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("docs/strata_complex.schema.json"));
    assert_eq!(code(&run(&["e2", "x.json", "--scenario", "ngon:3"])), 2);
    assert_eq!(code(&run(&["e2", "--scenario", "ngon:2"])), 2);
    assert_eq!(code(&run(&["e2", "/nonexistent/file.json"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["slopes", "--scenario", "elliptic"])), 2);
}

#[test]
fn malformed_json_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"name\": 3").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn report_json_has_hodge_vectors() {
    let out = run(&["report", "--scenario", "tetrahedron", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema_version"], 1);
    let degrees = v["degrees"].as_array().unwrap();
    assert_eq!(degrees.len(), 5);
    assert_eq!(degrees[2]["hodge"]["values"], serde_json::json!([1, 4, 1]));
    assert!(degrees.iter().all(|d| d["symmetric"] == true));
}

#[test]
fn report_is_deterministic_across_modes() {
    let args = ["report", "--scenario", "ngon-x-p1:4", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    let c = Command::new(env!("CARGO_BIN_EXE_ssweight"))
        .args(args)
        .env("SSWEIGHT_NO_PARALLEL", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn polygons_from_explicit_data() {
    let out = run(&["polygons", "--slopes", "1/2,1/2", "--jumps", "0,1", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["modules"][0]["newton"], serde_json::json!([["0", "0"], ["2", "1"]]));
    let out = run(&["polygons", "--slopes", "0,1", "--jumps", "1,1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn ito_module_input_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let good = serde_json::json!({
        "weight": 0,
        "spaces": [{"bidegree": [0, 0], "dim": 1}],
        "pairing": [{"left": [0, 0], "right": [0, 0], "matrix": [["1"]]}]
    });
    let path = save(dir.path(), "v.json", &good);
    assert_eq!(code(&run(&["check", &path])), 0);
    let mut bad = good.clone();
    bad["pairing"][0]["matrix"] = serde_json::json!([["0"]]);
    let path = save(dir.path(), "w.json", &bad);
    assert_eq!(code(&run(&["check", &path])), 1);
}

#[test]
fn scenario_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path(), "cellular:1,2,1");
    let path = dir.path().join("s.json");
    let out = run(&["e2", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["abutment"]["2"], 2);
}
