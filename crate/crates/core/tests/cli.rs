//! Exit-code contract and output determinism of the `crpoint` binary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const ELLIPTIC: &str = r#"{"A":[[[0,0],[0,0]],[[0,0],[0,0]]],"B":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
const HYPERBOLIC: &str = r#"{"A":[[[1,0],[0,0]],[[0,0],[0,0]]],"B":[[[0,0],[0,0]],[[0,0],[1,0]]]}"#;
const GENERIC: &str = r#"{"A":[[[1,0],[0.3,0.2]],[[0.1,0],[0.5,0.5]]],"B":[[[0.2,0.1],[0.4,0]],[[0.4,0],[-0.3,0.2]]]}"#;
const NON_SYMMETRIC: &str = r#"{"A":[[[1,0],[0,0]],[[0,0],[1,0]]],"B":[[[0,0],[1,0]],[[0,0],[0,0]]]}"#;
// A = [[0, 1], [1, i]] has a Jordan-block cosquare.
const TYPE_II: &str = r#"{"A":[[[0,0],[1,0]],[[1,0],[0,1]]],"B":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
const DEGENERATE: &str = r#"{"A":[[[0,0],[0,0]],[[0,0],[0,0]]],"B":[[[1,0],[0,0]],[[0,0],[0,0]]]}"#;

fn crpoint(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crpoint"))
        .args(args)
        .current_dir(dir)
        .env_remove("CRPOINT_THREADS")
        .output()
        .expect("binary runs")
}

fn setup() -> TempDir {
    let dir = TempDir::new().unwrap();
    for (name, body) in [
        ("eli.json", ELLIPTIC),
        ("hyp.json", HYPERBOLIC),
        ("generic.json", GENERIC),
        ("nonsym.json", NON_SYMMETRIC),
        ("type2.json", TYPE_II),
        ("degenerate.json", DEGENERATE),
        ("garbage.json", "{\"A\": 3"),
        ("extra.json", r#"{"A":[[[0,0],[0,0]],[[0,0],[0,0]]],"B":[[[1,0],[0,0]],[[0,0],[1,0]]],"C":1}"#),
    ] {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn exit_code_matrix() {
    let dir = setup();
    let d = dir.path();
    let cases: &[(&[&str], i32)] = &[
        (&["classify", "eli.json"], 0),
        (&["classify", "hyp.json"], 0),
        (&["classify", "degenerate.json"], 0),
        (&["--strict", "classify", "degenerate.json"], 3),
        (&["classify", "nonsym.json"], 2),
        (&["classify", "garbage.json"], 2),
        (&["classify", "extra.json"], 2),
        (&["classify", "missing.json"], 2),
        (&["classify"], 2),
        (&["frobnicate"], 2),
        (&["--tol", "-1", "classify", "eli.json"], 2),
        (&["normal-form", "generic.json"], 0),
        (&["normal-form", "type2.json"], 3),
        (&["normal-form", "hyp.json"], 3),
        (&["normal-form", "degenerate.json"], 3),
        (&["homotopy", "eli.json"], 0),
        (&["homotopy", "degenerate.json"], 3),
        (&["homotopy", "nonsym.json"], 2),
        (&["homotopy", "--samples", "1", "eli.json"], 2),
        (&["levi-scan", "--model", "elliptic", "--grid", "3"], 0),
        (&["levi-scan", "--model", "hyperbolic", "--grid", "3"], 0),
        (&["levi-scan", "--model", "hyperbolic", "--grid", "3", "--include-origin"], 1),
        (&["levi-scan", "--model", "parabolic"], 2),
        (&["levi-scan", "--model", "elliptic", "--radius", "0.5"], 2),
        (&["surface-check", "generic.json"], 2),
    ];
    for (args, expected) in cases {
        let o = crpoint(args, d);
        assert_eq!(code(&o), *expected, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn classify_reports_models() {
    let dir = setup();
    let v = stdout_json(&crpoint(&["classify", "eli.json"], dir.path()));
    assert_eq!(v["sign"], "elliptic");
    assert_eq!(v["det4"].as_f64(), Some(1.0));
    let v = stdout_json(&crpoint(&["classify", "hyp.json"], dir.path()));
    assert_eq!(v["sign"], "hyperbolic");
    assert_eq!(v["det4"].as_f64(), Some(-1.0));
    let o = crpoint(&["classify", "nonsym.json"], dir.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("not symmetric"));
}

#[test]
fn rejection_reasons_are_machine_readable() {
    let dir = setup();
    let v = stdout_json(&crpoint(&["normal-form", "type2.json"], dir.path()));
    assert_eq!(v["reason"], "non_generic:type_ii");
    let v = stdout_json(&crpoint(&["normal-form", "hyp.json"], dir.path()));
    assert_eq!(v["reason"], "degenerate_A");
}

#[test]
fn normal_form_has_type_i_shape() {
    let dir = setup();
    let v = stdout_json(&crpoint(&["normal-form", "generic.json"], dir.path()));
    assert_eq!(v["class"]["type"], "type_i");
    let theta = v["class"]["theta"].as_f64().unwrap();
    assert!(theta > 0.0 && theta < std::f64::consts::PI);
    for k in 0..2 {
        let d = &v["B_reduced"][k][k];
        assert!(d[0].as_f64().unwrap() >= 0.0 && d[1].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn model_homotopy_is_one_constant_segment() {
    let dir = setup();
    let v = stdout_json(&crpoint(&["homotopy", "hyp.json"], dir.path()));
    let segs = v["segments"].as_array().unwrap();
    assert_eq!(segs.len(), 1);
    assert_eq!(segs[0]["kind"], "constant");
    assert_eq!(v["certificate"]["pass"], true);
}

#[test]
fn homotopy_then_surface_check() {
    let dir = setup();
    let d = dir.path();
    let o = crpoint(&["homotopy", "generic.json", "--out", "path.json"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = crpoint(&["surface-check", "path.json", "--reverse", "--s-steps", "24", "--u-steps", "12", "--theta-steps", "12"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["n_used"], v["n_required"]);
}

#[test]
fn forged_certificate_is_rechecked() {
    let dir = setup();
    let d = dir.path();
    // A straight line from the elliptic to the hyperbolic model must cross det4 = 0.
    let path = format!(
        r#"{{"segments":[{{"kind":"linear","params":{{"from":{ELLIPTIC},"to":{HYPERBOLIC}}}}}],
        "certificate":{{"samples":64,"min_abs_det4":1.0,"sign":1,"pass":true,"margin":1e-6,"worst_t":0.0,
        "max_step_variation":0.0,"interval_lower_bound":1.0}}}}"#
    );
    std::fs::write(d.join("forged.json"), path).unwrap();
    let o = crpoint(&["surface-check", "forged.json"], d);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let dir = setup();
    let d = dir.path();
    for args in [
        vec!["homotopy", "generic.json"],
        vec!["normal-form", "generic.json"],
        vec!["levi-scan", "--model", "elliptic", "--grid", "3"],
    ] {
        let first = crpoint(&args, d).stdout;
        let mut threaded = vec!["--threads", "3"];
        threaded.extend(&args);
        assert_eq!(first, crpoint(&args, d).stdout, "{args:?}");
        assert_eq!(first, crpoint(&threaded, d).stdout, "{args:?} with 3 threads");
    }
}

#[test]
fn csv_export_and_out_flag() {
    let dir = setup();
    let d = dir.path();
    let o = crpoint(&["levi-scan", "--model", "elliptic", "--grid", "2", "--csv", "spectra.csv", "--out", "report.json"], d);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(d.join("spectra.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 64);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["points"], 64);
}

#[test]
fn small_selftest_passes() {
    let dir = setup();
    let o = crpoint(&["selftest", "--cases", "10"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 8);
    assert_eq!(v["pass"], true);
}

