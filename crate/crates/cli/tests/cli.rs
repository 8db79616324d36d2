use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_qplab");

fn qplab_in(dir: &Path, config: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).current_dir(dir).env_remove("QPLAB_CONFIG");
    if let Some(c) = config {
        cmd.env("QPLAB_CONFIG", c);
    }
    cmd.output().expect("binary runs")
}

fn qplab(args: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    qplab_in(dir.path(), None, args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn csv_values(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').filter_map(|v| v.parse().ok()).collect())
        .collect()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

fn report_schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/verification_report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn failing_families(report: &Value) -> Vec<String> {
    report["families"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["pass"] == false)
        .map(|f| f["name"].as_str().unwrap().to_owned())
        .collect()
}

#[test]
fn chart_example() {
    let o = qplab(&["chart", "pi/2,0,0"]);
    assert_eq!(code(&o), 0);
    let rows = csv_values(&stdout(&o));
    let expected = [0.0, 1.0, -1.0, 0.0];
    for (v, e) in rows[0].iter().zip(expected) {
        assert!((v - e).abs() < 1e-15);
    }
    assert!(stdout(&o).starts_with("z11,z12,z21,z22\n"));
}

#[test]
fn unchart_recovers_chart_point() {
    let o = qplab(&["unchart", "0,1,-1,0"]);
    assert_eq!(code(&o), 0);
    let p = &csv_values(&stdout(&o))[0];
    assert!((p[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!(p[1].abs() < 1e-15 && p[2].abs() < 1e-15);

    let z = csv_values(&stdout(&qplab(&["chart", "1.1,-0.4,0.9"])))[0].clone();
    let arg = z.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",");
    let back = &csv_values(&stdout(&qplab(&["unchart", &arg])))[0];
    for (v, e) in back.iter().zip([1.1, -0.4, 0.9]) {
        assert!((v - e).abs() < 1e-12);
    }
}

#[test]
fn unchart_outside_domain_is_an_error() {
    let o = qplab(&["unchart", "identity"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not in I"));
    assert_eq!(code(&qplab(&["unchart", "1,2,3"])), 2);
}

#[test]
fn eval_on_identity_orbit_is_rank_zero() {
    let o = qplab(&["eval", "--point", "pi/2,0,0"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("# rank-0"));
    assert!(csv_values(&text)[0][3..].iter().all(|v| v.abs() < 1e-12));

    let o = qplab(&["eval", "--matrix", "identity"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("rank-0"));
    assert!(csv_values(&stdout(&o)).iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn eval_value_scales_inversely_with_form() {
    for (c, arg) in [(1.0, "1"), (2.0, "2")] {
        let o = qplab(&["--form-scale", arg, "eval", "--point", "pi/2,0,1"]);
        assert_eq!(code(&o), 0);
        let text = stdout(&o);
        assert!(text.contains("# rank-2"));
        let p = csv_values(&text)[0][3];
        assert!((p - 0.5f64.tanh() / c).abs() < 1e-12, "{p}");
    }
}

#[test]
fn eval_json_document() {
    let o = qplab(&["--format", "json", "eval", "--point", "pi/2,0,1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["rank"], "rank-2");
    assert_eq!(v["form_scale"], 1.0);
    assert!((v["record"]["p_tau_theta"].as_f64().unwrap() - 0.5f64.tanh()).abs() < 1e-12);
}

#[test]
fn angle_expressions_match_decimals() {
    let a = qplab(&["eval", "--point", "pi/2,0,1"]);
    let b = qplab(&["eval", "--point", "1.5707963267948966,0,1"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&qplab(&["eval", "--point", "pi/0,0,1"])), 2);
}

#[test]
fn leaf_preserves_rho() {
    let o = qplab(&["leaf", "--start", "pi/2,0,1", "--steps", "10000"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let rows = csv_values(&text);
    assert_eq!(rows.len(), 10_001);
    assert!(rows.iter().all(|r| (r[2] - 1.0).abs() < 1e-8));
    assert!(rows.iter().all(|r| (0.0..std::f64::consts::TAU).contains(&r[1])));
    let drift: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# max_rho_drift="))
        .expect("drift footer")
        .parse()
        .unwrap();
    assert!(drift < 1e-8);
    assert!(text.contains("# truncated=false"));
}

#[test]
fn leaf_from_rank_zero_point_exits_one() {
    let o = qplab(&["leaf", "--start", "pi/2,0,0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("rank-0"));
    assert!(o.stdout.is_empty());
}

#[test]
fn leaf_is_symmetric_under_theta_shift() {
    let a = csv_values(&stdout(&qplab(&["leaf", "--start", "1,0,0.5", "--steps", "300"])));
    let b = csv_values(&stdout(&qplab(&["leaf", "--start", "1,0.25,0.5", "--steps", "300"])));
    for (x, y) in a.iter().zip(&b) {
        assert!((x[0] - y[0]).abs() < 1e-10);
        assert!((x[2] - y[2]).abs() < 1e-10);
        let dtheta = (y[1] - x[1]).rem_euclid(std::f64::consts::TAU);
        assert!((dtheta - 0.25).abs() < 1e-9, "{dtheta}");
    }
}

#[test]
fn leaf_json_document() {
    let o = qplab(&["--format", "json", "--seed", "9", "leaf", "--start", "pi/2,0,1", "--steps", "5"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["points"].as_array().unwrap().len(), 6);
    assert!(v["config"].is_object());
    assert!(v["summary"]["max_rho_drift"].as_f64().unwrap() < 1e-8);
}

#[test]
fn calibrate_reports_mismatch() {
    let o = qplab(&["calibrate"]);
    assert_eq!(code(&o), 1);
    let row = &csv_values(&stdout(&o))[0];
    assert!(row[2] > 1.0, "spread {}", row[2]);
    assert_eq!(row[3], 1600.0);
    assert!(stderr(&o).contains("does not match"));
}

#[test]
fn calibrated_scale_halves_when_form_doubles() {
    let one = csv_values(&stdout(&qplab(&["calibrate"])))[0][0];
    let two = csv_values(&stdout(&qplab(&["--form-scale", "2", "calibrate"])))[0][0];
    assert_eq!(two, one / 2.0);
}

#[test]
fn degenerate_grid_exits_two() {
    let o = qplab(&["calibrate", "--grid", "20,20,1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("degenerate grid"));
    assert_eq!(code(&qplab(&["calibrate", "--grid", "20,0,5"])), 2);
}

#[test]
fn failed_calibration_does_not_write_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let o = qplab_in(dir.path(), Some(&cfg), &["calibrate", "--write"]);
    assert_eq!(code(&o), 1);
    assert!(!cfg.exists());
    assert!(!dir.path().join("qplab.json").exists());
}

#[test]
fn successful_calibration_writes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 5}"#).unwrap();
    let o = qplab_in(dir.path(), Some(&cfg), &["--tol", "1e3", "calibrate", "--write"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let c = csv_values(&stdout(&o))[0][1];
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    assert_eq!(written["form_scale"].as_f64().unwrap(), c);
    assert_eq!(written["seed"], 5);

    let o = qplab_in(dir.path(), None, &["--tol", "1e3", "calibrate", "--write"]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("qplab.json").exists());
}

#[test]
fn config_file_sits_below_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"form_scale": 2.0, "format": "json"}"#).unwrap();

    let o = qplab_in(dir.path(), Some(&cfg), &["eval", "--point", "pi/2,0,1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["form_scale"], 2.0);

    let o = qplab_in(dir.path(), Some(&cfg), &["--form-scale", "4", "--format", "csv", "eval", "--point", "pi/2,0,1"]);
    assert_eq!(code(&o), 0);
    let p = csv_values(&stdout(&o))[0][3];
    assert!((p - 0.5f64.tanh() / 4.0).abs() < 1e-12);
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"form_scale": -1}"#).unwrap();
    assert_eq!(code(&qplab_in(dir.path(), Some(&cfg), &["chart", "1,0,0"])), 2);
    std::fs::write(&cfg, r#"{"unknown_key": 1}"#).unwrap();
    assert_eq!(code(&qplab_in(dir.path(), Some(&cfg), &["chart", "1,0,0"])), 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&qplab_in(dir.path(), Some(&missing), &["chart", "1,0,0"])), 0);
    std::fs::write(&cfg, "not json").unwrap();
    assert_eq!(code(&qplab_in(dir.path(), Some(&cfg), &["chart", "1,0,0"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&qplab(&["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&qplab(&["--group", "so5", "verify", "--suite", "core"])), 2);
    assert_eq!(code(&qplab(&["--form-scale", "0", "chart", "1,0,0"])), 2);
    assert_eq!(code(&qplab(&["eval"])), 2);
    assert_eq!(code(&qplab(&["frobnicate"])), 2);
}

#[test]
fn verify_reports_validate_against_schema() {
    let schema = report_schema();
    for suite in ["core", "double", "bivector", "btz", "su2"] {
        let o = qplab(&["verify", "--suite", suite]);
        let v = json(&o);
        let errors: Vec<String> = schema.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{suite}: {errors:?}");
        assert_eq!(v["suite"], suite);
        assert_eq!(v["pass"], code(&o) == 0);
    }
}

#[test]
fn verify_exit_codes() {
    let o = qplab(&["--group", "sl3r", "verify", "--suite", "double"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["pass"], true);

    for suite in ["core", "bivector", "su2"] {
        assert_eq!(code(&qplab(&["verify", "--suite", suite])), 0, "{suite}");
    }

    let o = qplab(&["verify", "--suite", "btz"]);
    assert_eq!(code(&o), 1);
    assert_eq!(failing_families(&json(&o)), ["btz.calibration_spread", "btz.formula_1_match"]);

    let o = qplab(&["--tol", "1e-30", "verify", "--suite", "btz"]);
    assert_eq!(code(&o), 1);
    assert!(failing_families(&json(&o)).len() > 2);
}

#[test]
fn verify_csv_table() {
    let o = qplab(&["--format", "csv", "verify", "--suite", "core"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("name,"));
    assert!(text.lines().count() > 5);
}

#[test]
fn output_file_receives_primary_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chart.csv");
    let o = qplab_in(dir.path(), None, &["--out", out.to_str().unwrap(), "chart", "pi/2,0,0"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("z11,z12,z21,z22\n"));
}

#[test]
fn runs_are_deterministic() {
    for args in [
        &["--seed", "7", "verify", "--suite", "bivector"][..],
        &["leaf", "--start", "1,0.3,-0.7", "--steps", "2000"][..],
        &["--format", "json", "calibrate", "--grid", "7,5,3"][..],
    ] {
        let (a, b) = (qplab(args), qplab(args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(code(&a), code(&b));
    }
}

#[test]
fn seed_changes_sampled_checks_only() {
    let a = json(&qplab(&["--seed", "1", "verify", "--suite", "core"]));
    let b = json(&qplab(&["--seed", "2", "verify", "--suite", "core"]));
    assert_eq!(a["seed"], 1);
    assert_eq!(b["seed"], 2);
    assert_eq!(a["pass"], b["pass"]);
    assert_eq!(a["n_checks"], b["n_checks"]);
}
