use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hilfer_core::operators::{weighted_s_operator, Generator, SubordinationControl};
use nalgebra::DVector;
use serde_json::Value;

fn problems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems")
}

fn hilfer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilfer"))
        .args(args)
        .env_remove("FRAC_SEED")
        .output()
        .expect("binary runs")
}

fn problem(name: &str) -> String {
    problems().join(name).to_string_lossy().into_owned()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn write_problem(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn specfun_prints_seven_decimals() {
    let o = hilfer(&["specfun", "ml", "0.5", "1", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout), "0.4275836\n");
    let o = hilfer(&["specfun", "gamma", "0.5", "--precision", "12"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout), "1.772453850906\n");
}

#[test]
fn specfun_argument_errors_are_usage_errors() {
    assert_eq!(hilfer(&["specfun", "ml", "0.5"]).status.code(), Some(1));
    assert_eq!(hilfer(&["specfun", "nosuch", "1"]).status.code(), Some(1));
    assert_eq!(hilfer(&[]).status.code(), Some(1));
    // mu outside (0, 1) is a numerical domain failure
    assert_eq!(hilfer(&["specfun", "wright", "1.5", "1"]).status.code(), Some(2));
}

#[test]
fn certify_contractive_instance() {
    let o = hilfer(&["certify", &problem("contractive.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j = stdout_json(&o);
    assert_eq!(j["contraction_ok"], Value::Bool(true));
    assert_eq!(j["estimated"], Value::Bool(false));
    assert!((j["q"].as_f64().unwrap() - 0.7125).abs() < 1e-4);
    let notes: Vec<&str> = j["notes"].as_array().unwrap().iter().map(|n| n.as_str().unwrap()).collect();
    assert!(notes.iter().any(|n| n.contains("G0")));
    assert!(notes.iter().any(|n| n.contains("Gamma(mu)^2")));
}

#[test]
fn certificate_failure_exits_three_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(problems().join("contractive.json"))
        .unwrap()
        .replace("\"L\": 1.0", "\"L\": 3.0");
    let path = write_problem(dir.path(), "loose.json", &text);
    let o = hilfer(&["certify", &path]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout_json(&o)["contraction_ok"], Value::Bool(false));
}

#[test]
fn homogeneous_solve_matches_solution_operator() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let o = hilfer(&["solve", &problem("homogeneous.json"), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,w1,u1"));
    let gen = Generator::scalar(1.0);
    let ctl = SubordinationControl::default();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let t: f64 = cells[0].parse().unwrap();
        let w: f64 = cells[1].parse().unwrap();
        let s = weighted_s_operator(&gen, 0.5, 0.5, t, &DVector::from_element(1, 1.0), &ctl).unwrap()[0];
        assert!((w - s).abs() <= 1e-6 * s.abs(), "t = {t}: {w} vs {s}");
        if i == 0 {
            assert_eq!(cells[2], "", "u is undefined at t = 0 when gamma < 1");
        } else {
            let u: f64 = cells[2].parse().unwrap();
            assert!((u - w * t.powf(-0.25)).abs() <= 1e-12 * u.abs());
        }
        rows += 1;
    }
    assert_eq!(rows, 257);
}

#[test]
fn csv_carries_at_least_twelve_significant_digits() {
    let o = hilfer(&["solve", &problem("homogeneous.json"), "--n", "8"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let cell = text.lines().nth(3).unwrap().split(',').nth(1).unwrap().to_string();
    let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
    assert!(mantissa.len() >= 12, "{cell}");
}

#[test]
fn every_example_certifies_and_respects_its_certificate() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["contractive.json", "nonlinear.json", "homogeneous.json"] {
        let c = hilfer(&["certify", &problem(name)]);
        assert_eq!(c.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&c.stderr));
        let q = stdout_json(&c)["q"].as_f64().unwrap();
        let report = dir.path().join(format!("{name}.report"));
        let csv = dir.path().join(format!("{name}.csv"));
        let s = hilfer(&[
            "solve",
            &problem(name),
            "--out",
            csv.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(s.status.code(), Some(0), "{name}");
        let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(r["converged"], Value::Bool(true));
        let ratio = r["measured_ratio"].as_f64().unwrap();
        assert!(ratio <= q + 0.1, "{name}: ratio {ratio} vs q {q}");
        assert!(r["final"]["weighted"].is_array());
    }
}

#[test]
fn non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(problems().join("nonlinear.json"))
        .unwrap()
        .replace("\"max_iter\": 200", "\"max_iter\": 2");
    let path = write_problem(dir.path(), "short.json", &text);
    let o = hilfer(&["solve", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not reach"));
}

#[test]
fn malformed_inputs_report_positions() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(problems().join("nonlinear.json")).unwrap();
    let cases = [
        ("expr.json", base.replace("0.3*sin(u)", "0.3*sin(u"), "byte 9"),
        ("scope.json", base.replace("0.3*sin(u)", "0.3*sin(s)"), "byte 8"),
        ("json.json", base.replace("\"mu\": 0.5,", "\"mu\": 0.5"), "line 3"),
        ("version.json", base.replace("\"1\"", "\"7\""), "schema_version"),
        ("dims.json", base.replace("[[1.0]]", "[[1.0, 0.0], [0.0, 1.0]]"), "dimension"),
    ];
    for (name, body, needle) in cases {
        let path = write_problem(dir.path(), name, &body);
        let o = hilfer(&["solve", &path]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(o.status.code(), Some(1), "{name}: {err}");
        assert!(err.contains(needle), "{name}: {err}");
    }
    assert_eq!(hilfer(&["solve", "/nonexistent/problem.json"]).status.code(), Some(1));
}

#[test]
fn residual_of_written_solution() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    hilfer(&["solve", &problem("homogeneous.json"), "--out", csv.to_str().unwrap()]);
    let o = hilfer(&["residual", &problem("homogeneous.json"), "--solution", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j = stdout_json(&o);
    assert_eq!(j["n"], Value::from(256));
    assert!(j["weighted_sup"].as_f64().unwrap() < 1e-2);
    assert!(j["initial_condition_error"].as_f64().unwrap() < 0.02);
}

#[test]
fn gronwall_files() {
    let o = hilfer(&["gronwall", &problem("gronwall_classical.json")]);
    assert_eq!(o.status.code(), Some(0));
    let j = stdout_json(&o);
    assert_eq!(j["hypothesis"], "holds");
    assert_eq!(j["series_bound"], "holds");
    assert!((j["series_end"].as_f64().unwrap() - std::f64::consts::E).abs() < 1e-8);
    let o = hilfer(&["gronwall", &problem("gronwall_violated.json")]);
    assert_eq!(o.status.code(), Some(0));
    let j = stdout_json(&o);
    assert_eq!(j["hypothesis"], "violated");
    assert_eq!(j["corollary_bound"], "not_applicable");
}

#[test]
fn converge_reports_each_level() {
    let o = hilfer(&["converge", &problem("nonlinear.json"), "--grids", "32,64,128"]);
    assert_eq!(o.status.code(), Some(0));
    let levels = stdout_json(&o);
    let levels = levels.as_array().unwrap();
    assert_eq!(levels.len(), 3);
    assert!(levels[0]["diff_to_next"].as_f64().unwrap() > 0.0);
    assert!(levels[1]["diff_ratio"].as_f64().is_some());
    assert!(levels[2]["diff_to_next"].is_null());
}

#[test]
fn seed_override() {
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_hilfer"));
        c.args(["certify", &problem("nonlinear.json")]);
        match seed {
            Some(s) => c.env("FRAC_SEED", s),
            None => c.env_remove("FRAC_SEED"),
        };
        c.output().unwrap()
    };
    let default = run(None);
    assert_eq!(default.stdout, run(Some("0x5eedf4ac")).stdout);
    assert_eq!(run(Some("not-a-seed")).status.code(), Some(1));
    let other = run(Some("7"));
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(default.stdout, other.stdout);
}
