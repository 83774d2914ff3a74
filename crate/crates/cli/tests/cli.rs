//! End-to-end checks of the binary: exit codes, report schemas, determinism,
//! and config-file precedence.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psifrac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tmp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("psifrac-cli-{}-{name}", std::process::id()))
}

#[test]
fn eval_prints_one_value_per_grid_point() {
    let out = run(&[
        "eval", "--op", "hilfer", "--alpha", "0.5", "--beta", "0.5", "--psi", "x", "--a", "0",
        "--x", "1", "--f", "exp(x)",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let vals: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(vals.len(), 1);
    assert!(vals[0].is_finite() && vals[0] > 0.0);

    // order-1 integral of exp from 0 is exp(x) - 1
    let out = run(&[
        "eval", "--op", "integral", "--alpha", "1", "--a", "0", "--grid", "0.5:1.5:3", "--f",
        "exp(x)",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let vals: Vec<f64> = stdout(&out).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(vals.len(), 3);
    for (v, x) in vals.iter().zip([0.5f64, 1.0, 1.5]) {
        assert!((v - (x.exp() - 1.0)).abs() < 1e-9, "at {x}: {v}");
    }
}

#[test]
fn verify_emits_schema_stable_json() {
    let out = run(&[
        "verify", "--rule", "leibniz2", "--f", "x", "--g", "exp(x)", "--alpha", "0.5", "--beta",
        "0.5", "--psi", "x", "--a", "0", "--x", "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let line = text.lines().next().unwrap();
    assert!(line.starts_with("{\"case\":"), "keys must start with case");
    let v: Value = serde_json::from_str(line).unwrap();
    for key in [
        "case", "params", "lhs", "rhs", "omega", "abs_residual", "rel_residual", "terms_used",
        "converged",
    ] {
        assert!(v.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(v["params"]["alpha"].as_f64().unwrap(), 0.5);
    assert_eq!(v["params"]["psi"].as_str().unwrap(), "x");
    assert!(v["rel_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn residual_threshold_sets_exit_one() {
    let out = run(&[
        "verify", "--f", "exp(x)", "--g", "sin(x)", "--alpha", "0.5", "--beta", "0.5", "--a",
        "0", "--x", "1", "--tol", "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // report still written
    let text = stdout(&out);
    let v: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(v["rel_residual"].as_f64().unwrap() > 1e-30);
    assert!(!out.stderr.is_empty(), "failure must be named on stderr");
}

#[test]
fn forced_nonconvergence_sets_exit_three() {
    let out = run(&[
        "verify", "--f", "exp(x)", "--g", "sin(x)", "--alpha", "0.5", "--beta", "0.5", "--a",
        "0", "--x", "1", "--quad-tol", "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let text = stdout(&out);
    let v: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(v["converged"], Value::Bool(false));
}

#[test]
fn usage_errors_set_exit_two() {
    let cases: [&[&str]; 6] = [
        &["eval", "--op", "bogus", "--f", "x", "--x", "1"],
        &["verify", "--f", "x +", "--g", "x", "--x", "1"],
        &["eval", "--op", "rl", "--f", "x", "--x", "1", "--grid", "1:2:3"],
        &["eval", "--op", "rl", "--f", "x", "--x", "1", "--psi", "pow:-1"],
        &["suite", "--sample", "0"],
        &["eval", "--op", "rl", "--f", "x", "--x", "1", "--a", "2"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
        assert!(!out.stderr.is_empty(), "args {args:?} must explain the error");
    }
}

#[test]
fn suite_reports_are_byte_deterministic() {
    let args = [
        "suite", "--cases", "all", "--sample", "4", "--seed", "7", "--alphas", "0.5", "--betas",
        "0,1", "--psi", "x", "--a", "0", "--x", "1",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(stdout(&first).lines().count(), 5, "header plus four sampled rows");
}

#[test]
fn suite_writes_the_matrix_to_a_file() {
    let path = tmp_path("report.csv");
    let out = run(&[
        "suite", "--cases", "t:exp_t,one:sin_t", "--alphas", "0.3,0.7", "--betas", "0,1",
        "--psi", "x", "--a", "0", "--x", "1", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "case,a0.3_b0,a0.3_b1,a0.7_b0,a0.7_b1");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("t*exp_t,"));
    assert!(lines[2].starts_with("one*sin_t,"));
}

#[test]
fn config_file_defaults_yield_to_flags() {
    let path = tmp_path("run.conf");
    std::fs::write(
        &path,
        "# defaults for a verify run\nalpha = 0.7\nbeta = 1\nf = x\ng = exp(x)\nx = 1\n",
    )
    .unwrap();
    let from_file = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0), "{}", String::from_utf8_lossy(&from_file.stderr));
    let v: Value = serde_json::from_str(stdout(&from_file).lines().next().unwrap()).unwrap();
    assert_eq!(v["params"]["alpha"].as_f64().unwrap(), 0.7);
    assert_eq!(v["params"]["beta"].as_f64().unwrap(), 1.0);

    let overridden = run(&["verify", "--config", path.to_str().unwrap(), "--alpha", "0.3"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(overridden.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&overridden).lines().next().unwrap()).unwrap();
    assert_eq!(v["params"]["alpha"].as_f64().unwrap(), 0.3);
}

#[test]
fn list_cases_names_the_collapses_and_the_corpus() {
    let out = run(&["list-cases"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in [
        "psi-riemann-liouville", "riemann-liouville", "psi-caputo", "caputo", "hilfer",
        "hadamard", "katugampola", "caputo-hadamard", "caputo-katugampola", "chen",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
    for name in ["one", "t2", "delta2", "exp_t", "sin_t", "exp_delta"] {
        assert!(text.contains(name), "missing corpus member {name}");
    }
}

#[test]
fn scale_selectors_cover_all_four_forms() {
    for (psi, a, x) in [
        ("lnx", "1", "2"),
        ("pow:2", "0.5", "1.5"),
        ("expr:x + sin(x)", "0", "1"),
    ] {
        let out = run(&[
            "eval", "--op", "rl", "--alpha", "0.5", "--psi", psi, "--a", a, "--x", x, "--f", "x",
        ]);
        assert_eq!(out.status.code(), Some(0), "psi {psi}: {}", String::from_utf8_lossy(&out.stderr));
        let v: f64 = stdout(&out).trim().parse().unwrap();
        assert!(v.is_finite());
    }
}
