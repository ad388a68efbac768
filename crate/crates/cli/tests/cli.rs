use std::path::PathBuf;
use std::process::{Command, Output};

fn systems() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

fn sys(file: &str) -> String {
    systems().join(file).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symspectra")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of the first CSV table (after the `#` lines and the header).
fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    let mut lines = text.lines().skip_while(|l| l.starts_with('#')).skip(1);
    let mut rows = Vec::new();
    for l in lines.by_ref() {
        if l.starts_with('#') {
            break;
        }
        rows.push(l.split(',').map(|x| x.parse().unwrap()).collect());
    }
    rows
}

#[test]
fn describe_reports_deficiency_indices() {
    let o = run(&["describe", "--system", &sys("free1.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("dims: h = 1, hhat = 0, n = 2"));
    assert!(out.contains("deficiency indices: (2, 2)"));
    assert!(out.contains("absolutely definite: true"));
}

#[test]
fn weyl_csv_matches_closed_form() {
    let o = run(&["weyl", "--system", "builtin:FREE1", "--lambda-grid", "0.5/1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("# shape: 2x2 row-major"));
    assert!(out.lines().any(|l| l.starts_with("# tolerances: sym=")));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    // tan(π/2 + iπ) = i coth π, sec(π/2 + iπ) = i / sinh π.
    let pi = std::f64::consts::PI;
    let r = &rows[0];
    assert!(r[3].abs() < 1e-8 && (r[4] - 1.0 / pi.tanh()).abs() < 1e-8);
    assert!(r[5].abs() < 1e-8 && (r[6] - 1.0 / pi.sinh()).abs() < 1e-8);
}

#[test]
fn eigen_csv_is_deterministic() {
    let args = ["eigen", "--system", &sys("free1.json"), "--tau", &sys("tau_mixed.json"), "--window", "-2.5,2.5", "--format", "csv"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let rows = csv_rows(&stdout(&a));
    let eig: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(eig.len(), 5);
    for (got, want) in eig.iter().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
        assert!((got - want).abs() < 1e-9);
    }
    for r in &rows {
        assert!((r[3] - 1.0 / std::f64::consts::PI).abs() < 1e-9);
    }
}

#[test]
fn spectral_reports_jump_and_increments() {
    let o = run(&["spectral", "--system", "builtin:free1", "--tau", "builtin:zeroth", "--window", "0,1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][0] - 0.5).abs() < 1e-9 && (rows[0][1] - 1.0 / std::f64::consts::PI).abs() < 1e-5);
    assert!(out.contains("# table: increments"));
}

#[test]
fn parseval_and_mulmin_verdicts() {
    let o = run(&["parseval", "--system", &sys("free1.json"), "--tau", &sys("tau_dirichlet.json"), "--window", "-10.5,10.5", "--f", &sys("f_e1_free1.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict: spectral behavior confirmed"));
    let o = run(&["mulmin", "--system", &sys("deg1.json"), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(csv_rows(&stdout(&o)).len(), 3);
    let o = run(&["mulmin", "--system", &sys("free1.json")]);
    assert!(stdout(&o).contains("mul T_min is trivial"));
}

#[test]
fn fourier_and_resolvent_check() {
    let o = run(&["fourier", "--system", &sys("free1.json"), "--f", &sys("f_e1_free1.json"), "--s-grid", "0.5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    // ∫₀^π (cos(t/2), sin(t/2)) dt = (2, 2).
    assert!((rows[0][1] - 2.0).abs() < 1e-10 && (rows[0][3] - 2.0).abs() < 1e-10);
    let o = run(&["resolvent-check", "--system", &sys("pot1.json"), "--tau", &sys("tau_mixed.json"), "--lambda", "1,2", "--f", &sys("f_linear_unit.json"), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(csv_rows(&stdout(&o))[0][0] < 1e-7);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("symspectra-cli-test-{}.csv", std::process::id()));
    let o = run(&["charmatrix", "--system", "builtin:smoke3", "--tau", "builtin:zeroth", "--lambda", "0.3,1", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.contains("# shape: 3x3 row-major"));
    // Lower-right block of Ω for C₁ = 0 is exactly zero.
    let row = &csv_rows(&text)[0];
    assert_eq!((row[18], row[19]), (0.0, 0.0));
}

#[test]
fn malformed_pair_file_exits_with_field_diagnostic() {
    let path = std::env::temp_dir().join(format!("symspectra-bad-tau-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"kind": "constant", "c0": [{"re": [[1, 0], [0, 1]]}], "c1": [{"re": [[0, 0], [0, "x"]]}]}"#).unwrap();
    let o = run(&["charmatrix", "--system", "builtin:free1", "--tau", path.to_str().unwrap(), "--lambda", "0,1"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("field `c1[0].re[1][1]`"), "{}", stderr(&o));
}

#[test]
fn validation_failures_exit_2() {
    assert_eq!(run(&["describe", "--system", "builtin:free1", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["describe", "--system", "builtin:free1", "--tol-eig", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["describe", "--system", "builtin:nope"]).status.code(), Some(2));
    assert_eq!(run(&["describe", "--system", "/nonexistent/system.json"]).status.code(), Some(2));
    assert_eq!(run(&["eigen", "--system", "builtin:free1", "--tau", "builtin:zeroth", "--window", "3,1"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_symspectra")).args(["describe", "--system", "builtin:free1"]).env("SYMSPECTRA_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    // λ = 1/2 is a pole of the FREE1 Weyl function.
    let o = run(&["charmatrix", "--system", "builtin:free1", "--tau", "builtin:zeroth", "--lambda", "0.5,0"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
