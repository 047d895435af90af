use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn svv(args: &[&str], dir: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_svv"));
    cmd.args(args)
        .current_dir(dir)
        .env_remove("SVV_SEED")
        .env_remove("SVV_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_diag(dir: &Path, name: &str, diag: &[f64], dims: Option<[usize; 2]>) {
    let n = diag.len();
    let data: Vec<[f64; 2]> = (0..n * n)
        .map(|k| [if k / n == k % n { diag[k / n] } else { 0.0 }, 0.0])
        .collect();
    let mut v = json!({ "rows": n, "cols": n, "data": data });
    if let Some(d) = dims {
        v["dims"] = json!(d);
    }
    std::fs::write(dir.join(name), v.to_string()).unwrap();
}

fn envelope(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn value(out: &Output) -> f64 {
    envelope(out)["results"][0]["value"].as_f64().unwrap()
}

#[test]
fn norm_of_product_with_maximally_mixed() {
    let dir = tempfile::tempdir().unwrap();
    // ρ_Y ⊗ I/2 with ρ_Y = diag(0.7, 0.3)
    write_diag(
        dir.path(),
        "rho.json",
        &[0.35, 0.35, 0.15, 0.15],
        Some([2, 2]),
    );
    let out = svv(
        &["--json", "norm", "--pq", "1,2", "--input", "rho.json"],
        dir.path(),
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!((value(&out) - 0.5f64.sqrt()).abs() < 1e-6);
    let env = envelope(&out);
    assert_eq!(env["command"], "norm");
    assert_eq!(env["results"][0]["bound_kind"], "exact");
    let keys: Vec<&String> = env.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["command", "config", "results", "version"]);
}

#[test]
fn entropy_at_one_is_conditional_von_neumann() {
    let dir = tempfile::tempdir().unwrap();
    let p = [0.4, 0.1, 0.2, 0.3];
    write_diag(dir.path(), "rho.json", &p, Some([2, 2]));
    // H(XY) − H(Y) for the classical distribution p[y][x]
    let h = |v: &[f64]| -v.iter().map(|x| x * x.ln()).sum::<f64>();
    let expected = h(&p) - h(&[0.5, 0.5]);
    let out = svv(
        &["--json", "entropy", "--alpha", "1", "--input", "rho.json"],
        dir.path(),
        &[],
    );
    assert!(out.status.success());
    assert!((value(&out) - expected).abs() < 1e-9);
    let bits = svv(
        &[
            "--json", "--bits", "entropy", "--alpha", "1", "--input", "rho.json",
        ],
        dir.path(),
        &[],
    );
    assert!((value(&bits) - expected / 2f64.ln()).abs() < 1e-9);
    assert_eq!(envelope(&bits)["results"][0]["unit"], "bits");
}

#[test]
fn identical_arguments_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    write_diag(dir.path(), "rho.json", &[0.4, 0.1, 0.2, 0.3], Some([2, 2]));
    let args = [
        "--json",
        "--seed",
        "3",
        "entropy",
        "--alpha",
        "2",
        "--measure",
        "w",
        "--input",
        "rho.json",
    ];
    let a = svv(&args, dir.path(), &[]);
    let b = svv(&args, dir.path(), &[("SVV_THREADS", "4")]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_report_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        [
            "verify",
            "--suite",
            "all",
            "--seed",
            "7",
            "--trials",
            "2",
            "--mc-samples",
            "100",
            "--out",
            out,
        ]
    };
    let one = svv(&args("one.csv"), dir.path(), &[("SVV_THREADS", "1")]);
    let four = svv(&args("four.csv"), dir.path(), &[("SVV_THREADS", "4")]);
    assert_eq!(
        one.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&one.stderr)
    );
    assert_eq!(four.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("one.csv")).unwrap();
    let b = std::fs::read(dir.path().join("four.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a)
        .unwrap()
        .starts_with("check,seed,lhs,rhs,margin,pass\n"));
}

#[test]
fn full_suite_passes_at_fifty_trials() {
    let dir = tempfile::tempdir().unwrap();
    let out = svv(
        &[
            "verify",
            "--suite",
            "all",
            "--seed",
            "7",
            "--trials",
            "50",
            "--out",
            "report.csv",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows.len() > 500);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn json_report_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let out = svv(
        &[
            "verify",
            "--suite",
            "quadrature",
            "--trials",
            "1",
            "--out",
            "r.json",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 18);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write_diag(dir.path(), "rho.json", &[0.4, 0.1, 0.2, 0.3], Some([2, 2]));
    write_diag(dir.path(), "bad.json", &[0.5, -0.1, 0.3, 0.3], Some([2, 2]));
    let code = |args: &[&str]| svv(args, dir.path(), &[]).status.code();
    assert_eq!(
        code(&["entropy", "--alpha", "0.5", "--input", "rho.json"]),
        Some(2)
    );
    assert_eq!(
        code(&["entropy", "--alpha", "2", "--input", "missing.json"]),
        Some(2)
    );
    assert_eq!(
        code(&["entropy", "--alpha", "2", "--input", "bad.json"]),
        Some(2)
    );
    assert_eq!(code(&["verify", "--suite", "nonsense"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(
        svv(
            &["verify", "--trials", "1"],
            dir.path(),
            &[("SVV_SEED", "x")]
        )
        .status
        .code(),
        Some(2)
    );

    // 1 + 2cos t changes sign on the circle
    let one = json!({ "rows": 1, "cols": 1, "data": [[1.0, 0.0]] });
    let poly = json!({ "d": 1, "N": 1, "coeffs": { "-1": one, "0": one, "1": one } });
    std::fs::write(dir.path().join("indef.json"), poly.to_string()).unwrap();
    assert_eq!(code(&["specfact", "--input", "indef.json"]), Some(3));

    // ‖x‖_2 ≤ ‖x‖_1^{1/2}‖x‖_∞^{1/2} holds
    write_diag(dir.path(), "x.json", &[3.0, 1.0, 0.5], None);
    assert_eq!(
        code(&["interp", "--input", "x.json", "--p0", "1", "--p1", "inf", "--theta", "0.5"]),
        Some(0)
    );
}

#[test]
fn config_file_sits_between_env_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "seed = 5\ntrials = 1\n").unwrap();
    let seed = |args: &[&str], env: &[(&str, &str)]| {
        let out = svv(args, dir.path(), env);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        envelope(&out)["config"]["seed"].as_u64().unwrap()
    };
    let base = ["--json", "verify", "--suite", "duality"];
    assert_eq!(seed(&base, &[("SVV_SEED", "9")]), 9);
    let with_file = [
        "--json", "--config", "c.toml", "verify", "--suite", "duality",
    ];
    assert_eq!(seed(&with_file, &[("SVV_SEED", "9")]), 5);
    let with_flag = [
        "--json", "--config", "c.toml", "--seed", "11", "verify", "--suite", "duality",
    ];
    assert_eq!(seed(&with_flag, &[("SVV_SEED", "9")]), 11);
    let out = svv(&with_file, dir.path(), &[("SVV_THREADS", "3")]);
    assert!(!String::from_utf8_lossy(&out.stdout).contains("threads"));
}

#[test]
fn specfact_factor_of_two_plus_two_cos() {
    let dir = tempfile::tempdir().unwrap();
    let one = json!({ "rows": 1, "cols": 1, "data": [[1.0, 0.0]] });
    let two = json!({ "rows": 1, "cols": 1, "data": [[2.0, 0.0]] });
    let poly = json!({ "d": 1, "N": 1, "coeffs": { "-1": one, "0": two, "1": one } });
    std::fs::write(dir.path().join("p.json"), poly.to_string()).unwrap();
    let out = svv(
        &["--json", "specfact", "--input", "p.json", "--out", "a.json"],
        dir.path(),
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = &envelope(&out)["results"][0];
    assert!(r["residual"].as_f64().unwrap() < 1e-10);
    let factor: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    for k in ["0", "1"] {
        let re = factor["coeffs"][k]["data"][0][0].as_f64().unwrap();
        assert!((re.abs() - 1.0).abs() < 1e-6, "{factor}");
    }
}
