use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const J0: f64 = 2.404_825_557_695_773;

fn eigenbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigenbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = eigenbound(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "args {args:?}\nstderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn num(v: &Value, path: &[&str]) -> f64 {
    path.iter()
        .fold(v, |v, k| &v[*k])
        .as_f64()
        .unwrap_or_else(|| panic!("{path:?} missing in {v}"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn bound_for_flat_disc() {
    let r = json(&["bound", "--builtin", "euclidean"]);
    let b = num(&r, &["bound"]);
    assert!(close(b, J0 * J0, 1e-6), "{b}");
    assert_eq!(r["series"]["converged"], Value::Bool(true));
    assert!(num(&r, &["series", "spread"]) <= 5e-8 * b);
}

#[test]
fn bound_for_hemisphere_and_ball() {
    let r = json(&["bound", "--builtin", "spherical(1)", "--radius", "1.5707963267948966"]);
    assert!(close(num(&r, &["bound"]), 2.0, 1e-6));
    let r = json(&["bound", "--builtin", "euclidean", "--dimension", "3"]);
    assert!(close(num(&r, &["bound"]), std::f64::consts::PI.powi(2), 1e-6));
}

#[test]
fn dilation_scales_bound() {
    let b1 = num(
        &json(&["bound", "--builtin", "paper-example", "--radius", "1"]),
        &["bound"],
    );
    let b2 = num(&json(&["bound", "--builtin", "euclidean", "--radius", "2"]), &["bound"]);
    assert!(close(b1, J0 * J0, 1e-6));
    assert!(close(b2, b1 / 4.0, 1e-6));
}

#[test]
fn oracle_agrees_with_bound_on_models() {
    let r = json(&["oracle", "--builtin", "euclidean", "--dimension", "3"]);
    assert_eq!(r["oracle"]["method"], "radial-shooting");
    assert!(close(
        num(&r, &["oracle", "lambda1"]),
        std::f64::consts::PI.powi(2),
        1e-8
    ));

    let args = ["--builtin", "hyperbolic(1)", "--radius", "2"];
    let b = num(&json(&[&["bound"][..], &args].concat()), &["bound"]);
    let o = num(&json(&[&["oracle"][..], &args].concat()), &["oracle", "lambda1"]);
    assert!(close(b, o, 1e-3), "bound {b}, oracle {o}");
}

#[test]
fn oracle_on_bumped_disc_is_strictly_below_flat_value() {
    let r = json(&["oracle", "--builtin", "paper-example", "--mesh", "128x128"]);
    assert_eq!(r["oracle"]["method"], "polar-finite-volume");
    let lambda = num(&r, &["oracle", "lambda1"]);
    let err = num(&r, &["oracle", "richardson"]);
    let flat = (J0 / 3.0).powi(2);
    assert!(flat - lambda > err, "gap {} vs estimate {err}", flat - lambda);
}

#[test]
fn paper_example_report() {
    let r = json(&["paper-example"]);
    let p = &r["paper_example"];
    assert_eq!(num(p, &["radius"]), 3.0);
    assert!(num(p, &["area_error"]) <= 1e-10);
    assert!(close(num(p, &["bound"]), (J0 / 3.0).powi(2), 1e-6));
    assert_eq!(p["strict_inequality"], Value::Bool(true));
    assert_eq!(p["equality"], Value::Bool(false));
    assert!(num(p, &["radiality"]) > 1e-3);
    assert!(num(p, &["gap"]) > num(p, &["richardson"]));

    let small = json(&["paper-example", "--radius", "1.5"]);
    assert_eq!(small["paper_example"]["equality"], Value::Bool(true));
}

#[test]
fn paper_example_rejects_a_model() {
    let out = eigenbound(&["paper-example", "--builtin", "euclidean"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_verdicts() {
    let r = json(&["compare", "--builtin", "euclidean", "--kappa", "-1"]);
    let c = &r["comparison"];
    assert_eq!(c["verdict"], "bound-holds");
    assert_eq!(c["monotone_ok"], Value::Bool(true));
    assert!(num(c, &["bound"]) <= num(c, &["reference_lambda"]));

    let r = json(&["compare", "--builtin", "euclidean", "--kappa", "0"]);
    assert_eq!(r["comparison"]["verdict"], "equality-candidate");

    let r = json(&["compare", "--builtin", "paper-example"]);
    assert_eq!(r["comparison"]["verdict"], "bound-holds");
    assert!(num(&r, &["comparison", "radiality"]) > 1e-3);

    let r = json(&["compare", "--builtin", "euclidean", "--kappa", "1"]);
    assert_eq!(r["comparison"]["verdict"], "hypothesis-fails");

    let r = json(&["compare", "--builtin", "euclidean", "--warping-ref", "sinh(t)"]);
    assert_eq!(r["comparison"]["verdict"], "bound-holds");
}

#[test]
fn config_files_of_each_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "warping.json",
            r#"{"name":"cap","kind":"warping","radius":1.5707963267948966,"omega":"sin(t)"}"#,
            2.0,
        ),
        (
            "area.json",
            r#"{"name":"ball","kind":"area","dimension":3,"area":"4*pi*t^2"}"#,
            std::f64::consts::PI.powi(2),
        ),
        (
            "polar.json",
            r#"{"name":"bumped","kind":"polar2d","radius":3,
                "rho":"r + piecewise(r <= 2: 0; exp(-1/(r-2)^2)) * cos(theta)"}"#,
            (J0 / 3.0).powi(2),
        ),
        (
            "hyper.json",
            r#"{"name":"h","kind":"warping","radius":1,"kappa":-4,"omega":"sinh(sqrt(-kappa)*t)/sqrt(-kappa)"}"#,
            num(
                &json(&["bound", "--builtin", "hyperbolic(4)", "--radius", "1"]),
                &["bound"],
            ),
        ),
    ];
    for (file, body, expected) in cases {
        let path = write_config(dir.path(), file, body);
        let r = json(&["bound", "--config", &path]);
        assert!(close(num(&r, &["bound"]), expected, 1e-6), "{file}: {}", r["bound"]);
        assert!(r["config"]["model"]["name"].is_string());
    }
}

#[test]
fn symmetrize_table() {
    let out = eigenbound(&[
        "symmetrize",
        "--builtin",
        "paper-example",
        "--grid",
        "64",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["t", "area", "omega"]);
    let rows: Vec<(f64, f64, f64)> = rdr.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 65);
    for (t, a, w) in rows {
        assert!((a - std::f64::consts::TAU * t).abs() <= 1e-10);
        assert!((w - t).abs() <= 1e-10);
    }
}

#[test]
fn csv_series_has_stable_header() {
    let out = eigenbound(&["bound", "--builtin", "spherical(1)", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["k", "norm_ratio", "center_ratio", "mass_ratio"]
    );
    let rows: Vec<(usize, f64, f64, f64)> = rdr.deserialize().map(Result::unwrap).collect();
    assert!(rows.len() >= 2);
    assert_eq!(rows[0].0, 1);
    let (_, n, c, m) = *rows.last().unwrap();
    assert!(close(n, c, 1e-6) && close(c, m, 1e-6));
}

#[test]
fn json_keys_are_stable() {
    for cmd in ["bound", "oracle", "compare"] {
        let r = json(&[cmd, "--builtin", "euclidean"]);
        let keys: Vec<_> = r.as_object().unwrap().keys().cloned().collect();
        for k in [
            "command",
            "config",
            "series",
            "bound",
            "oracle",
            "comparison",
            "timings",
        ] {
            assert!(keys.iter().any(|x| x == k), "{cmd}: missing {k}");
        }
        assert_eq!(r["command"], cmd);
        assert_eq!(num(&r, &["config", "settings", "grid"]), 4096.0);
    }
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let args = ["paper-example", "--mesh", "32x32", "--grid", "1024"];
    let mut a = json(&args);
    let mut b = json(&args);
    a.as_object_mut().unwrap().remove("timings");
    b.as_object_mut().unwrap().remove("timings");
    assert_eq!(a, b);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = eigenbound(&["bound", "--builtin", "euclidean", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert!(close(num(&r, &["bound"]), J0 * J0, 1e-6));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| eigenbound(args).status.code();

    assert_eq!(code(&["bound"]), Some(2));
    assert_eq!(code(&["bound", "--builtin", "nope"]), Some(2));
    assert_eq!(code(&["bound", "--config", "/nonexistent/model.json"]), Some(2));
    assert_eq!(code(&["bound", "--builtin", "euclidean", "--tol", "0"]), Some(2));
    assert_eq!(
        code(&["oracle", "--builtin", "paper-example", "--mesh", "8x8"]),
        Some(2)
    );

    let bad_syntax = write_config(
        dir.path(),
        "syntax.json",
        r#"{"name":"x","kind":"warping","omega":"sin(t"}"#,
    );
    assert_eq!(code(&["bound", "--config", &bad_syntax]), Some(2));
    let bad_var = write_config(
        dir.path(),
        "var.json",
        r#"{"name":"x","kind":"warping","omega":"theta"}"#,
    );
    assert_eq!(code(&["bound", "--config", &bad_var]), Some(2));
    let unknown = write_config(
        dir.path(),
        "key.json",
        r#"{"name":"x","kind":"warping","omega":"t","w":1}"#,
    );
    assert_eq!(code(&["bound", "--config", &unknown]), Some(2));

    let negative = write_config(
        dir.path(),
        "neg.json",
        r#"{"name":"x","kind":"warping","omega":"t*(0.5-t)"}"#,
    );
    assert_eq!(code(&["bound", "--config", &negative]), Some(3));

    let out = eigenbound(&["bound", "--builtin", "euclidean", "--kmax", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["series"]["converged"], Value::Bool(false));
}
