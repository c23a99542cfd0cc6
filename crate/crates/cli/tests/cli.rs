use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubicflow")).args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_constant_curvature() {
    let o = run(&["check", &fixture("flat.toml")]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "CompatibleConstCurvature");
    assert_eq!(v["report_version"], 1);
    assert_eq!(v["seed"], 0x5eed);
}

#[test]
fn check_killing() {
    let o = run(&["check", &fixture("killing.toml")]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "CompatibleKilling");
    assert_eq!(v["seed"], 24301);
    let boxes: Vec<&str> = v["trace"].as_array().unwrap().iter().map(|s| s["box"].as_str().unwrap()).collect();
    assert_eq!(boxes, ["Input g and A", "R constant?", "phi2 = 0?", "D = 0?", "phi2* = 0?", "D* = 0?"]);
}

#[test]
fn check_formula_carries_certificate() {
    let o = run(&["check", &fixture("generic_zero.toml")]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "CompatibleWithFormula");
    assert_eq!(v["via"], "generic");
    assert_eq!(v["integral"]["t111"], "0");
    let cert = v["certificate"].as_array().unwrap();
    assert_eq!(cert.len(), 5);
    assert!(cert.iter().all(|c| c["verdict"]["result"] == "Zero"));
}

#[test]
fn check_incompatible() {
    let o = run(&["check", &fixture("refute.toml")]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["status"], "Incompatible");
    assert!(v["failed"].as_str().unwrap().starts_with('G'));
    assert!(v["witness"][2].as_f64().unwrap().abs() > 1e-6);

    let o = run(&["check", &fixture("null_obstruction.toml")]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["failed"], "null-gradient-curvature");
}

#[test]
fn check_undetermined() {
    let o = run(&["check", &fixture("undetermined.toml")]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["status"], "Undetermined");
}

#[test]
fn check_input_errors() {
    let o = run(&["check", &fixture("nonholo.toml")]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("HolomorphicityViolated"));
    assert!(o.stdout.is_empty());
    for (name, needle) in [
        ("bad_kind.toml", "null-pair"),
        ("bad_expr.toml", "metric.lambda"),
        ("degenerate_domain.toml", "domain"),
        ("missing.toml", "missing.toml"),
    ] {
        let o = run(&["check", &fixture(name)]);
        assert_eq!(code(&o), 64, "{name}");
        assert!(stderr(&o).contains(needle), "{name}: {}", stderr(&o));
    }
    assert_eq!(code(&run(&["check"])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn reports_are_reproducible() {
    for args in [
        vec!["check", "refute.toml"],
        vec!["invariants", "sphere.toml", "--at", "0.1,0.2"],
        vec!["verify", "flat.toml", "--integral", "xpx3.toml"],
    ] {
        let args: Vec<String> = args.iter().map(|a| if a.ends_with(".toml") { fixture(a) } else { a.to_string() }).collect();
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(run(&refs).stdout, run(&refs).stdout);
    }
}

#[test]
fn invariants_at_point() {
    let o = run(&["invariants", &fixture("sphere.toml"), "--at", "0,0"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["at"], serde_json::json!([0.0, 0.0]));
    let get = |n: &str| {
        v["invariants"].as_array().unwrap().iter().find(|e| e["name"] == n).unwrap()["value"].as_f64().unwrap()
    };
    assert!((get("phi0") - 1.0).abs() < 1e-12);
    for n in ["phi1", "phi2", "phi3"] {
        assert!(get(n).abs() < 1e-12, "{n}");
    }
}

#[test]
fn invariants_symbolic() {
    let o = run(&["invariants", &fixture("generic_zero.toml"), "--symbolic"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    for e in v["invariants"].as_array().unwrap() {
        let n = e["name"].as_str().unwrap();
        if n.starts_with(['D', 'G', 'K']) {
            assert_eq!(e["expr"], "0", "{n}");
        }
    }
}

#[test]
fn invariants_usage_errors() {
    let o = run(&["invariants", &fixture("sphere.toml")]);
    assert_eq!(code(&o), 64);
    assert_eq!(code(&run(&["invariants", &fixture("sphere.toml"), "--at", "1"])), 64);
    assert_eq!(code(&run(&["invariants", &fixture("sphere.toml"), "--at", "0,0", "--symbolic"])), 64);
    assert_eq!(code(&run(&["invariants", &fixture("nonholo.toml"), "--symbolic"])), 64);
}

#[test]
fn verify_paths() {
    let o = run(&["verify", &fixture("killing.toml"), "--integral", &fixture("py3.toml")]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["verdict"]["result"], "Zero");

    let o = run(&["verify", &fixture("flat.toml"), "--integral", &fixture("xpx3.toml")]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["verdict"]["result"], "NonZero");
    assert_eq!(v["certificate"][0]["monomial"], "px^4");

    let o = run(&["verify", &fixture("undetermined_integral.toml"), "--integral", &fixture("sqrt_integral.toml")]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["verdict"]["result"], "Unknown");

    assert_eq!(code(&run(&["verify", &fixture("flat.toml"), "--integral", &fixture("flat.toml")])), 64);
    assert_eq!(code(&run(&["verify", &fixture("flat.toml")])), 64);
}

#[test]
fn geodesic_paths() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sphere.csv");
    let start = ["--x0", "0.3", "--y0", "0.2", "--px0", "0.5", "--py0", "-0.7"];
    let s = fixture("sphere.toml");
    let mut args = vec!["geodesic", &s[..]];
    args.extend(start);
    let csv_s = csv.display().to_string();
    args.extend(["--csv", &csv_s]);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(v["max_h_drift"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["steps_taken"], 10_000);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,x,y,px,py,H,F");
    assert_eq!(text.lines().count(), 10_002);

    let k = fixture("killing.toml");
    let py3 = fixture("py3.toml");
    let mut args = vec!["geodesic", &k[..]];
    args.extend(start);
    args.extend(["--integral", &py3]);
    let o = run(&args);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["max_f_drift"].as_f64().unwrap() < 1e-8);

    // coarse steps blow the drift budget
    let mut args = vec!["geodesic", &s[..]];
    args.extend(start);
    args.extend(["--steps", "100", "--dt", "0.1"]);
    let o = run(&args);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["within_threshold"], false);

    // the conformal factor sqrt(x) ends the chart at x = 0
    let e = fixture("chart_edge.toml");
    let o = run(&["geodesic", &e, "--x0", "0.5", "--y0", "0", "--px0", "-1", "--py0", "0", "--dt", "0.01", "--steps", "1000"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert!(v["error"].as_str().unwrap().contains("integration stopped"));
    assert!(v["steps_taken"].as_u64().unwrap() < 1000);

    let mut args = vec!["geodesic", &s[..]];
    args.extend(start);
    args.extend(["--dt", "0"]);
    assert_eq!(code(&run(&args)), 64);
    assert_eq!(code(&run(&["geodesic", &s, "--x0", "0.3"])), 64);
}
