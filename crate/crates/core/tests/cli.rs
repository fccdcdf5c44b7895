use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_igeo"))
}

fn write_spec(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str], spec: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--spec")
        .arg(spec)
        .arg("--out")
        .arg(out)
        .env_remove("IGEO_QUAD_NODES")
        .output()
        .unwrap()
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn schema() -> jsonschema::Validator {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    jsonschema::validator_for(&read(&root)).unwrap()
}

fn assert_valid(report: &Value) {
    let v = schema();
    let errors: Vec<String> = v.iter_errors(report).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

fn e_flat() -> Value {
    json!({
        "name": "e-flat",
        "subject": {"model": {"builtin": "normal-natural"}},
        "grid": {"linspace": [[-1.0, -0.25, 2], [-0.5, 0.5, 2]]},
        "checks": ["flatness"],
        "alpha": [1],
        "tolerances": {"flatness": 1e-4}
    })
}

#[test]
fn verify_passes_and_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.json", &e_flat());
    let out = dir.path().join("r.json");
    let o = run(&["verify"], &spec, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read(&out);
    assert_valid(&r);
    assert_eq!(r["status"], "pass");
    let c = &r["runs"][0]["checks"][0];
    assert_eq!(c["name"], "flatness");
    assert!(c["residual"].as_f64().unwrap() < 1e-4);
    assert_eq!(c["points"].as_array().unwrap().len(), 4);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.json",
        &json!({
            "subject": {"model": {"builtin": "normal"}},
            "grid": {"points": [[0.0, 1.0]]},
            "checks": ["flatness"], "alpha": [0]
        }),
    );
    let out = dir.path().join("r.json");
    let o = run(&["verify"], &spec, &out);
    assert_eq!(o.status.code(), Some(1));
    let r = read(&out);
    assert_valid(&r);
    assert_eq!(r["runs"][0]["checks"][0]["status"], "fail");
}

#[test]
fn unknown_check_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = e_flat();
    v["checks"] = json!(["flatness", "curvy"]);
    let spec = write_spec(dir.path(), "s.json", &v);
    let out = dir.path().join("r.json");
    let o = run(&["verify"], &spec, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("curvy"));
    assert!(!out.exists(), "nothing is evaluated on a config error");
}

#[test]
fn bad_override_and_missing_spec_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.json", &e_flat());
    let out = dir.path().join("r.json");
    let o = run(&["verify", "--tol-override", "nope=1"], &spec, &out);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify"], &dir.path().join("missing.json"), &out);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    let o = run(&["verify"], &dir.path().join("bad.json"), &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_override_flag() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.json", &e_flat());
    let out = dir.path().join("r.json");
    let o = run(&["verify", "--tol-override", "flatness=1e-30"], &spec, &out);
    assert_eq!(o.status.code(), Some(1));
    let r = read(&out);
    assert_eq!(r["runs"][0]["checks"][0]["tolerance"], 1e-30);
    assert_eq!(r["config"]["tolerance_overrides"]["flatness"], 1e-30);
}

#[test]
fn seeded_monte_carlo_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.json",
        &json!({
            "subject": {"model": {"builtin": "normal",
                "quadrature": {"rule": "monte-carlo", "samples": 2000, "seed": 1}}},
            "grid": {"points": [[0.0, 1.0], [0.5, 1.5]]},
            "checks": ["fisher", "validate"]
        }),
    );
    let (a, b, c) = (dir.path().join("a.json"), dir.path().join("b.json"), dir.path().join("c.json"));
    run(&["verify", "--seed", "42"], &spec, &a);
    run(&["verify", "--seed", "42"], &spec, &b);
    run(&["verify", "--seed", "43"], &spec, &c);
    let strip = |p: &Path| {
        let mut v = read(p);
        v.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_ne!(strip(&a), strip(&c));
    assert_eq!(read(&a)["seed"], 42);
}

#[test]
fn quadrature_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.json",
        &json!({
            "subject": {"model": {"builtin": "location-logistic"}},
            "grid": {"points": [[0.0]]},
            "checks": ["fisher"]
        }),
    );
    let go = |nodes: Option<&str>, out: &Path| {
        let mut c = bin();
        c.args(["verify", "--spec"]).arg(&spec).arg("--out").arg(out);
        match nodes {
            Some(n) => c.env("IGEO_QUAD_NODES", n),
            None => c.env_remove("IGEO_QUAD_NODES"),
        };
        assert_eq!(c.output().unwrap().status.code(), Some(0));
        read(out)
    };
    let coarse = go(Some("4"), &dir.path().join("a.json"));
    let fine = go(None, &dir.path().join("b.json"));
    assert_eq!(coarse["quadrature_nodes"], 4);
    assert!(fine.get("quadrature_nodes").is_none());
    let g = |r: &Value| r["runs"][0]["checks"][0]["residual"].as_f64().unwrap();
    // Fisher information of the logistic location family is 1/3
    assert!((g(&fine) - 1.0 / 3.0).abs() < 1e-3);
    assert!((g(&coarse) - g(&fine)).abs() > 1e-6);
}

#[test]
fn csv_dumps_have_a_header_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.json", &e_flat());
    let out = dir.path().join("r.json");
    let csv = dir.path().join("csv");
    let o = bin()
        .args(["compute", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&out)
        .arg("--csv-dir")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_valid(&read(&out));
    let metric = std::fs::read_to_string(csv.join("00-e-flat-fisher-metric.csv")).unwrap();
    let mut lines = metric.lines();
    assert_eq!(lines.next(), Some("point,i,j,value"));
    assert_eq!(metric.lines().count(), 1 + 4 * 4);
    assert!(csv.join("00-e-flat-riemann-a1-riemann.csv").exists());
}

#[test]
fn geodesic_command_writes_path() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.json",
        &json!({
            "name": "m",
            "subject": {"family": {"builtin": "normal-natural"}},
            "grid": {"points": [[-0.5, 0.0]]},
            "geodesic": {"alpha": -1, "theta0": [-0.5, 0.0], "v0": [0.1, 0.2], "steps": 200}
        }),
    );
    let out = dir.path().join("r.json");
    let csv = dir.path().join("csv");
    let o = bin()
        .args(["geodesic", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&out)
        .arg("--csv-dir")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read(&out);
    assert_valid(&r);
    let c = &r["runs"][0]["checks"][0];
    assert!(c["details"]["dual_linearity"].as_f64().unwrap() < 1e-4);
    let path = std::fs::read_to_string(csv.join("00-m-geodesic-a-1-path.csv")).unwrap();
    assert!(path.starts_with("step,t,theta_0,theta_1,v_0,v_1\n"));
    assert_eq!(path.lines().count(), 1 + 201);
}

#[test]
fn classify_command_on_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.json",
        &json!({
            "subject": {"surface": {"builtin": "sphere"}},
            "grid": {"linspace": [[-0.4, 0.4, 3], [-0.4, 0.4, 3]]}
        }),
    );
    let out = dir.path().join("r.json");
    let o = run(&["classify"], &spec, &out);
    assert_eq!(o.status.code(), Some(0));
    let r = read(&out);
    assert_valid(&r);
    let flags = &r["runs"][0]["checks"][0]["details"];
    assert_eq!(flags["centro_affine"], true);
    assert_eq!(flags["blaschke"], true);
}

#[test]
fn verification_suite_is_clean() {
    let spec = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs/verification.json");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["verify"], &spec, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_valid(&read(&out));
}

#[test]
fn help_and_version() {
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
