//! Batch runner behind the `igeo` binary.
//!
//! Every command reads a run spec (or suite), checks it fully, then evaluates
//! and writes one JSON report plus optional CSV tensor dumps.
//!
//! Exit codes: 0 when nothing failed (untestable checks allowed), 1 when a
//! check failed, 2 on configuration errors.

mod checks;
mod report;
mod spec;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use report::{aggregate, CheckReport, PointResult, Report, RunReport, Status, SubjectInfo, Table, REPORT_VERSION};
pub use spec::{
    check_names, validate_run, CheckSpec, Expect, GeodesicSpec, GridSpec, OutputSpec, RunSpec, SpecDoc, Subject, SubjectKind,
    CHECKS,
};

use crate::error::{Error, Result};
use crate::models::{quadrature_nodes, QUAD_NODES_ENV};
use checks::{compute_quantities, run_check, CheckOutput, Ctx};
use spec::check_entry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Compute,
    Verify,
    Geodesic,
    Classify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Compute => "compute",
            Command::Verify => "verify",
            Command::Geodesic => "geodesic",
            Command::Classify => "classify",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Run spec or suite (JSON)
    #[arg(long)]
    pub spec: PathBuf,
    /// Report path; defaults to the spec's `outputs.report`, else stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for CSV tensor dumps
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    /// Tolerance override, `check=value`; repeatable
    #[arg(long = "tol-override", value_name = "CHECK=VALUE", value_parser = parse_override)]
    pub tol_override: Vec<(String, f64)>,
    /// Seed for Monte Carlo expectation rules
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_override(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected CHECK=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad tolerance `{v}`: {e}"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("tolerance must be finite and non-negative, got {v}"));
    }
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Parser)]
#[command(name = "igeo", version, about = "Information geometry and affine immersion checks")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Evaluate metric, connections, curvature or induced data on the grid
    Compute(Options),
    /// Run the listed checks
    Verify(Options),
    /// Integrate the α-geodesic of the `geodesic` section
    Geodesic(Options),
    /// Run the classification set for each subject
    Classify(Options),
}

/// Parses `args` (including the program name), runs and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, opts) = match cli.command {
        Sub::Compute(o) => (Command::Compute, o),
        Sub::Verify(o) => (Command::Verify, o),
        Sub::Geodesic(o) => (Command::Geodesic, o),
        Sub::Classify(o) => (Command::Classify, o),
    };
    match run(command, &opts) {
        Ok(report) => exit_code(&report),
        Err(e) => {
            eprintln!("igeo: {e}");
            2
        }
    }
}

pub fn exit_code(report: &Report) -> i32 {
    match report.status {
        Status::Fail => 1,
        _ => 0,
    }
}

/// Loads the spec at `opts.spec`, executes it and writes the outputs.
pub fn run(command: Command, opts: &Options) -> Result<Report> {
    let text = std::fs::read_to_string(&opts.spec)
        .map_err(|e| Error::schema(format!("cannot read {}: {e}", opts.spec.display())))?;
    let doc = SpecDoc::from_str(&text)?;
    let report = execute(command, &doc, opts)?;
    let out = opts.out.clone().or_else(|| doc.outputs.report.as_ref().map(PathBuf::from));
    match out {
        Some(p) => report.write(&p)?,
        None => println!("{}", report.to_json()),
    }
    for r in &report.runs {
        for c in &r.checks {
            let a = c.alpha.map(|a| format!(" α={a}")).unwrap_or_default();
            eprintln!("{}: {}{a}: {:?}", r.name, c.name, c.status);
        }
    }
    Ok(report)
}

struct Planned {
    name: String,
    alpha: Option<f64>,
    tolerance: f64,
    expect: Expect,
}

struct PreparedRun {
    name: String,
    subject: Subject,
    grid: Vec<Vec<f64>>,
    geodesic: Option<GeodesicSpec>,
    alphas: Vec<f64>,
    plan: Vec<Planned>,
    csv_dir: Option<PathBuf>,
}

fn fixed_set(kind: SubjectKind) -> &'static [&'static str] {
    match kind {
        SubjectKind::Surface => &["classify", "statistical-structure"],
        SubjectKind::Family => &["classify"],
        SubjectKind::Model => &["flatness"],
        SubjectKind::Embedding => &["autoparallel", "exponential-form"],
    }
}

fn prepare(
    command: Command,
    doc: &SpecDoc,
    idx: usize,
    run: &RunSpec,
    overrides: &BTreeMap<String, f64>,
    seed: Option<u64>,
    csv_root: Option<&Path>,
) -> Result<PreparedRun> {
    let name = run.name.clone().unwrap_or_else(|| format!("run{idx}"));
    let ctx = |e: Error| match e {
        Error::Schema(m) => Error::schema(format!("run `{name}`: {m}")),
        other => Error::schema(format!("run `{name}`: {other}")),
    };
    let mut subject = Subject::from_value(&run.subject).map_err(ctx)?;
    if let Some(s) = seed.or(run.seed) {
        subject = subject.reseed(s).map_err(ctx)?;
    }
    let kind = subject.kind();
    validate_run(run, kind, command == Command::Verify).map_err(ctx)?;
    let grid = run.grid.points(subject.dim()).map_err(ctx)?;
    let alphas = run.alpha.clone().unwrap_or_else(|| vec![1.0]);
    if alphas.is_empty() || alphas.iter().any(|a| !a.is_finite()) {
        return Err(ctx(Error::schema("`alpha` must be a non-empty list of finite numbers")));
    }
    if let Some(g) = &run.geodesic {
        let n = subject.dim();
        if g.theta0.len() != n || g.v0.len() != n || g.steps == 0 || !(g.t_final > 0.0) {
            return Err(ctx(Error::schema(format!(
                "`geodesic` needs theta0 and v0 of length {n}, steps > 0 and t_final > 0"
            ))));
        }
    }

    let requested: Vec<CheckSpec> = match command {
        Command::Verify => run.checks.clone(),
        Command::Classify => fixed_set(kind).iter().map(|s| CheckSpec::Name(s.to_string())).collect(),
        Command::Geodesic => {
            if run.geodesic.is_none() {
                return Err(ctx(Error::schema("the geodesic command needs a `geodesic` section")));
            }
            if !matches!(kind, SubjectKind::Model | SubjectKind::Family) {
                return Err(ctx(Error::schema("geodesics need a model or family subject")));
            }
            vec![CheckSpec::Name("geodesic".into())]
        }
        Command::Compute => Vec::new(),
    };
    let mut plan = Vec::new();
    for c in &requested {
        let (cname, _, sweeps, default) = check_entry(c.name())?;
        let tolerance = overrides
            .get(*cname)
            .copied()
            .or(c.tolerance())
            .or_else(|| run.tolerances.get(*cname).copied())
            .unwrap_or(*default);
        if *sweeps {
            for a in c.alpha().map(|a| a.to_vec()).unwrap_or_else(|| alphas.clone()) {
                plan.push(Planned {
                    name: cname.to_string(),
                    alpha: Some(a),
                    tolerance,
                    expect: c.expect(),
                });
            }
        } else {
            plan.push(Planned {
                name: cname.to_string(),
                alpha: None,
                tolerance,
                expect: c.expect(),
            });
        }
    }
    let csv_dir = csv_root
        .map(Path::to_path_buf)
        .or_else(|| run.outputs.as_ref().and_then(|o| o.csv_dir.as_ref()).map(PathBuf::from))
        .or_else(|| doc.outputs.csv_dir.as_ref().map(PathBuf::from));
    Ok(PreparedRun {
        name,
        subject,
        grid,
        geodesic: run.geodesic.clone(),
        alphas,
        plan,
        csv_dir,
    })
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn csv_name(idx: usize, run: &str, check: &str, alpha: Option<f64>, suffix: &str) -> String {
    let a = alpha.map(|a| format!("-a{a}")).unwrap_or_default();
    format!("{idx:02}-{}-{check}{}-{suffix}.csv", sanitize(run), sanitize(&a))
}

/// Executes an already-parsed spec document. Configuration problems in any
/// run are reported before anything is evaluated.
pub fn execute(command: Command, doc: &SpecDoc, opts: &Options) -> Result<Report> {
    let mut overrides = BTreeMap::new();
    for (k, v) in &opts.tol_override {
        check_entry(k)?;
        overrides.insert(k.clone(), *v);
    }
    let seed = opts.seed.or(doc.seed);
    let prepared = doc
        .runs
        .iter()
        .enumerate()
        .map(|(i, r)| prepare(command, doc, i, r, &overrides, seed, opts.csv_dir.as_deref()))
        .collect::<Result<Vec<_>>>()?;

    let mut runs = Vec::new();
    for (idx, p) in prepared.iter().enumerate() {
        let ctx = Ctx {
            subject: &p.subject,
            grid: &p.grid,
            geodesic: p.geodesic.as_ref(),
        };
        let outputs: Vec<CheckOutput> = match command {
            Command::Compute => compute_quantities(&ctx, &p.alphas),
            _ => p
                .plan
                .iter()
                .map(|c| {
                    let mut o = run_check(&ctx, &c.name, c.alpha, c.tolerance);
                    if c.expect == Expect::Fail {
                        o.report = o.report.expect_failure();
                    }
                    o
                })
                .collect(),
        };
        if let Some(dir) = &p.csv_dir {
            for o in &outputs {
                for (suffix, t) in &o.tables {
                    t.write(&dir.join(csv_name(idx, &p.name, &o.report.name, o.report.alpha, suffix)))?;
                }
            }
        }
        let checks: Vec<CheckReport> = outputs.into_iter().map(|o| o.report).collect();
        runs.push(RunReport {
            name: p.name.clone(),
            subject: SubjectInfo {
                kind: p.subject.kind().name().to_string(),
                label: p.subject.label(),
                dim: p.subject.dim(),
            },
            status: aggregate(checks.iter().map(|c| &c.status)),
            grid_size: p.grid.len(),
            checks,
        });
    }

    let config = json!({
        "spec": serde_json::to_value(&doc.runs).unwrap_or(Value::Null),
        "tolerance_overrides": overrides,
        "seed": seed,
        "csv_dir": opts.csv_dir.as_ref().map(|p| p.display().to_string()),
    });
    let quad = std::env::var(QUAD_NODES_ENV).ok().map(|_| quadrature_nodes(0)).filter(|n| *n > 0);
    Ok(Report {
        tool: "igeo".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        report_version: REPORT_VERSION,
        command: command.name().into(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        seed,
        quadrature_nodes: quad,
        status: aggregate(runs.iter().map(|r| &r.status)),
        config,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(v: Value) -> SpecDoc {
        SpecDoc::from_value(&v).unwrap()
    }

    #[test]
    fn verify_runs_checks_per_alpha() {
        let d = doc(json!({
            "name": "nn",
            "subject": {"model": {"builtin": "normal-natural"}},
            "grid": {"points": [[-0.5, 0.0]]},
            "checks": ["flatness", {"name": "fisher"}],
            "alpha": [1, -1]
        }));
        let r = execute(Command::Verify, &d, &Options::default()).unwrap();
        let names: Vec<_> = r.runs[0].checks.iter().map(|c| (c.name.as_str(), c.alpha)).collect();
        assert_eq!(names, vec![("flatness", Some(1.0)), ("flatness", Some(-1.0)), ("fisher", None)]);
        assert_eq!(r.status, Status::Pass);
    }

    #[test]
    fn override_changes_tolerance() {
        let d = doc(json!({
            "subject": {"model": {"builtin": "normal"}},
            "grid": {"points": [[0.0, 1.0]]},
            "checks": ["flatness"], "alpha": [1]
        }));
        let opts = Options {
            tol_override: vec![("flatness".into(), 1e3)],
            ..Default::default()
        };
        let r = execute(Command::Verify, &d, &opts).unwrap();
        assert_eq!(r.runs[0].checks[0].tolerance, 1e3);
        let bad = Options {
            tol_override: vec![("nope".into(), 1.0)],
            ..Default::default()
        };
        assert!(matches!(execute(Command::Verify, &d, &bad), Err(Error::Schema(_))));
    }

    #[test]
    fn config_errors_precede_evaluation() {
        let d = doc(json!({"suite": [
            {"subject": {"model": {"builtin": "normal"}}, "grid": {"points": [[0.0, 1.0]]}, "checks": ["fisher"]},
            {"subject": {"model": {"builtin": "no-such"}}, "grid": {"points": [[0.0]]}, "checks": ["fisher"]}
        ]}));
        assert!(matches!(execute(Command::Verify, &d, &Options::default()), Err(Error::Schema(_))));
    }

    #[test]
    fn csv_names() {
        assert_eq!(csv_name(3, "e flat", "flatness", Some(-1.0), "x"), "03-e_flat-flatness-a-1-x.csv");
        assert_eq!(csv_name(0, "r", "fisher", None, "metric"), "00-r-fisher-metric.csv");
    }

    #[test]
    fn bad_override_syntax() {
        assert!(parse_override("flatness").is_err());
        assert!(parse_override("flatness=-1").is_err());
        assert_eq!(parse_override("flatness=1e-4").unwrap(), ("flatness".into(), 1e-4));
    }
}
