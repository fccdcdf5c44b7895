use ndarray::Array1;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::report::{CheckReport, PointResult, Status, Table};
use super::spec::{GeodesicSpec, Subject};
use crate::dualflat::{centro_affine_lift, geodesic, graph_realization, PotentialFamily};
use crate::error::{Error, Result};
use crate::immersion::{classify, statistical_structure, structural_check, Hypersurface};
use crate::infogeo::{
    alpha_connection, alpha_field, codazzi_check, conjugate_connection, curvature, fisher_metric,
    flatness_check_with, projective_equivalence, MetricField,
};
use crate::models::{validate_model, StatisticalModel};
use crate::numerics::{min_eigenvalue, DiffScheme};
use crate::submanifold::{autoparallel_check, exponential_form_check, SubmanifoldEmbedding};

/// Output of one check: its report plus any tensor dumps, keyed by suffix.
pub struct CheckOutput {
    pub report: CheckReport,
    pub tables: Vec<(String, Table)>,
}

impl CheckOutput {
    fn plain(report: CheckReport) -> Self {
        CheckOutput {
            report,
            tables: Vec::new(),
        }
    }
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Evaluates `f` on every grid point in parallel, keeping grid order.
fn sweep<T: Send>(grid: &[Vec<f64>], f: impl Fn(&[f64]) -> Result<T> + Sync) -> Vec<(usize, Result<T>)> {
    grid.par_iter().enumerate().map(|(i, p)| (i, f(p))).collect()
}

fn point_results(grid: &[Vec<f64>], values: &[(usize, Result<f64>)]) -> Vec<PointResult> {
    values
        .iter()
        .map(|(i, r)| PointResult {
            index: *i,
            point: grid[*i].clone(),
            value: r.as_ref().ok().and_then(|v| finite(*v)),
            error: match r {
                Ok(v) if !v.is_finite() => Some("non-finite value".into()),
                Ok(_) => None,
                Err(e) => Some(e.to_string()),
            },
        })
        .collect()
}

struct Spec<'a> {
    name: &'a str,
    alpha: Option<f64>,
    tolerance: f64,
    criterion: &'a str,
    oracle: &'a str,
}

/// Residual is the grid maximum; pass iff every point evaluated and the maximum is below `tolerance`.
fn below(s: Spec, points: Vec<PointResult>, details: Value) -> CheckReport {
    let ok_points = points.iter().all(|p| p.error.is_none());
    let residual = points.iter().filter_map(|p| p.value).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let status = Status::from_bool(ok_points && !points.is_empty() && residual.is_some_and(|r| r < s.tolerance));
    let failed = points.iter().filter(|p| p.error.is_some()).count();
    CheckReport {
        name: s.name.to_string(),
        alpha: s.alpha,
        status,
        residual,
        tolerance: s.tolerance,
        criterion: s.criterion.to_string(),
        oracle: s.oracle.to_string(),
        points,
        details,
        message: (failed > 0).then(|| format!("{failed} grid point(s) could not be evaluated")),
        outcome: None,
    }
}

fn error_report(name: &str, alpha: Option<f64>, tolerance: f64, e: &Error) -> CheckReport {
    CheckReport {
        name: name.to_string(),
        alpha,
        status: Status::Fail,
        residual: None,
        tolerance,
        criterion: String::new(),
        oracle: String::new(),
        points: Vec::new(),
        details: Value::Null,
        message: Some(e.to_string()),
        outcome: None,
    }
}

/// The statistical model a model-type check runs on.
pub(crate) fn model_of(subject: &Subject) -> Option<StatisticalModel> {
    match subject {
        Subject::Model(m) => Some(m.clone()),
        Subject::Family(f) => Some(f.model()),
        _ => None,
    }
}

pub(crate) struct Ctx<'a> {
    pub subject: &'a Subject,
    pub grid: &'a [Vec<f64>],
    pub geodesic: Option<&'a GeodesicSpec>,
}

/// Runs check `name` once (or once for `alpha`).
pub(crate) fn run_check(ctx: &Ctx, name: &str, alpha: Option<f64>, tol: f64) -> CheckOutput {
    let grid = ctx.grid;
    let unsupported = || {
        CheckOutput::plain(error_report(
            name,
            alpha,
            tol,
            &Error::schema(format!("check `{name}` does not apply to this subject")),
        ))
    };
    match (name, ctx.subject) {
        ("validate", s) => match model_of(s) {
            Some(m) => CheckOutput::plain(validate(&m, grid, tol)),
            None => unsupported(),
        },
        ("fisher", s) => match model_of(s) {
            Some(m) => fisher(&m, grid, tol),
            None => unsupported(),
        },
        ("duality", s) => match model_of(s) {
            Some(m) => CheckOutput::plain(duality(&m, grid, alpha.unwrap_or(1.0), tol)),
            None => unsupported(),
        },
        ("flatness", s) => match model_of(s) {
            Some(m) => CheckOutput::plain(flatness(&m, grid, alpha.unwrap_or(1.0), tol)),
            None => unsupported(),
        },
        ("codazzi", s) => match model_of(s) {
            Some(m) => CheckOutput::plain(codazzi(&m, grid, alpha.unwrap_or(1.0), tol)),
            None => unsupported(),
        },
        ("exponential-form", Subject::Embedding(e)) => match e.model() {
            Ok(m) => CheckOutput::plain(exponential_form(&m, grid, tol)),
            Err(err) => CheckOutput::plain(error_report(name, None, tol, &err)),
        },
        ("exponential-form", s) => match model_of(s) {
            Some(m) => CheckOutput::plain(exponential_form(&m, grid, tol)),
            None => unsupported(),
        },
        ("structural", Subject::Surface(s)) => CheckOutput::plain(structural(s, grid, tol)),
        ("classify", Subject::Surface(s)) => CheckOutput::plain(classification(name, s, grid, tol)),
        ("classify", Subject::Family(f)) => match graph_realization(f) {
            Ok(s) => CheckOutput::plain(classification(name, &s, grid, tol)),
            Err(e) => CheckOutput::plain(error_report(name, None, tol, &e)),
        },
        ("statistical-structure", Subject::Surface(s)) => CheckOutput::plain(structure(s, grid, tol)),
        ("statistical-structure", Subject::Family(f)) => match graph_realization(f) {
            Ok(s) => CheckOutput::plain(structure(&s, grid, tol)),
            Err(e) => CheckOutput::plain(error_report(name, None, tol, &e)),
        },
        ("legendre", Subject::Family(f)) => CheckOutput::plain(legendre(f, grid, tol)),
        ("hessian-metric", Subject::Family(f)) => CheckOutput::plain(hessian_metric(f, grid, tol)),
        ("graph-realization", Subject::Family(f)) => CheckOutput::plain(graph(f, grid, tol)),
        ("centro-affine-lift", Subject::Family(f)) => CheckOutput::plain(lift(f, grid, tol)),
        ("autoparallel", Subject::Embedding(e)) => CheckOutput::plain(autoparallel(e, grid, alpha.unwrap_or(1.0), tol)),
        ("exponential-implies-autoparallel", Subject::Embedding(e)) => CheckOutput::plain(forward(e, grid, tol)),
        ("geodesic", s) => match (model_of(s), ctx.geodesic) {
            (Some(m), Some(g)) => geodesic_check(&m, s, g, tol),
            _ => unsupported(),
        },
        _ => unsupported(),
    }
}

fn validate(m: &StatisticalModel, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let r = validate_model(m, grid);
    let values: Vec<(usize, Result<f64>)> = r
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| match &p.error {
            Some(e) => (i, Err(Error::InvalidConfig(e.clone()))),
            None => (i, Ok(p.normalization_residual)),
        })
        .collect();
    let mut rep = below(
        Spec {
            name: "validate",
            alpha: None,
            tolerance: tol,
            criterion: "max |E[1] - 1| < tolerance and independent scores",
            oracle: "normalization of the density",
        },
        point_results(grid, &values),
        json!({"max_score_mean": finite(r.max_score_mean), "scores_independent": r.scores_independent}),
    );
    if !r.scores_independent || r.points.iter().any(|p| !p.finite) {
        rep.status = Status::Fail;
    }
    rep
}

fn fisher(m: &StatisticalModel, grid: &[Vec<f64>], tol: f64) -> CheckOutput {
    let gs = sweep(grid, |t| fisher_metric(m, t));
    let mut table = Table::new(&["point", "i", "j", "value"]);
    let values: Vec<(usize, Result<f64>)> = gs
        .into_iter()
        .map(|(i, r)| {
            (
                i,
                r.map(|g| {
                    table.push_array(i, &g);
                    min_eigenvalue(&g)
                }),
            )
        })
        .collect();
    let points = point_results(grid, &values);
    let ok = points.iter().all(|p| p.error.is_none());
    let min = points.iter().filter_map(|p| p.value).fold(f64::INFINITY, f64::min);
    let report = CheckReport {
        name: "fisher".into(),
        alpha: None,
        status: Status::from_bool(ok && min > tol),
        residual: finite(min),
        tolerance: tol,
        criterion: "min eigenvalue of g > tolerance".into(),
        oracle: "positive definiteness".into(),
        points,
        details: Value::Null,
        message: None,
        outcome: None,
    };
    CheckOutput {
        report,
        tables: vec![("metric".into(), table)],
    }
}

fn duality(m: &StatisticalModel, grid: &[Vec<f64>], alpha: f64, tol: f64) -> CheckReport {
    let g = MetricField::fisher(m);
    let conn = alpha_field(m, alpha);
    let scheme = DiffScheme::nested();
    let values = sweep(grid, |t| {
        let bar = conjugate_connection(&g, &conn, t, &scheme)?;
        let direct = alpha_connection(m, t, -alpha)?;
        Ok(max_abs((&bar - &direct).iter()))
    });
    below(
        Spec {
            name: "duality",
            alpha: Some(alpha),
            tolerance: tol,
            criterion: "max |conjugate(α) - (-α)| < tolerance",
            oracle: "direct evaluation of the (-α)-connection",
        },
        point_results(grid, &values),
        Value::Null,
    )
}

fn flatness(m: &StatisticalModel, grid: &[Vec<f64>], alpha: f64, tol: f64) -> CheckReport {
    let r = flatness_check_with(m, grid, alpha, tol, &DiffScheme::nested());
    let values: Vec<(usize, Result<f64>)> = r
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| match &p.error {
            Some(e) => (i, Err(Error::InvalidConfig(e.clone()))),
            None => (i, Ok(p.max_r.max(p.max_t))),
        })
        .collect();
    let mut rep = below(
        Spec {
            name: "flatness",
            alpha: Some(alpha),
            tolerance: tol,
            criterion: "max(|R|, |T|) < tolerance",
            oracle: "vanishing curvature and torsion",
        },
        point_results(grid, &values),
        json!({"max_r": finite(r.max_r), "max_t": finite(r.max_t), "max_gamma": finite(r.max_gamma), "flat": r.flat}),
    );
    rep.status = Status::from_bool(r.flat);
    rep
}

fn codazzi(m: &StatisticalModel, grid: &[Vec<f64>], alpha: f64, tol: f64) -> CheckReport {
    let g = MetricField::fisher(m);
    let conn = alpha_field(m, alpha);
    let scheme = DiffScheme::nested();
    let values = sweep(grid, |t| codazzi_check(&g, &conn, t, &scheme));
    below(
        Spec {
            name: "codazzi",
            alpha: Some(alpha),
            tolerance: tol,
            criterion: "max |(∇_i g)_jk - (∇_k g)_ji| < tolerance",
            oracle: "total symmetry of ∇g",
        },
        point_results(grid, &values),
        Value::Null,
    )
}

fn exponential_form(m: &StatisticalModel, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let values = sweep(grid, |t| {
        let r = exponential_form_check(m, &[t.to_vec()], None, tol);
        match r.errors.first() {
            Some((_, e)) => Err(Error::InvalidConfig(e.clone())),
            None => Ok(r.max_variation),
        }
    });
    let mut rep = below(
        Spec {
            name: "exponential-form",
            alpha: None,
            tolerance: tol,
            criterion: "outcome spread of ∂_a∂_b ℓ < tolerance",
            oracle: "outcome-free second derivatives of natural-form densities",
        },
        point_results(grid, &values),
        Value::Null,
    );
    let verdict = if rep.status == Status::Pass { "natural form" } else { "not in natural form" };
    rep.details = json!({"verdict": verdict});
    rep.message = Some(
        "coordinate-relative test: a negative result means not in natural form in these coordinates, \
         not that the model is not an exponential family"
            .into(),
    );
    rep
}

fn structural(s: &Hypersurface, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let values = sweep(grid, |u| structural_check(s, u).map(|r| r.max()));
    below(
        Spec {
            name: "structural",
            alpha: None,
            tolerance: tol,
            criterion: "max Gauss / Codazzi / Ricci residual < tolerance",
            oracle: "fundamental equations of affine immersions",
        },
        point_results(grid, &values),
        Value::Null,
    )
}

fn classification(name: &str, s: &Hypersurface, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let flags = classify(s, grid);
    CheckReport {
        name: name.into(),
        alpha: None,
        status: Status::from_bool(flags.errors.is_empty()),
        residual: None,
        tolerance: tol,
        criterion: "classification computed at every grid point".into(),
        oracle: "thresholded flags".into(),
        points: Vec::new(),
        message: (!flags.errors.is_empty()).then(|| flags.errors.join("; ")),
        outcome: None,
        details: serde_json::to_value(&flags).unwrap_or(Value::Null),
    }
}

fn structure(s: &Hypersurface, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let spec = Spec {
        name: "statistical-structure",
        alpha: None,
        tolerance: tol,
        criterion: "Codazzi residual of the induced (∇, h) < tolerance",
        oracle: "total symmetry of ∇h",
    };
    match statistical_structure(s, grid, tol) {
        Ok(r) => {
            let values: Vec<(usize, Result<f64>)> =
                r.points.iter().enumerate().map(|(i, p)| (i, Ok(p.codazzi_residual))).collect();
            below(spec, point_results(grid, &values), json!({"is_statistical": r.is_statistical}))
        }
        Err(e) => {
            let mut rep = below(spec, Vec::new(), Value::Null);
            rep.message = Some(e.to_string());
            rep
        }
    }
}

fn legendre(f: &PotentialFamily, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let values = sweep(grid, |t| {
        let eta = f.dual_coords(t)?;
        let back = f.invert_dual(&eta)?;
        Ok(max_abs(back.theta.iter().zip(t).map(|(a, b)| a - b).collect::<Vec<_>>().iter()))
    });
    below(
        Spec {
            name: "legendre",
            alpha: None,
            tolerance: tol,
            criterion: "max |θ(η(θ)) - θ| < tolerance",
            oracle: "Legendre involution",
        },
        point_results(grid, &values),
        Value::Null,
    )
}

fn hessian_metric(f: &PotentialFamily, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let m = f.model();
    let values = sweep(grid, |t| {
        let h = f.hessian_metric(t)?;
        let g = fisher_metric(&m, t)?;
        Ok(max_abs((&h - &g).iter()))
    });
    below(
        Spec {
            name: "hessian-metric",
            alpha: None,
            tolerance: tol,
            criterion: "max |Hess K - g| < tolerance",
            oracle: "Fisher metric of the family",
        },
        point_results(grid, &values),
        Value::Null,
    )
}

fn graph(f: &PotentialFamily, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let s = match graph_realization(f) {
        Ok(s) => s,
        Err(e) => return error_report("graph-realization", None, tol, &e),
    };
    let values = sweep(grid, |t| {
        let d = s.decompose(t)?;
        let hk = f.hessian_metric(t)?;
        let flat = max_abs(d.gamma.iter().chain(d.shape.iter()).chain(d.alpha.iter()));
        Ok(max_abs((&d.h - &hk).iter()).max(flat))
    });
    below(
        Spec {
            name: "graph-realization",
            alpha: None,
            tolerance: tol,
            criterion: "max(|h - Hess K|, |Γ|, |S|, |α|) < tolerance",
            oracle: "Hessian of the potential; flat induced structure",
        },
        point_results(grid, &values),
        Value::Null,
    )
}

fn lift(f: &PotentialFamily, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let s = match centro_affine_lift(f, None) {
        Ok(s) => s,
        Err(e) => return error_report("centro-affine-lift", None, tol, &e),
    };
    let n = f.dim();
    let values = sweep(grid, |t| {
        let d = s.decompose(t)?;
        let r = projective_equivalence(&ndarray::Array3::zeros((n, n, n)), &d.gamma, tol)?;
        // ψ = exp K, so −∂ log ψ = −η
        let eta = f.dual_coords(t)?;
        let rho_err = max_abs(r.rho.iter().zip(&eta).map(|(a, b)| a + b).collect::<Vec<_>>().iter());
        Ok(r.residual.max(rho_err))
    });
    below(
        Spec {
            name: "centro-affine-lift",
            alpha: None,
            tolerance: tol,
            criterion: "projective-equivalence residual and |ρ + ∂ log ψ| < tolerance",
            oracle: "projective flatness with ρ = -∂ log ψ, ψ = exp K",
        },
        point_results(grid, &values),
        Value::Null,
    )
}

fn autoparallel(e: &SubmanifoldEmbedding, grid: &[Vec<f64>], alpha: f64, tol: f64) -> CheckReport {
    let r = autoparallel_check(e, &alpha_field(e.ambient(), alpha), grid, tol);
    let mut values: Vec<(usize, Result<f64>)> = Vec::new();
    for (i, u) in grid.iter().enumerate() {
        match r.points.iter().find(|p| &p.u == u) {
            Some(p) => values.push((i, Ok(p.max_abs))),
            None => {
                let msg = r.errors.iter().find(|(v, _)| v == u).map_or("not evaluated".to_string(), |x| x.1.clone());
                values.push((i, Err(Error::InvalidConfig(msg))));
            }
        }
    }
    below(
        Spec {
            name: "autoparallel",
            alpha: Some(alpha),
            tolerance: tol,
            criterion: "max |H| < tolerance",
            oracle: "vanishing embedding curvature",
        },
        point_results(grid, &values),
        Value::Null,
    )
}

/// Natural form of the submanifold implies e-autoparallel; tested only where
/// both ambient and submanifold are in natural form.
fn forward(e: &SubmanifoldEmbedding, grid: &[Vec<f64>], tol: f64) -> CheckReport {
    let name = "exponential-implies-autoparallel";
    let ef_tol = crate::submanifold::EXPONENTIAL_FORM_TOLERANCE;
    let untestable = |msg: String| CheckReport {
        name: name.into(),
        alpha: Some(1.0),
        status: Status::Untestable,
        residual: None,
        tolerance: tol,
        criterion: "e-autoparallel whenever the submanifold is in natural form".into(),
        oracle: "natural-form hypothesis".into(),
        points: Vec::new(),
        details: Value::Null,
        message: Some(msg),
        outcome: None,
    };
    let ambient_pts: Vec<Vec<f64>> = match grid.iter().map(|u| e.theta(u)).collect::<Result<Vec<_>>>() {
        Ok(p) => p,
        Err(err) => return error_report(name, Some(1.0), tol, &err),
    };
    let amb = exponential_form_check(e.ambient(), &ambient_pts, None, ef_tol);
    if !amb.is_exponential_form {
        return untestable(format!(
            "ambient not in natural form (variation {:e}); hypothesis not applicable",
            amb.max_variation
        ));
    }
    let sub = match e.model() {
        Ok(m) => exponential_form_check(&m, grid, None, ef_tol),
        Err(err) => return error_report(name, Some(1.0), tol, &err),
    };
    if !sub.is_exponential_form {
        return untestable(format!(
            "submanifold not in natural form (variation {:e}); hypothesis not met",
            sub.max_variation
        ));
    }
    let mut rep = autoparallel(e, grid, 1.0, tol);
    rep.name = name.into();
    rep.criterion = "e-autoparallel whenever the submanifold is in natural form".into();
    rep.oracle = "natural-form hypothesis met; max |H| under the e-connection".into();
    rep
}

fn chord_deviation(pts: &[Vec<f64>]) -> f64 {
    let (a, b) = (&pts[0], &pts[pts.len() - 1]);
    let k = (pts.len() - 1).max(1) as f64;
    pts.iter()
        .enumerate()
        .map(|(j, p)| {
            let s = j as f64 / k;
            max_abs(p.iter().zip(a.iter().zip(b)).map(|(x, (a, b))| x - a - s * (b - a)).collect::<Vec<_>>().iter())
        })
        .fold(0.0, f64::max)
}

fn geodesic_check(m: &StatisticalModel, subject: &Subject, g: &GeodesicSpec, tol: f64) -> CheckOutput {
    let conn = alpha_field(m, g.alpha);
    let (path, status, message) = match geodesic(&conn, &g.theta0, &g.v0, g.t_final, g.steps) {
        Ok(p) => (p, Status::Pass, None),
        Err(Error::LeftDomain { t, partial }) => (*partial, Status::Fail, Some(format!("geodesic left the domain at t = {t}"))),
        Err(e) => return CheckOutput::plain(error_report("geodesic", Some(g.alpha), tol, &e)),
    };
    let stride = (path.len() / 100).max(1);
    let samples: Vec<usize> = (0..path.len()).step_by(stride).chain(std::iter::once(path.len() - 1)).collect();
    let speeds: Vec<Result<f64>> = samples
        .par_iter()
        .map(|&i| {
            let gm = fisher_metric(m, &path.points[i])?;
            let v = Array1::from(path.velocities[i].clone());
            Ok(v.dot(&gm.dot(&v)))
        })
        .collect();
    let speeds: Result<Vec<f64>> = speeds.into_iter().collect();
    let drift = speeds.as_ref().ok().map(|s| max_abs(s.iter().map(|v| v - s[0]).collect::<Vec<_>>().iter()));
    let linearity = {
        let lin: Vec<Vec<f64>> = path
            .t
            .iter()
            .map(|t| g.theta0.iter().zip(&g.v0).map(|(a, v)| a + t * v).collect())
            .collect();
        max_abs(path.points.iter().zip(&lin).flat_map(|(p, l)| p.iter().zip(l).map(|(a, b)| a - b)).collect::<Vec<_>>().iter())
    };
    let dual_linearity = match subject {
        Subject::Family(f) => {
            let every = (path.len() / 10).max(1);
            let etas: Result<Vec<Vec<f64>>> = path.points.iter().step_by(every).map(|p| f.dual_coords(p)).collect();
            etas.ok().filter(|e| e.len() > 1).map(|e| chord_deviation(&e))
        }
        _ => None,
    };
    let mut rep = CheckReport {
        name: "geodesic".into(),
        alpha: Some(g.alpha),
        status,
        residual: None,
        tolerance: tol,
        criterion: "stays in the domain; α = 1: θ-linearity, α = -1 (family): η-linearity, α = 0: g-speed drift < tolerance".into(),
        oracle: "affine parametrization in flat charts; speed conservation for Levi-Civita".into(),
        points: Vec::new(),
        details: json!({
            "steps": g.steps,
            "t_final": g.t_final,
            "end": path.end(),
            "speed_drift": drift.and_then(finite),
            "linearity": finite(linearity),
            "dual_linearity": dual_linearity.and_then(finite),
        }),
        message,
        outcome: None,
    };
    if rep.status == Status::Pass {
        let judged = if g.alpha == 0.0 {
            Some(drift.and_then(finite))
        } else if g.alpha == 1.0 {
            Some(finite(linearity))
        } else if g.alpha == -1.0 && dual_linearity.is_some() {
            Some(dual_linearity.and_then(finite))
        } else {
            None
        };
        if let Some(r) = judged {
            rep.residual = r;
            rep.status = Status::from_bool(r.is_some_and(|d| d < tol));
        }
    }
    let n = g.theta0.len();
    let mut head = vec!["step".to_string(), "t".to_string()];
    head.extend((0..n).map(|i| format!("theta_{i}")));
    head.extend((0..n).map(|i| format!("v_{i}")));
    let mut table = Table {
        header: head,
        rows: Vec::new(),
    };
    for (k, ((t, p), v)) in path.t.iter().zip(&path.points).zip(&path.velocities).enumerate() {
        let mut row = vec![k.to_string(), format!("{t:e}")];
        row.extend(p.iter().chain(v).map(|x| format!("{x:e}")));
        table.rows.push(row);
    }
    CheckOutput {
        report: rep,
        tables: vec![("path".into(), table)],
    }
}

/// Quantities computed by `compute`, one report each with tensor dumps.
pub(crate) fn compute_quantities(ctx: &Ctx, alphas: &[f64]) -> Vec<CheckOutput> {
    let grid = ctx.grid;
    let mut out = Vec::new();
    let computed = |name: &str, alpha: Option<f64>, values: Vec<(usize, Result<f64>)>, what: &str| {
        let points = point_results(grid, &values);
        let ok = points.iter().all(|p| p.error.is_none());
        CheckReport {
            name: name.into(),
            alpha,
            status: Status::from_bool(ok),
            residual: None,
            tolerance: 0.0,
            criterion: "evaluated at every grid point".into(),
            oracle: what.into(),
            points,
            details: Value::Null,
            message: None,
            outcome: None,
        }
    };
    if let Some(m) = model_of(ctx.subject) {
        out.push(fisher(&m, grid, 0.0));
        for &a in alphas {
            let mut conn_t = Table::new(&["point", "i", "j", "k", "value"]);
            let mut riem_t = Table::new(&["point", "l", "i", "j", "k", "value"]);
            let field = alpha_field(&m, a);
            let res = sweep(grid, |t| {
                let low = alpha_connection(&m, t, a)?;
                let pack = curvature(&field, t, &DiffScheme::nested())?;
                Ok((low, pack))
            });
            let mut conn_v = Vec::new();
            let mut riem_v = Vec::new();
            for (i, r) in res {
                match r {
                    Ok((low, pack)) => {
                        conn_t.push_array(i, &low);
                        riem_t.push_array(i, &pack.riemann);
                        conn_v.push((i, Ok(max_abs(low.iter()))));
                        riem_v.push((i, Ok(pack.max_riemann())));
                    }
                    Err(e) => {
                        conn_v.push((i, Err(e.clone())));
                        riem_v.push((i, Err(e)));
                    }
                }
            }
            out.push(CheckOutput {
                report: computed("alpha-connection", Some(a), conn_v, "max |Γ_ij,k|"),
                tables: vec![("lower".into(), conn_t)],
            });
            out.push(CheckOutput {
                report: computed("riemann", Some(a), riem_v, "max |R^l_ijk|"),
                tables: vec![("riemann".into(), riem_t)],
            });
        }
    }
    match ctx.subject {
        Subject::Family(f) => {
            let n = f.dim();
            let mut head = vec!["point".to_string(), "K".to_string(), "phi".to_string()];
            head.extend((0..n).map(|i| format!("eta_{i}")));
            let mut t = Table {
                header: head,
                rows: Vec::new(),
            };
            let res = sweep(grid, |x| f.dual_point(x).and_then(|p| Ok((f.potential(x)?, p))));
            let mut vals = Vec::new();
            for (i, r) in res {
                match r {
                    Ok((k, p)) => {
                        let mut row = vec![i.to_string(), format!("{k:e}"), format!("{:e}", p.phi)];
                        row.extend(p.eta.iter().map(|v| format!("{v:e}")));
                        t.rows.push(row);
                        vals.push((i, Ok(k)));
                    }
                    Err(e) => vals.push((i, Err(e))),
                }
            }
            out.push(CheckOutput {
                report: computed("potential", None, vals, "K(θ); η and φ in the table"),
                tables: vec![("dual".into(), t)],
            });
        }
        Subject::Surface(s) => {
            let mut tabs = [
                Table::new(&["point", "i", "j", "k", "value"]),
                Table::new(&["point", "i", "j", "value"]),
                Table::new(&["point", "k", "i", "value"]),
                Table::new(&["point", "i", "value"]),
            ];
            let mut vals = Vec::new();
            for (i, r) in sweep(grid, |u| s.decompose(u)) {
                match r {
                    Ok(d) => {
                        tabs[0].push_array(i, &d.gamma);
                        tabs[1].push_array(i, &d.h);
                        tabs[2].push_array(i, &d.shape);
                        tabs[3].push_array(i, &Array1::from(d.alpha.clone()));
                        vals.push((i, Ok(crate::numerics::determinant(&d.h))));
                    }
                    Err(e) => vals.push((i, Err(e))),
                }
            }
            let [g, h, sh, al] = tabs;
            out.push(CheckOutput {
                report: computed("decompose", None, vals, "det h; Γ, h, S, α in the tables"),
                tables: vec![("gamma".into(), g), ("h".into(), h), ("shape".into(), sh), ("alpha".into(), al)],
            });
        }
        Subject::Embedding(e) => {
            let mut t = Table::new(&["point", "i", "a", "value"]);
            let mut vals = Vec::new();
            for (i, r) in sweep(grid, |u| e.jacobian(u)) {
                match r {
                    Ok(b) => {
                        t.push_array(i, &b);
                        vals.push((i, Ok(crate::numerics::rank(&b, 1e-8) as f64)));
                    }
                    Err(err) => vals.push((i, Err(err))),
                }
            }
            out.push(CheckOutput {
                report: computed("jacobian", None, vals, "rank of B"),
                tables: vec![("jacobian".into(), t)],
            });
        }
        Subject::Model(_) => {}
    }
    out
}

