//! Acceptance criteria, one line each. Closed-form oracles live here and are
//! frozen; the library never sees them.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, Array3};

use igeo::cli::{execute, Command, Options, SpecDoc};
use igeo::dualflat::{
    bernoulli_family, centro_affine_lift, geodesic, graph_realization, normal_family, PotentialFamily,
};
use igeo::immersion::{classify, paraboloid, sphere, statistical_structure, structural_check, tilted_paraboloid};
use igeo::infogeo::{
    alpha_connection, alpha_field, conjugate_connection, fisher_metric, flatness_check, projective_equivalence,
    MetricField,
};
use igeo::models::{builtin, normal};
use igeo::numerics::DiffScheme;
use igeo::submanifold::{autoparallel_check, exponential_form_check, load_embedding, slice};

type Outcome = Result<String, String>;

fn ok_if(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn grid2(a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    a.iter().flat_map(|x| b.iter().map(move |y| vec![*x, *y])).collect()
}

/// `η = (E[x²], E[x])` of the normal family in natural coordinates.
fn normal_eta(t: &[f64]) -> [f64; 2] {
    let mu = -t[1] / (2.0 * t[0]);
    let var = -1.0 / (2.0 * t[0]);
    [mu * mu + var, mu]
}

fn c1_fisher() -> Outcome {
    let m = normal();
    let start = Instant::now();
    let mut err = 0.0f64;
    for p in grid2(&linspace(-1.0, 1.0, 3), &linspace(0.5, 2.0, 3)) {
        let g = fisher_metric(&m, &p).map_err(|e| e.to_string())?;
        let s2 = p[1] * p[1];
        let want = Array2::from_diag(&ndarray::arr1(&[1.0 / s2, 2.0 / s2]));
        err = err.max(max_abs((&g - &want).iter()));
    }
    let secs = start.elapsed().as_secs_f64();
    ok_if(err < 1e-5 && secs < 1.0, format!("max|Δg| = {err:.2e}, {secs:.3} s"))
}

fn c2_duality() -> Outcome {
    let mut worst = 0.0f64;
    let scheme = DiffScheme::nested();
    for (name, grid) in [
        ("normal", grid2(&[-0.5, 0.5], &[0.8, 1.5])),
        ("bernoulli-natural", linspace(-2.0, 2.0, 5).into_iter().map(|t| vec![t]).collect()),
    ] {
        let m = builtin(name).map_err(|e| e.to_string())?;
        let g = MetricField::fisher(&m);
        for a in [-1.0, -0.5, 0.5, 1.0] {
            let conn = alpha_field(&m, a);
            for t in &grid {
                let bar = conjugate_connection(&g, &conn, t, &scheme).map_err(|e| e.to_string())?;
                let direct = alpha_connection(&m, t, -a).map_err(|e| e.to_string())?;
                worst = worst.max(max_abs((&bar - &direct).iter()));
            }
        }
    }
    ok_if(worst < 1e-4, format!("max|conj(α) - (-α)| = {worst:.2e}"))
}

fn c3_flatness() -> Outcome {
    let m = builtin("normal-natural").map_err(|e| e.to_string())?;
    let grid = grid2(&linspace(-1.0, -0.25, 3), &linspace(-0.5, 0.5, 3));
    let e = flatness_check(&m, &grid, 1.0);
    let mm = flatness_check(&m, &grid, -1.0);
    let z = flatness_check(&m, &grid, 0.0);
    ok_if(
        e.flat && mm.flat && e.max_r < 1e-4 && mm.max_r < 1e-4 && !z.flat && z.max_r > 1e-2,
        format!("max|R|: α=1 {:.2e}, α=-1 {:.2e}, α=0 {:.2e}", e.max_r, mm.max_r, z.max_r),
    )
}

fn c4_structural() -> Outcome {
    let g = grid2(&linspace(-0.5, 0.5, 5), &linspace(-0.5, 0.5, 5));
    let (s, p) = (sphere(1.0), paraboloid());
    let mut res = 0.0f64;
    for u in &g {
        for surf in [&s, &p] {
            res = res.max(structural_check(surf, u).map_err(|e| e.to_string())?.max());
        }
    }
    let fs = classify(&s, &g);
    let fp = classify(&p, &g);
    let sphere_ok = fs.centro_affine
        && fs.equiaffine
        && fs.nondegenerate
        && fs.blaschke
        && fs.proper_hypersphere
        && (fs.lambda - 1.0).abs() < 1e-6;
    let para_ok = fp.blaschke && fp.improper_hypersphere && !fp.proper_hypersphere;
    ok_if(
        res < 1e-6 && sphere_ok && para_ok,
        format!("residual {res:.2e}; sphere λ = {:.8}; paraboloid improper = {}", fs.lambda, fp.improper_hypersphere),
    )
}

fn c5_statistical() -> Outcome {
    let g = grid2(&linspace(-0.5, 0.5, 3), &linspace(-0.5, 0.5, 3));
    let r = |s| statistical_structure(s, &g, 1e-5).map_err(|e| e.to_string());
    let (a, b, c) = (r(&sphere(1.0))?, r(&paraboloid())?, r(&tilted_paraboloid(0.3))?);
    ok_if(
        a.max_codazzi_residual < 1e-5 && b.max_codazzi_residual < 1e-5 && c.max_codazzi_residual > 1e-2,
        format!(
            "sphere {:.2e}, paraboloid {:.2e}, non-equiaffine {:.2e}",
            a.max_codazzi_residual, b.max_codazzi_residual, c.max_codazzi_residual
        ),
    )
}

/// Hessian of K from the closed-form potentials.
fn hess_k(f: &PotentialFamily, t: &[f64]) -> Array2<f64> {
    if f.dim() == 1 {
        let s = 1.0 / (1.0 + (-t[0]).exp());
        Array2::from_elem((1, 1), s * (1.0 - s))
    } else {
        // K = -b²/(4a) + ½ log(-π/a)
        let (a, b) = (t[0], t[1]);
        ndarray::arr2(&[
            [-b * b / (2.0 * a * a * a) + 1.0 / (2.0 * a * a), b / (2.0 * a * a)],
            [b / (2.0 * a * a), -1.0 / (2.0 * a)],
        ])
    }
}

fn c6_graph() -> Outcome {
    let mut h_err = 0.0f64;
    let mut flat = 0.0f64;
    let cases: [(PotentialFamily, Vec<Vec<f64>>); 2] = [
        (bernoulli_family(), linspace(-2.0, 2.0, 5).into_iter().map(|t| vec![t]).collect()),
        (normal_family(), vec![vec![-0.5, 0.0], vec![-1.0, 0.5], vec![-0.25, -0.3]]),
    ];
    for (f, grid) in &cases {
        let s = graph_realization(f).map_err(|e| e.to_string())?;
        for t in grid {
            let d = s.decompose(t).map_err(|e| e.to_string())?;
            h_err = h_err.max(max_abs((&d.h - &hess_k(f, t)).iter()));
            flat = flat.max(max_abs(d.gamma.iter().chain(d.shape.iter()).chain(d.alpha.iter())));
        }
    }
    ok_if(h_err < 1e-5 && flat < 1e-6, format!("max|h - Hess K| = {h_err:.2e}, max(|Γ|,|S|,|α|) = {flat:.2e}"))
}

fn c7_lift() -> Outcome {
    let f = bernoulli_family();
    let s = centro_affine_lift(&f, None).map_err(|e| e.to_string())?;
    let zero = Array3::zeros((1, 1, 1));
    let mut worst_rho = 0.0f64;
    let mut worst_res = 0.0f64;
    let mut all = true;
    for t in linspace(-1.0, 1.0, 5) {
        let d = s.decompose(&[t]).map_err(|e| e.to_string())?;
        let literal = projective_equivalence(&d.gamma, &zero, 1e-6).map_err(|e| e.to_string())?;
        // ρ carrying the flat connection to the induced one
        let r = projective_equivalence(&zero, &d.gamma, 1e-6).map_err(|e| e.to_string())?;
        let want = -1.0 / (1.0 + (-t).exp());
        all &= literal.equivalent && r.equivalent;
        worst_rho = worst_rho.max((r.rho[0] - want).abs());
        worst_res = worst_res.max(r.residual);
    }
    ok_if(all && worst_rho < 1e-6, format!("residual {worst_res:.2e}, max|ρ + ∂log ψ| = {worst_rho:.2e}"))
}

fn c8_legendre() -> Outcome {
    let f = normal_family();
    let t = [-0.5, 0.0];
    let eta = f.dual_coords(&t).map_err(|e| e.to_string())?;
    let k = f.potential(&t).map_err(|e| e.to_string())?;
    let phi = f.dual_potential(&eta).map_err(|e| e.to_string())?;
    let back = f.invert_dual(&eta).map_err(|e| e.to_string())?;
    let want = normal_eta(&t);
    let eta_err = (eta[0] - want[0]).abs().max((eta[1] - want[1]).abs());
    let k_err = (k - 0.5 * (2.0 * std::f64::consts::PI).ln()).abs();
    let phi_err = (phi - -1.418939).abs();
    let rt = max_abs(back.theta.iter().zip(&t).map(|(a, b)| a - b).collect::<Vec<_>>().iter());
    ok_if(
        eta_err < 1e-6 && k_err < 1e-8 && phi_err < 1e-5 && rt < 1e-8,
        format!("|Δη| {eta_err:.1e}, |ΔK| {k_err:.1e}, |Δφ| {phi_err:.1e}, round trip {rt:.1e}"),
    )
}

fn c9_logistic() -> Outcome {
    let m = builtin("location-logistic").map_err(|e| e.to_string())?;
    let grid: Vec<Vec<f64>> = linspace(-1.0, 1.0, 3).into_iter().map(|t| vec![t]).collect();
    let mut flat = true;
    let mut gamma = 0.0f64;
    for a in [-1.0, 0.0, 1.0] {
        let r = flatness_check(&m, &grid, a);
        flat &= r.flat;
        gamma = gamma.max(r.max_gamma);
    }
    let ef = exponential_form_check(&m, &grid, None, 1e-6);
    ok_if(
        flat && gamma < 1e-3 && !ef.is_exponential_form && ef.max_variation > 0.1,
        format!("flat for α ∈ {{-1,0,1}}, max|Γ| = {gamma:.2e}; exponential form variation {:.3}", ef.max_variation),
    )
}

fn c10_slices() -> Outcome {
    let f = normal_family();
    let mut worst = 0.0f64;
    let mut all = true;
    for (idx, c, grid) in [(0usize, -0.5, vec![vec![-1.0], vec![0.0], vec![1.0]]), (1, 0.3, vec![vec![-1.0], vec![-0.6], vec![-0.25]])] {
        let s = slice(&f, &[idx], &[c]).map_err(|e| e.to_string())?;
        let ap = autoparallel_check(&s.embedding, &alpha_field(s.embedding.ambient(), 1.0), &grid, 1e-5);
        let ef = exponential_form_check(&s.family.model(), &grid, None, 1e-6);
        all &= ap.autoparallel && ef.is_exponential_form;
        worst = worst.max(ap.max_h);
    }
    let diag = load_embedding(&serde_json::json!({
        "ambient": {"builtin": "normal"}, "map": ["u[0]", "u[0]"], "domain": {"lo": [0.2], "hi": [3]}
    }))
    .map_err(|e| e.to_string())?;
    let d = autoparallel_check(&diag, &alpha_field(diag.ambient(), 1.0), &[vec![0.5], vec![1.0], vec![1.5]], 1e-5);
    ok_if(
        all && worst < 1e-5 && !d.autoparallel && d.max_h > 0.05,
        format!("slices max|H| = {worst:.2e}; (u,u) curve max|H| = {:.3}", d.max_h),
    )
}

fn c11_geodesics() -> Outcome {
    let f = normal_family();
    let m = f.model();
    let (t0, v) = ([-0.5, 0.0], [0.2, 0.3]);
    let e = geodesic(&alpha_field(&m, 1.0), &t0, &v, 1.0, 1000).map_err(|e| e.to_string())?;
    let lin = e
        .t
        .iter()
        .zip(&e.points)
        .map(|(t, p)| (p[0] - t0[0] - t * v[0]).abs().max((p[1] - t0[1] - t * v[1]).abs()))
        .fold(0.0, f64::max);

    let mg = geodesic(&alpha_field(&m, -1.0), &t0, &[0.1, 0.2], 1.0, 1000).map_err(|e| e.to_string())?;
    let etas: Vec<[f64; 2]> = mg.points.iter().map(|p| normal_eta(p)).collect();
    let (a, b) = (etas[0], etas[etas.len() - 1]);
    let straight = etas
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let s = j as f64 / (etas.len() - 1) as f64;
            (p[0] - a[0] - s * (b[0] - a[0])).abs().max((p[1] - a[1] - s * (b[1] - a[1])).abs())
        })
        .fold(0.0, f64::max);

    let n = normal();
    let lc = geodesic(&alpha_field(&n, 0.0), &[0.0, 1.0], &[0.5, 0.2], 1.0, 1000).map_err(|e| e.to_string())?;
    let speed = |p: &[f64], w: &[f64]| (w[0] * w[0] + 2.0 * w[1] * w[1]) / (p[1] * p[1]);
    let s0 = speed(&lc.points[0], &lc.velocities[0]);
    let drift = lc.points.iter().zip(&lc.velocities).map(|(p, w)| (speed(p, w) - s0).abs()).fold(0.0, f64::max);
    ok_if(
        lin < 1e-8 && straight < 1e-4 && drift < 1e-5,
        format!("e linearity {lin:.1e}, m straightness in η {straight:.1e}, ∇⁰ speed drift {drift:.1e}"),
    )
}

fn c12_determinism() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs/verification.json");
    let doc = SpecDoc::from_str(&std::fs::read_to_string(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let opts = Options {
        spec: path,
        seed: Some(7),
        ..Default::default()
    };
    let start = Instant::now();
    let a = execute(Command::Verify, &doc, &opts).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let b = execute(Command::Verify, &doc, &opts).map_err(|e| e.to_string())?;
    let same = a.comparable() == b.comparable();
    ok_if(
        same && secs < 60.0 && format!("{:?}", a.status) == "Pass",
        format!("identical = {same}, suite status {:?}, {secs:.1} s", a.status),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("Fisher oracle", c1_fisher),
        ("α-duality", c2_duality),
        ("e/m flatness, α = 0 curved", c3_flatness),
        ("fundamental equations and classification", c4_structural),
        ("statistical structure witnesses", c5_statistical),
        ("graph realization", c6_graph),
        ("centro-affine lift", c7_lift),
        ("Legendre duality", c8_legendre),
        ("logistic counterexample", c9_logistic),
        ("slices and the diagonal curve", c10_slices),
        ("geodesics", c11_geodesics),
        ("determinism and runtime", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, msg) = match out {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {:>2} {tag} {name}: {msg}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
