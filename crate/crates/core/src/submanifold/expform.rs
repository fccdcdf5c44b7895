use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::models::StatisticalModel;
use crate::numerics::{self, DiffScheme, SpaceKind};

pub const EXPONENTIAL_FORM_TOLERANCE: f64 = 1e-6;
pub const MIN_PROBES: usize = 8;

const QUANTILES: [f64; 9] = [0.05, 0.15, 0.25, 0.35, 0.5, 0.65, 0.75, 0.85, 0.95];

const NOTE: &str = "coordinate-relative test: a negative result means the model is not in natural form \
in these coordinates, not that it is not an exponential family";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFormReport {
    pub is_exponential_form: bool,
    /// Largest spread of `∂_a∂_bℓ(x; θ)` over probe points, over the grid.
    pub max_variation: f64,
    pub tolerance: f64,
    pub probes: usize,
    pub verdict: String,
    pub note: String,
    pub errors: Vec<(Vec<f64>, String)>,
}

/// Probe outcomes at `theta`: normal quantiles through the model's placement
/// on continuous spaces, the full support on finite ones.
pub fn probe_points(model: &StatisticalModel, theta: &[f64]) -> Vec<Vec<f64>> {
    match &model.space().kind {
        SpaceKind::Finite { points } => points.clone(),
        _ => {
            let std = Normal::new(0.0, 1.0).expect("standard normal");
            let z: Vec<f64> = QUANTILES.iter().map(|p| std.inverse_cdf(*p)).collect();
            let place = model.placement(theta);
            let k = place.len();
            (0..QUANTILES.len())
                .map(|j| {
                    // stagger coordinates so the probes are not collinear
                    (0..k)
                        .map(|c| place[c].center + place[c].scale * z[(j + 4 * c) % z.len()])
                        .collect()
                })
                .collect()
        }
    }
}

fn hessian_spread(model: &StatisticalModel, theta: &[f64], probes: &[Vec<f64>]) -> Result<f64> {
    let scheme = DiffScheme::new(2, 2);
    let n = model.dim();
    let hs = probes
        .iter()
        .map(|x| {
            numerics::hessian(
                |t| model.log_density(x, t).unwrap_or(f64::NAN),
                theta,
                &scheme,
                Some(model.domain()),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut spread = 0.0f64;
    for a in 0..n {
        for b in a..n {
            let (lo, hi) = hs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), m| (l.min(m[a][b]), h.max(m[a][b])));
            spread = spread.max(hi - lo);
        }
    }
    Ok(spread)
}

/// Natural form holds iff second parameter-derivatives of `ℓ` do not depend
/// on the outcome.
pub fn exponential_form_check(
    model: &StatisticalModel,
    grid: &[Vec<f64>],
    probes: Option<&[Vec<f64>]>,
    tolerance: f64,
) -> ExponentialFormReport {
    let results: Vec<_> = grid
        .par_iter()
        .map(|t| {
            let pts = match probes {
                Some(p) => p.to_vec(),
                None => probe_points(model, t),
            };
            (t, pts.len(), hessian_spread(model, t, &pts))
        })
        .collect();
    let mut max_variation = 0.0f64;
    let mut min_probes = usize::MAX;
    let mut errors = Vec::new();
    for (t, count, r) in results {
        min_probes = min_probes.min(count);
        match r {
            Ok(v) if v.is_finite() => max_variation = max_variation.max(v),
            Ok(_) => errors.push((t.clone(), "non-finite second derivative".to_string())),
            Err(e) => errors.push((t.clone(), e.to_string())),
        }
    }
    if min_probes == usize::MAX {
        min_probes = 0;
    }
    let enough = min_probes >= MIN_PROBES || matches!(model.space().kind, SpaceKind::Finite { .. }) && min_probes >= 2;
    if !enough {
        errors.push((Vec::new(), format!("only {min_probes} probe points, need {MIN_PROBES}")));
    }
    let ok = errors.is_empty() && !grid.is_empty() && max_variation < tolerance;
    ExponentialFormReport {
        is_exponential_form: ok,
        max_variation,
        tolerance,
        probes: min_probes,
        verdict: if ok { "natural form" } else { "not in natural form" }.to_string(),
        note: NOTE.to_string(),
        errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{builtin, reference_grid};

    #[test]
    fn natural_families_pass() {
        for name in ["normal-natural", "bernoulli-natural", "categorical-natural", "poisson-natural"] {
            let m = builtin(name).unwrap();
            let r = exponential_form_check(&m, &reference_grid(name), None, EXPONENTIAL_FORM_TOLERANCE);
            assert!(r.is_exponential_form, "{name}: {r:?}");
        }
    }

    #[test]
    fn mean_scale_coordinates_fail() {
        let m = builtin("normal").unwrap();
        let r = exponential_form_check(&m, &reference_grid("normal"), None, EXPONENTIAL_FORM_TOLERANCE);
        assert!(!r.is_exponential_form && r.max_variation > 0.1);
        assert_eq!(r.verdict, "not in natural form");
    }

    #[test]
    fn logistic_location_fails() {
        let m = builtin("location-logistic").unwrap();
        let r = exponential_form_check(&m, &reference_grid("location-logistic"), None, EXPONENTIAL_FORM_TOLERANCE);
        assert!(!r.is_exponential_form && r.max_variation > 0.1, "{r:?}");
    }

    #[test]
    fn probe_count_enforced() {
        let m = builtin("normal-natural").unwrap();
        let few = vec![vec![0.0], vec![1.0]];
        let r = exponential_form_check(&m, &[vec![-0.5, 0.0]], Some(&few), EXPONENTIAL_FORM_TOLERANCE);
        assert!(!r.is_exponential_form);
        assert_eq!(probe_points(&m, &[-0.5, 0.0]).len(), 9);
    }
}
