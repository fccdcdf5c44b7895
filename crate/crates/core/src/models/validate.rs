use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::StatisticalModel;
use crate::numerics::{condition_number, DEFAULT_CONDITION_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointValidation {
    pub theta: Vec<f64>,
    /// `|E_θ[1] − 1|`.
    pub normalization_residual: f64,
    /// `max_i |E_θ[∂_i ℓ]|`.
    pub score_mean: f64,
    /// Condition number of the score Gram matrix `E[∂_iℓ ∂_jℓ]`.
    pub gram_condition: f64,
    /// All log-densities and scores evaluated to finite values.
    pub finite: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub label: String,
    pub tolerance: f64,
    pub points: Vec<PointValidation>,
    pub max_normalization_residual: f64,
    pub max_score_mean: f64,
    pub scores_independent: bool,
    pub pass: bool,
}

fn check_point(model: &StatisticalModel, theta: &[f64]) -> PointValidation {
    let n = model.dim();
    let moments = model.expect_vec(theta, |x| {
        let jet = model.score_jet(x, theta)?;
        let mut out = Vec::with_capacity(1 + n + n * n);
        out.push(1.0);
        out.extend_from_slice(&jet.score);
        for i in 0..n {
            for j in 0..n {
                out.push(jet.score[i] * jet.score[j]);
            }
        }
        Ok(out)
    });
    match moments {
        Ok(m) => {
            let gram = Array2::from_shape_fn((n, n), |(i, j)| m[1 + n + i * n + j]);
            PointValidation {
                theta: theta.to_vec(),
                normalization_residual: (m[0] - 1.0).abs(),
                score_mean: m[1..=n].iter().fold(0.0, |a, v| a.max(v.abs())),
                gram_condition: condition_number(&gram),
                finite: true,
                error: None,
            }
        }
        Err(e) => PointValidation {
            theta: theta.to_vec(),
            normalization_residual: f64::INFINITY,
            score_mean: f64::INFINITY,
            gram_condition: f64::INFINITY,
            finite: false,
            error: Some(e.to_string()),
        },
    }
}

/// Numeric sanity checks of the regularity conditions on a parameter grid:
/// normalization, centered scores, and linearly independent scores.
pub fn validate_model(model: &StatisticalModel, grid: &[Vec<f64>]) -> ValidationReport {
    let tolerance = model.tolerance();
    let points: Vec<PointValidation> = grid.iter().map(|t| check_point(model, t)).collect();
    let max_normalization_residual = points.iter().fold(0.0f64, |a, p| a.max(p.normalization_residual));
    let max_score_mean = points.iter().fold(0.0f64, |a, p| a.max(p.score_mean));
    let scores_independent = points.iter().all(|p| p.gram_condition < DEFAULT_CONDITION_CAP);
    let pass = !points.is_empty()
        && points.iter().all(|p| p.finite)
        && max_normalization_residual < tolerance
        && scores_independent;
    ValidationReport {
        label: model.label().to_string(),
        tolerance,
        points,
        max_normalization_residual,
        max_score_mean,
        scores_independent,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{builtin, builtin_names, reference_grid};
    use crate::numerics::{Domain, ExpectationRule, Placement, SampleSpace};

    #[test]
    fn normal_passes() {
        let r = validate_model(&builtin("normal").unwrap(), &[vec![0.0, 1.0], vec![1.0, 2.0]]);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn bernoulli_has_zero_residual() {
        let r = validate_model(&builtin("bernoulli-natural").unwrap(), &[vec![-2.0], vec![0.0], vec![2.0]]);
        assert!(r.pass);
        assert!(r.max_normalization_residual < 1e-15);
        assert!(r.max_score_mean < 1e-9);
    }

    #[test]
    fn unnormalized_density_fails() {
        let space = SampleSpace::real_line(ExpectationRule::GaussHermite { nodes: 32 }).unwrap();
        let m = StatisticalModel::new("unnormalized", 1, space, Domain::unbounded(1), |x, _t| -x[0] * x[0])
            .unwrap()
            .with_placement(|_| vec![Placement { center: 0.0, scale: 0.5f64.sqrt() }]);
        let r = validate_model(&m, &[vec![0.0]]);
        assert!(!r.pass);
        let expected = (std::f64::consts::PI.sqrt() - 1.0).abs();
        assert!((r.max_normalization_residual - expected).abs() < 1e-10);
    }

    #[test]
    fn whole_catalog_validates() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            let r = validate_model(&m, &reference_grid(name));
            assert!(r.pass, "{name}: {r:?}");
            assert!(r.max_score_mean < m.tolerance(), "{name}: score mean {}", r.max_score_mean);
        }
    }
}
