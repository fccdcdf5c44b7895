use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fields::alpha_field;
use super::tensors::{curvature, max_abs};
use crate::models::StatisticalModel;
use crate::numerics::DiffScheme;

/// Residual tolerance for quantities built from two stacked differentiations.
pub const CURVATURE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessPoint {
    pub theta: Vec<f64>,
    pub max_r: f64,
    pub max_t: f64,
    pub max_gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub alpha: f64,
    pub flat: bool,
    pub max_r: f64,
    pub max_t: f64,
    /// Largest connection coefficient seen, `max |Γ^k_ij|`.
    pub max_gamma: f64,
    pub tolerance: f64,
    pub points: Vec<FlatnessPoint>,
}

/// `flat` iff `max |R|` and `max |T|` stay below the tolerance everywhere on `grid`.
pub fn flatness_check(model: &StatisticalModel, grid: &[Vec<f64>], alpha: f64) -> FlatnessReport {
    flatness_check_with(model, grid, alpha, CURVATURE_TOLERANCE, &DiffScheme::nested())
}

pub fn flatness_check_with(
    model: &StatisticalModel,
    grid: &[Vec<f64>],
    alpha: f64,
    tolerance: f64,
    scheme: &DiffScheme,
) -> FlatnessReport {
    let conn = alpha_field(model, alpha);
    let points: Vec<FlatnessPoint> = grid
        .par_iter()
        .map(|t| match curvature(&conn, t, scheme) {
            Ok(p) => FlatnessPoint {
                theta: t.clone(),
                max_r: p.max_riemann(),
                max_t: p.max_torsion(),
                max_gamma: max_abs(p.connection.iter()),
                error: None,
            },
            Err(e) => FlatnessPoint {
                theta: t.clone(),
                max_r: f64::INFINITY,
                max_t: f64::INFINITY,
                max_gamma: f64::INFINITY,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let fold = |f: fn(&FlatnessPoint) -> f64| points.iter().map(f).fold(0.0f64, f64::max);
    let (max_r, max_t, max_gamma) = (fold(|p| p.max_r), fold(|p| p.max_t), fold(|p| p.max_gamma));
    FlatnessReport {
        alpha,
        flat: !points.is_empty() && max_r < tolerance && max_t < tolerance,
        max_r,
        max_t,
        max_gamma,
        tolerance,
        points,
    }
}
