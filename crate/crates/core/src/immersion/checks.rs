use ndarray::{Array2, Array3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Hypersurface, ImmersionData, Transversal};
use crate::error::{Error, Result};
use crate::infogeo::{
    codazzi_check, riemann_from, ricci_from, ConnectionField, MetricField, Provenance,
};
use crate::numerics::{determinant, DiffScheme};

/// Threshold for the structural identities and the classification flags.
pub const IMMERSION_TOLERANCE: f64 = 1e-6;

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralResiduals {
    pub gauss: f64,
    pub codazzi_h: f64,
    pub codazzi_s: f64,
    pub ricci: f64,
    /// `max |Ric − (n−1)h|`, for centro-affine transversals only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centro_affine_ricci: Option<f64>,
}

impl StructuralResiduals {
    pub fn max(&self) -> f64 {
        [self.gauss, self.codazzi_h, self.codazzi_s, self.ricci, self.centro_affine_ricci.unwrap_or(0.0)]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn is_centro_affine_at(surface: &Hypersurface, u: &[f64]) -> Result<bool> {
    if matches!(surface.transversal(), Transversal::CentroAffine) {
        return Ok(true);
    }
    let f = surface.position(u)?;
    let xi = surface.xi(u)?;
    let ff: f64 = f.iter().map(|v| v * v).sum();
    let fx: f64 = f.iter().zip(&xi).map(|(a, b)| a * b).sum();
    if ff == 0.0 || fx >= 0.0 {
        return Ok(false);
    }
    let c = fx / ff;
    let off = xi.iter().zip(&f).map(|(x, p)| (x - c * p).abs()).fold(0.0, f64::max);
    let scale = xi.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(off <= IMMERSION_TOLERANCE * scale.max(1.0))
}

/// Residuals of the Gauss, Codazzi (h and S) and Ricci equations at `u`.
pub fn structural_check(surface: &Hypersurface, u: &[f64]) -> Result<StructuralResiduals> {
    let n = surface.dim();
    let (d, dd) = surface.decompose_derivative(u)?;
    let g = &d.gamma;
    let dgamma: Vec<Array3<f64>> = dd.iter().map(|p| p.gamma.clone()).collect();
    let r = riemann_from(g, &dgamma);
    let s = &d.shape;
    let h = &d.h;
    let a = &d.alpha;

    let mut gauss = 0.0f64;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let want = h[[j, k]] * s[[l, i]] - h[[i, k]] * s[[l, j]];
                    gauss = gauss.max((r[[l, i, j, k]] - want).abs());
                }
            }
        }
    }

    // (∇_i h)_jk + α_i h_jk
    let ch = |i: usize, j: usize, k: usize| {
        let mut v = dd[i].h[[j, k]] + a[i] * h[[j, k]];
        for m in 0..n {
            v -= g[[i, j, m]] * h[[m, k]] + g[[i, k, m]] * h[[j, m]];
        }
        v
    };
    // (∇_i S)^l_j − α_i S^l_j
    let cs = |i: usize, j: usize, l: usize| {
        let mut v = dd[i].shape[[l, j]] - a[i] * s[[l, j]];
        for m in 0..n {
            v += g[[i, m, l]] * s[[m, j]] - g[[i, j, m]] * s[[l, m]];
        }
        v
    };
    let (mut codazzi_h, mut codazzi_s, mut ricci) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                codazzi_h = codazzi_h.max((ch(i, j, k) - ch(j, i, k)).abs());
                codazzi_s = codazzi_s.max((cs(i, j, k) - cs(j, i, k)).abs());
            }
            let mut lhs = 0.0;
            for m in 0..n {
                lhs += h[[i, m]] * s[[m, j]] - h[[m, j]] * s[[m, i]];
            }
            let d_alpha = dd[i].alpha[j] - dd[j].alpha[i];
            ricci = ricci.max((lhs - d_alpha).abs());
        }
    }
    let centro_affine_ricci = if is_centro_affine_at(surface, u)? {
        let ric = ricci_from(&r);
        Some(max_abs((&ric - &(h * (n as f64 - 1.0))).iter()))
    } else {
        None
    };
    Ok(StructuralResiduals {
        gauss,
        codazzi_h,
        codazzi_s,
        ricci,
        centro_affine_ricci,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeCheck {
    /// `max_i |∂_iη − Γ^m_im η − α_i η|`.
    pub covariant_residual: f64,
    /// `|η| − √|det h|`.
    pub gap: f64,
    pub eta: f64,
    pub det_h: f64,
}

/// `∇η = α⊗η` in coordinates and the gap between `η` and the volume of `h`.
pub fn induced_volume_check(surface: &Hypersurface, u: &[f64]) -> Result<VolumeCheck> {
    let n = surface.dim();
    let (d, dd) = surface.decompose_derivative(u)?;
    let mut covariant_residual = 0.0f64;
    for i in 0..n {
        let trace: f64 = (0..n).map(|m| d.gamma[[i, m, m]]).sum();
        let v = dd[i].eta - trace * d.eta - d.alpha[i] * d.eta;
        covariant_residual = covariant_residual.max(v.abs());
    }
    let det_h = determinant(&d.h);
    if det_h.abs() <= IMMERSION_TOLERANCE {
        return Err(Error::DegenerateH { det: det_h });
    }
    Ok(VolumeCheck {
        covariant_residual,
        gap: d.eta.abs() - det_h.abs().sqrt(),
        eta: d.eta,
        det_h,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionFlags {
    pub centro_affine: bool,
    pub equiaffine: bool,
    pub nondegenerate: bool,
    pub blaschke: bool,
    pub improper_hypersphere: bool,
    pub proper_hypersphere: bool,
    /// Grid mean of `tr(S)/n`.
    pub lambda: f64,
    /// `max |S − λI|` over the grid.
    pub lambda_deviation: f64,
    pub max_alpha: f64,
    pub min_abs_det_h: f64,
    pub max_volume_gap: f64,
    pub max_shape: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

struct PointFlags {
    centro: bool,
    data: ImmersionData,
    gap: Option<f64>,
}

/// Thresholded classification over a grid. Any failing point clears the
/// affected flags; errors are collected, not raised.
pub fn classify(surface: &Hypersurface, grid: &[Vec<f64>]) -> ImmersionFlags {
    let tol = IMMERSION_TOLERANCE;
    let n = surface.dim();
    let results: Vec<Result<PointFlags>> = grid
        .par_iter()
        .map(|u| {
            let data = surface.decompose(u)?;
            let centro = is_centro_affine_at(surface, u)?;
            let gap = match induced_volume_check(surface, u) {
                Ok(v) => Some(v.gap.abs()),
                Err(Error::DegenerateH { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(PointFlags { centro, data, gap })
        })
        .collect();
    let mut errors = Vec::new();
    let mut pts = Vec::new();
    for (u, r) in grid.iter().zip(results) {
        match r {
            Ok(p) => pts.push(p),
            Err(e) => errors.push(format!("{u:?}: {e}")),
        }
    }
    let ok = errors.is_empty() && !pts.is_empty();
    let max_alpha = pts.iter().map(|p| max_abs(&p.data.alpha)).fold(0.0, f64::max);
    let min_abs_det_h = pts
        .iter()
        .map(|p| determinant(&p.data.h).abs())
        .fold(f64::INFINITY, f64::min);
    let max_shape = pts.iter().map(|p| max_abs(p.data.shape.iter())).fold(0.0, f64::max);
    let max_volume_gap = pts
        .iter()
        .map(|p| p.gap.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let lambda = if pts.is_empty() {
        0.0
    } else {
        pts.iter()
            .map(|p| p.data.shape.diag().sum() / n as f64)
            .sum::<f64>()
            / pts.len() as f64
    };
    let eye = Array2::<f64>::eye(n) * lambda;
    let lambda_deviation = pts
        .iter()
        .map(|p| max_abs((&p.data.shape - &eye).iter()))
        .fold(0.0, f64::max);

    let equiaffine = ok && max_alpha < tol;
    let nondegenerate = ok && min_abs_det_h > tol;
    let improper = ok && max_shape < tol;
    ImmersionFlags {
        centro_affine: ok && pts.iter().all(|p| p.centro),
        equiaffine,
        nondegenerate,
        blaschke: equiaffine && nondegenerate && max_volume_gap < tol,
        improper_hypersphere: improper,
        proper_hypersphere: ok && !improper && lambda.abs() > tol && lambda_deviation < tol,
        lambda,
        lambda_deviation,
        max_alpha,
        min_abs_det_h,
        max_volume_gap,
        max_shape,
        tolerance: tol,
        errors,
    }
}

/// Induced `(h, ∇)` as infogeo fields.
pub fn induced_fields(surface: &Hypersurface) -> (MetricField, ConnectionField) {
    let (s1, s2) = (surface.clone(), surface.clone());
    let h = MetricField::new(surface.dim(), surface.domain().clone(), IMMERSION_TOLERANCE, move |u| {
        Ok(s1.decompose(u)?.h)
    });
    let conn = ConnectionField::from_upper(surface.dim(), surface.domain().clone(), Provenance::Induced, move |u| {
        Ok(s2.decompose(u)?.gamma)
    })
    .with_metric(h.clone());
    (h, conn)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructurePoint {
    pub u: Vec<f64>,
    pub codazzi_residual: f64,
    pub det_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticalStructure {
    pub points: Vec<StructurePoint>,
    pub max_codazzi_residual: f64,
    pub tolerance: f64,
    pub is_statistical: bool,
}

/// Codazzi test of the induced `(∇, h)` on `grid`.
pub fn statistical_structure(surface: &Hypersurface, grid: &[Vec<f64>], tolerance: f64) -> Result<StatisticalStructure> {
    let (h, conn) = induced_fields(surface);
    let scheme = DiffScheme::nested();
    let points = grid
        .par_iter()
        .map(|u| {
            let det_h = determinant(&h.at(u)?);
            if det_h.abs() <= IMMERSION_TOLERANCE {
                return Err(Error::DegenerateH { det: det_h });
            }
            Ok(StructurePoint {
                u: u.clone(),
                codazzi_residual: codazzi_check(&h, &conn, u, &scheme)?,
                det_h,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_codazzi_residual = points.iter().map(|p| p.codazzi_residual).fold(0.0, f64::max);
    Ok(StatisticalStructure {
        is_statistical: !points.is_empty() && max_codazzi_residual < tolerance,
        points,
        max_codazzi_residual,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::{paraboloid, plane, sphere, tilted_paraboloid};
    use std::sync::Arc;

    fn grid(w: f64, k: usize) -> Vec<Vec<f64>> {
        let pts: Vec<f64> = (0..k).map(|i| -w + 2.0 * w * i as f64 / (k - 1) as f64).collect();
        pts.iter().flat_map(|a| pts.iter().map(move |b| vec![*a, *b])).collect()
    }

    #[test]
    fn sphere_structural_equations() {
        let s = sphere(1.0);
        for u in [[0.0, 0.0], [0.3, -0.4]] {
            let r = structural_check(&s, &u).unwrap();
            assert!(r.max() < 1e-6, "{r:?}");
            assert!(r.centro_affine_ricci.unwrap() < 1e-6);
        }
    }

    #[test]
    fn paraboloid_structural_equations() {
        let r = structural_check(&paraboloid(), &[0.5, -0.5]).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
        assert!(r.centro_affine_ricci.is_none());
    }

    #[test]
    fn structural_equations_hold_for_a_non_equiaffine_field() {
        // ξ = e₃ + 0.3 u₂ e₁ has dα ≠ 0
        let s = Hypersurface::new(
            "twisted",
            2,
            crate::numerics::Domain::open_box(vec![-1.0; 2], vec![1.0; 2]),
            |u| vec![u[0], u[1], 0.5 * (u[0] * u[0] + u[1] * u[1])],
            Transversal::Field(Arc::new(|u| vec![0.3 * u[1], 0.0, 1.0])),
        )
        .unwrap();
        let (_, dd) = s.decompose_derivative(&[0.4, 0.2]).unwrap();
        assert!((dd[0].alpha[1] - dd[1].alpha[0]).abs() > 0.1);
        let r = structural_check(&s, &[0.4, 0.2]).unwrap();
        assert!(r.max() < 1e-6, "{r:?}");
    }

    #[test]
    fn volume_checks() {
        let v = induced_volume_check(&paraboloid(), &[0.1, 0.3]).unwrap();
        assert!(v.gap.abs() < 1e-9 && v.covariant_residual < 1e-8);
        let v = induced_volume_check(&sphere(1.0), &[0.2, 0.1]).unwrap();
        assert!(v.gap.abs() < 1e-8 && v.covariant_residual < 1e-6, "{v:?}");
        let v = induced_volume_check(&sphere(2.0), &[0.2, 0.1]).unwrap();
        assert!(v.gap.abs() > 0.1);
        assert!(matches!(induced_volume_check(&plane(), &[0.0, 0.0]), Err(Error::DegenerateH { .. })));
    }

    #[test]
    fn classify_catalog() {
        let f = classify(&sphere(1.0), &grid(0.5, 3));
        assert!(f.centro_affine && f.equiaffine && f.nondegenerate && f.blaschke && f.proper_hypersphere, "{f:?}");
        assert!(!f.improper_hypersphere);
        assert!((f.lambda - 1.0).abs() < 1e-6);
        let f = classify(&paraboloid(), &grid(0.5, 3));
        assert!(f.blaschke && f.improper_hypersphere && !f.proper_hypersphere && !f.centro_affine);
        let f = classify(&plane(), &grid(0.5, 3));
        assert!(f.centro_affine && !f.nondegenerate && !f.blaschke);
    }

    #[test]
    fn classify_ignores_grid_order() {
        let mut g = grid(0.4, 3);
        let a = classify(&sphere(1.0), &g);
        g.reverse();
        assert_eq!(a, classify(&sphere(1.0), &g));
    }

    #[test]
    fn statistical_structures() {
        let g = grid(0.4, 3);
        assert!(statistical_structure(&sphere(1.0), &g, 1e-5).unwrap().is_statistical);
        assert!(statistical_structure(&paraboloid(), &g, 1e-5).unwrap().is_statistical);
        let t = statistical_structure(&tilted_paraboloid(0.3), &g, 1e-5).unwrap();
        assert!(!t.is_statistical && t.max_codazzi_residual > 1e-2, "{t:?}");
        assert!(matches!(statistical_structure(&plane(), &g, 1e-5), Err(Error::DegenerateH { .. })));
    }
}
