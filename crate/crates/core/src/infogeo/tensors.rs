use std::sync::Arc;

use ndarray::{Array1, Array2, Array3, Array4};
use serde::{Deserialize, Serialize};

use super::fields::{ConnectionField, MetricField, Provenance};
use crate::error::{Error, Result};
use crate::numerics::{self, invert_metric, DiffScheme};

fn check_shape(gamma: &Array3<f64>, g: &Array2<f64>) -> Result<usize> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.ncols() });
    }
    let (a, b, c) = gamma.dim();
    if a != n || b != n || c != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.max(b).max(c) });
    }
    Ok(n)
}

/// `Γ^k_ij = g^{km} Γ_ij,m`.
pub fn raise_connection(lower: &Array3<f64>, g: &Array2<f64>) -> Result<Array3<f64>> {
    let n = check_shape(lower, g)?;
    let ginv = invert_metric(g)?;
    Ok(Array3::from_shape_fn((n, n, n), |(i, j, k)| {
        (0..n).map(|m| ginv[[k, m]] * lower[[i, j, m]]).sum()
    }))
}

/// `Γ_ij,k = Γ^m_ij g_mk`.
pub fn lower_connection(upper: &Array3<f64>, g: &Array2<f64>) -> Result<Array3<f64>> {
    let n = check_shape(upper, g)?;
    invert_metric(g)?;
    Ok(Array3::from_shape_fn((n, n, n), |(i, j, k)| {
        (0..n).map(|m| upper[[i, j, m]] * g[[m, k]]).sum()
    }))
}

/// Curvature data of a connection at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePack {
    /// `Γ^k_ij` as `[[i, j, k]]`.
    pub connection: Array3<f64>,
    /// `R^l_ijk` as `[[l, i, j, k]]`.
    pub riemann: Array4<f64>,
    /// `T^k_ij` as `[[i, j, k]]`.
    pub torsion: Array3<f64>,
    /// `Ric_jk = R^i_ijk`.
    pub ricci: Array2<f64>,
    /// `(∇_i h)_jk` as `[[i, j, k]]`, when the connection carries a metric.
    pub nabla_h: Option<Array3<f64>>,
}

impl CurvaturePack {
    pub fn max_riemann(&self) -> f64 {
        max_abs(self.riemann.iter())
    }

    pub fn max_torsion(&self) -> f64 {
        max_abs(self.torsion.iter())
    }
}

pub(crate) fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `R^l_ijk` from `Γ^k_ij` and its derivatives `dgamma[i][[j, k, l]] = ∂_iΓ^l_jk`.
pub fn riemann_from(gamma: &Array3<f64>, dgamma: &[Array3<f64>]) -> Array4<f64> {
    let n = gamma.dim().0;
    Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
        let mut v = dgamma[i][[j, k, l]] - dgamma[j][[i, k, l]];
        for m in 0..n {
            v += gamma[[i, m, l]] * gamma[[j, k, m]] - gamma[[j, m, l]] * gamma[[i, k, m]];
        }
        v
    })
}

pub fn torsion_from(gamma: &Array3<f64>) -> Array3<f64> {
    let n = gamma.dim().0;
    Array3::from_shape_fn((n, n, n), |(i, j, k)| gamma[[i, j, k]] - gamma[[j, i, k]])
}

pub fn ricci_from(riemann: &Array4<f64>) -> Array2<f64> {
    let n = riemann.dim().0;
    Array2::from_shape_fn((n, n), |(j, k)| (0..n).map(|i| riemann[[i, i, j, k]]).sum())
}

/// `(∇_i h)_jk = ∂_i h_jk − Γ^m_ij h_mk − Γ^m_ik h_jm`.
pub fn nabla_h_from(gamma: &Array3<f64>, h: &Array2<f64>, dh: &Array3<f64>) -> Array3<f64> {
    let n = gamma.dim().0;
    Array3::from_shape_fn((n, n, n), |(i, j, k)| {
        let mut v = dh[[i, j, k]];
        for m in 0..n {
            v -= gamma[[i, j, m]] * h[[m, k]] + gamma[[i, k, m]] * h[[j, m]];
        }
        v
    })
}

/// `max |(∇_i h)_jk − (∇_k h)_ji|`.
pub fn codazzi_residual(nabla_h: &Array3<f64>) -> f64 {
    let n = nabla_h.dim().0;
    let mut r = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                r = r.max((nabla_h[[i, j, k]] - nabla_h[[k, j, i]]).abs());
            }
        }
    }
    r
}

/// Riemann, torsion, Ricci and (if a metric is attached) `∇h` at `theta`.
pub fn curvature(conn: &ConnectionField, theta: &[f64], scheme: &DiffScheme) -> Result<CurvaturePack> {
    let gamma = conn.upper(theta)?;
    let dgamma = conn.upper_derivative(theta, scheme)?;
    let riemann = riemann_from(&gamma, &dgamma);
    let nabla_h = match conn.metric() {
        Some(g) => Some(nabla_h_from(&gamma, &g.at(theta)?, &g.derivative(theta, scheme)?)),
        None => None,
    };
    Ok(CurvaturePack {
        torsion: torsion_from(&gamma),
        ricci: ricci_from(&riemann),
        riemann,
        connection: gamma,
        nabla_h,
    })
}

/// `Γ̄_ik,j = ∂_i g_jk − Γ_ij,k`, returned as `[[i, k, j]]` like any lower array.
pub fn conjugate_lower(lower: &Array3<f64>, dg: &Array3<f64>) -> Array3<f64> {
    let n = lower.dim().0;
    Array3::from_shape_fn((n, n, n), |(i, k, j)| dg[[i, j, k]] - lower[[i, j, k]])
}

/// Conjugate connection coefficients at `theta`.
pub fn conjugate_connection(
    g: &MetricField,
    conn: &ConnectionField,
    theta: &[f64],
    scheme: &DiffScheme,
) -> Result<Array3<f64>> {
    let lower = conn.clone().with_metric(g.clone()).lower(theta)?;
    let dg = g.derivative(theta, scheme)?;
    Ok(conjugate_lower(&lower, &dg))
}

/// The conjugate connection as a field, paired with the same metric.
pub fn conjugate_field(g: &MetricField, conn: &ConnectionField, scheme: DiffScheme) -> ConnectionField {
    let (g2, c2) = (g.clone(), conn.clone());
    ConnectionField::from_lower(g.clone(), Provenance::Conjugate, move |t| {
        conjugate_connection(&g2, &c2, t, &scheme)
    })
}

/// Codazzi residual `max |(∇_i h)_jk − (∇_k h)_ji|` of `(g, Γ)` at `theta`.
pub fn codazzi_check(g: &MetricField, conn: &ConnectionField, theta: &[f64], scheme: &DiffScheme) -> Result<f64> {
    let gamma = conn.upper(theta)?;
    let nh = nabla_h_from(&gamma, &g.at(theta)?, &g.derivative(theta, scheme)?);
    Ok(codazzi_residual(&nh))
}

/// `h(R(∂_i,∂_j)∂_k, ∂_m) + h(∂_k, R̄(∂_i,∂_j)∂_m)`, max entry.
pub fn curvature_duality_residual(g: &Array2<f64>, r: &Array4<f64>, r_bar: &Array4<f64>) -> f64 {
    let n = g.nrows();
    let mut out = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for m in 0..n {
                    let mut a = 0.0;
                    for l in 0..n {
                        a += g[[l, m]] * r[[l, i, j, k]] + g[[k, l]] * r_bar[[l, i, j, m]];
                    }
                    out = out.max(a.abs());
                }
            }
        }
    }
    out
}

/// Pointwise (α)-conformal change: `g̃ = e^φ g` and
/// `Γ̃_ij,k = Γ_ij,k − (1+α)/2 ∂_kφ g_ij + (1−α)/2 (∂_iφ g̃_jk + ∂_jφ g̃_ik)`,
/// where `Γ̃_ij,k` is lowered with `g̃`.
pub fn conformal_at(
    g: &Array2<f64>,
    lower: &Array3<f64>,
    phi: f64,
    dphi: &[f64],
    alpha: f64,
) -> (Array2<f64>, Array3<f64>) {
    let n = g.nrows();
    let gt = g * phi.exp();
    let (a, b) = (0.5 * (1.0 + alpha), 0.5 * (1.0 - alpha));
    let lt = Array3::from_shape_fn((n, n, n), |(i, j, k)| {
        lower[[i, j, k]] - a * dphi[k] * g[[i, j]] + b * (dphi[i] * gt[[j, k]] + dphi[j] * gt[[i, k]])
    });
    (gt, lt)
}

/// Applies [`conformal_at`] pointwise, with `dφ` by finite differences.
pub fn conformal_transform(
    g: &MetricField,
    conn: &ConnectionField,
    phi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    alpha: f64,
) -> (MetricField, ConnectionField) {
    let phi: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = Arc::new(phi);
    let scheme = DiffScheme::new(1, 2);
    let (g1, p1) = (g.clone(), phi.clone());
    let gt = MetricField::new(g.dim(), g.domain().clone(), g.tolerance(), move |t| {
        Ok(g1.at(t)? * p1(t).exp())
    });
    let (g2, c2, p2) = (g.clone(), conn.clone().with_metric(g.clone()), phi);
    let domain = g.domain().clone();
    let ct = ConnectionField::from_lower(gt.clone(), Provenance::Conformal { alpha }, move |t| {
        let dphi = numerics::gradient(|x| p2(x), t, &scheme, Some(&domain))?;
        Ok(conformal_at(&g2.at(t)?, &c2.lower(t)?, p2(t), &dphi, alpha).1)
    });
    (gt, ct)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveReport {
    pub equivalent: bool,
    pub rho: Vec<f64>,
    /// `max |D^k_ij − ρ_iδ^k_j − ρ_jδ^k_i|`.
    pub residual: f64,
    pub tolerance: f64,
}

/// Tests `Γ' = Γ + ρ⊗δ + δ⊗ρ` with `ρ_i = D^m_im/(n+1)`, `D = Γ' − Γ`.
pub fn projective_equivalence(upper: &Array3<f64>, other: &Array3<f64>, tolerance: f64) -> Result<ProjectiveReport> {
    if upper.dim() != other.dim() {
        return Err(Error::DimensionMismatch {
            expected: upper.dim().0,
            got: other.dim().0,
        });
    }
    let n = upper.dim().0;
    let d = other - upper;
    let rho: Array1<f64> = Array1::from_shape_fn(n, |i| (0..n).map(|m| d[[i, m, m]]).sum::<f64>() / (n + 1) as f64);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let want = rho[i] * delta(k, j) + rho[j] * delta(k, i);
                residual = residual.max((d[[i, j, k]] - want).abs());
            }
        }
    }
    Ok(ProjectiveReport {
        equivalent: residual < tolerance,
        rho: rho.to_vec(),
        residual,
        tolerance,
    })
}

/// `Γ + ρ⊗δ + δ⊗ρ`.
pub fn projective_change(upper: &Array3<f64>, rho: &[f64]) -> Array3<f64> {
    let n = upper.dim().0;
    Array3::from_shape_fn((n, n, n), |(i, j, k)| {
        let mut v = upper[[i, j, k]];
        if k == j {
            v += rho[i];
        }
        if k == i {
            v += rho[j];
        }
        v
    })
}
