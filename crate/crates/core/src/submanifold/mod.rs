//! Submanifolds of a statistical manifold: embedding curvature,
//! autoparallelism, natural-form tests and coordinate slices.

mod expform;
mod schema;
mod slice;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Array3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infogeo::{ConnectionField, MetricField};
use crate::models::StatisticalModel;
use crate::numerics::{self, DiffScheme, Domain};

pub use expform::{exponential_form_check, probe_points, ExponentialFormReport, EXPONENTIAL_FORM_TOLERANCE, MIN_PROBES};
pub use schema::{load_embedding, EmbeddingDoc};
pub use slice::{slice, Slice};

pub const AUTOPARALLEL_TOLERANCE: f64 = 1e-5;

pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// `u ↦ θ(u)` from `U ⊂ R^m` into the ambient parameter space.
#[derive(Clone)]
pub struct SubmanifoldEmbedding {
    label: String,
    ambient: StatisticalModel,
    m: usize,
    domain: Domain,
    map: MapFn,
}

impl fmt::Debug for SubmanifoldEmbedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubmanifoldEmbedding")
            .field("label", &self.label)
            .field("ambient", &self.ambient.label())
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

/// `H_abk` in a g-orthonormal frame of the normal space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCurvature {
    pub u: Vec<f64>,
    /// Shape `(m, m, n − m)`.
    pub h: Array3<f64>,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoparallelReport {
    pub autoparallel: bool,
    pub max_h: f64,
    pub tolerance: f64,
    pub points: Vec<EmbeddingCurvature>,
    pub errors: Vec<(Vec<f64>, String)>,
}

impl SubmanifoldEmbedding {
    pub fn new(
        label: impl Into<String>,
        ambient: StatisticalModel,
        domain: Domain,
        map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let m = domain.dim();
        if m == 0 || m > ambient.dim() {
            return Err(Error::InvalidConfig(format!(
                "submanifold dimension {m} must lie in 1..={}",
                ambient.dim()
            )));
        }
        Ok(SubmanifoldEmbedding {
            label: label.into(),
            ambient,
            m,
            domain,
            map: Arc::new(map),
        })
    }

    /// The whole ambient space, embedded by the identity.
    pub fn identity(ambient: StatisticalModel) -> Self {
        let domain = ambient.domain().clone();
        SubmanifoldEmbedding::new(format!("{}-identity", ambient.label()), ambient, domain, |u| u.to_vec())
            .expect("identity dimensions agree")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ambient(&self) -> &StatisticalModel {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn theta(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: u.len(),
            });
        }
        if !self.domain.contains(u) {
            return Err(Error::OutOfDomain { point: u.to_vec() });
        }
        let t = (self.map)(u);
        if t.len() != self.ambient.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient.dim(),
                got: t.len(),
            });
        }
        Ok(t)
    }

    fn raw(&self, u: &[f64]) -> Result<Vec<f64>> {
        let t = (self.map)(u);
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::non_finite("embedding map"));
        }
        Ok(t)
    }

    /// `B[[i, a]] = ∂θ^i/∂u_a`.
    pub fn jacobian(&self, u: &[f64]) -> Result<Array2<f64>> {
        self.theta(u)?;
        let cols = numerics::jacobian_vec(|v| self.raw(v), u, &DiffScheme::new(1, 2), Some(&self.domain))?;
        Ok(Array2::from_shape_fn((self.ambient.dim(), self.m), |(i, a)| cols[a][i]))
    }

    /// The ambient model pulled back to `u` coordinates.
    pub fn model(&self) -> Result<StatisticalModel> {
        let map = self.map.clone();
        self.ambient
            .compose(self.label.clone(), self.m, self.domain.clone(), move |u| map(u))
    }
}

fn g_inner(g: &Array2<f64>, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[[i, j]] * a[i] * b[j];
        }
    }
    s
}

/// Orthonormal basis of the g-orthogonal complement of the columns of `b`,
/// by Gram–Schmidt over `{B_a} ∪ {e_i}` in index order.
fn normal_frame(g: &Array2<f64>, b: &Array2<f64>) -> Vec<Vec<f64>> {
    let (n, m) = b.dim();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n - m);
    let candidates = (0..m)
        .map(|a| b.column(a).to_vec())
        .chain((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>()));
    for (idx, mut v) in candidates.enumerate() {
        if basis.len() == n {
            break;
        }
        let scale = g_inner(g, &v, &v).sqrt();
        // two passes keep the frame orthogonal to round-off
        for _ in 0..2 {
            for e in &basis {
                let c = g_inner(g, &v, e);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= c * ei;
                }
            }
        }
        let norm = g_inner(g, &v, &v).sqrt();
        if norm <= 1e-8 * scale.max(f64::MIN_POSITIVE) {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        if idx >= m {
            normals.push(v.clone());
        }
        basis.push(v);
    }
    normals
}

/// `H_abk = g(∂_a∂_bθ + Γ^k_ij B^i_a B^j_b, N_k)`.
pub fn embedding_curvature(
    emb: &SubmanifoldEmbedding,
    conn: &ConnectionField,
    metric: &MetricField,
    u: &[f64],
) -> Result<EmbeddingCurvature> {
    let theta = emb.theta(u)?;
    let (n, m) = (emb.ambient.dim(), emb.m);
    let b = emb.jacobian(u)?;
    let rank = numerics::rank(&b, 1e-8);
    if rank < m {
        return Err(Error::RankDeficientB { rank, expected: m });
    }
    let gamma = conn.upper(&theta)?;
    let g = metric.at(&theta)?;
    let normals = normal_frame(&g, &b);
    let second = DiffScheme::new(2, 2);
    let mut h = Array3::zeros((m, m, normals.len()));
    for a in 0..m {
        for c in a..m {
            let mut v = numerics::derive_vec(|w| emb.raw(w), u, &[a, c], &second, Some(&emb.domain))?;
            for (k, vk) in v.iter_mut().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        *vk += gamma[[i, j, k]] * b[[i, a]] * b[[j, c]];
                    }
                }
            }
            for (kk, nk) in normals.iter().enumerate() {
                let val = g_inner(&g, &v, nk);
                h[[a, c, kk]] = val;
                h[[c, a, kk]] = val;
            }
        }
    }
    let max_abs = h.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(EmbeddingCurvature {
        u: u.to_vec(),
        h,
        max_abs,
    })
}

/// Autoparallel iff `max |H| < tolerance` everywhere on the grid. The Fisher
/// metric of the ambient is used when `conn` carries no metric.
pub fn autoparallel_check(
    emb: &SubmanifoldEmbedding,
    conn: &ConnectionField,
    grid: &[Vec<f64>],
    tolerance: f64,
) -> AutoparallelReport {
    let metric = conn
        .metric()
        .cloned()
        .unwrap_or_else(|| MetricField::fisher(&emb.ambient));
    let results: Vec<_> = grid
        .par_iter()
        .map(|u| (u, embedding_curvature(emb, conn, &metric, u)))
        .collect();
    let mut points = Vec::new();
    let mut errors = Vec::new();
    for (u, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => errors.push((u.clone(), e.to_string())),
        }
    }
    let max_h = points.iter().fold(0.0f64, |a, p| a.max(p.max_abs));
    AutoparallelReport {
        autoparallel: errors.is_empty() && !points.is_empty() && max_h < tolerance,
        max_h,
        tolerance,
        points,
        errors,
    }
}
