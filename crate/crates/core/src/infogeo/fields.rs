use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use super::tensors::{lower_connection, raise_connection};
use crate::error::{Error, Result};
use crate::models::StatisticalModel;
use crate::numerics::{self, condition_number, DiffScheme, Domain, DEFAULT_CONDITION_CAP};

pub type TensorFn<T> = Arc<dyn Fn(&[f64]) -> Result<T> + Send + Sync>;

/// Symmetric (0,2)-tensor field, usually the Fisher metric.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    domain: Domain,
    tolerance: f64,
    eval: TensorFn<Array2<f64>>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("tolerance", &self.tolerance)
            .finish_non_exhaustive()
    }
}

impl MetricField {
    pub fn new(
        dim: usize,
        domain: Domain,
        tolerance: f64,
        eval: impl Fn(&[f64]) -> Result<Array2<f64>> + Send + Sync + 'static,
    ) -> Self {
        MetricField {
            dim,
            domain,
            tolerance,
            eval: Arc::new(eval),
        }
    }

    /// Fisher information of `model`.
    pub fn fisher(model: &StatisticalModel) -> Self {
        let m = model.clone();
        MetricField::new(model.dim(), model.domain().clone(), model.tolerance(), move |t| {
            fisher_metric(&m, t)
        })
    }

    /// The same matrix everywhere.
    pub fn constant(g: Array2<f64>, domain: Domain) -> Self {
        MetricField::new(g.nrows(), domain, 1e-12, move |_| Ok(g.clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn at(&self, theta: &[f64]) -> Result<Array2<f64>> {
        if !self.domain.contains(theta) {
            return Err(Error::OutOfDomain { point: theta.to_vec() });
        }
        (self.eval)(theta)
    }

    /// `dg[[i, j, k]] = ∂_i g_jk`.
    pub fn derivative(&self, theta: &[f64], scheme: &DiffScheme) -> Result<Array3<f64>> {
        let n = self.dim;
        let flat = |t: &[f64]| self.at(t).map(|g| g.iter().cloned().collect::<Vec<f64>>());
        let mut out = Array3::zeros((n, n, n));
        for i in 0..n {
            let d = numerics::derive_vec(flat, theta, &[i], scheme, Some(&self.domain))?;
            for j in 0..n {
                for k in 0..n {
                    out[[i, j, k]] = d[j * n + k];
                }
            }
        }
        Ok(out)
    }
}

/// Where a connection's coefficients come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Alpha { alpha: f64 },
    LeviCivita,
    Conjugate,
    Induced,
    Conformal { alpha: f64 },
    Custom { label: String },
}

/// Affine connection field. `upper` gives `Γ^k_ij` as `[[i, j, k]]`, `lower`
/// gives `Γ_ij,k` as `[[i, j, k]]` (needs a metric).
#[derive(Clone)]
pub struct ConnectionField {
    dim: usize,
    domain: Domain,
    provenance: Provenance,
    upper: TensorFn<Array3<f64>>,
    lower: Option<TensorFn<Array3<f64>>>,
    metric: Option<MetricField>,
}

impl fmt::Debug for ConnectionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConnectionField")
            .field("dim", &self.dim)
            .field("provenance", &self.provenance)
            .field("has_metric", &self.metric.is_some())
            .finish_non_exhaustive()
    }
}

impl ConnectionField {
    /// From upper-index coefficients.
    pub fn from_upper(
        dim: usize,
        domain: Domain,
        provenance: Provenance,
        upper: impl Fn(&[f64]) -> Result<Array3<f64>> + Send + Sync + 'static,
    ) -> Self {
        ConnectionField {
            dim,
            domain,
            provenance,
            upper: Arc::new(upper),
            lower: None,
            metric: None,
        }
    }

    /// From lower-index coefficients; the metric raises them.
    pub fn from_lower(
        metric: MetricField,
        provenance: Provenance,
        lower: impl Fn(&[f64]) -> Result<Array3<f64>> + Send + Sync + 'static,
    ) -> Self {
        let lower: TensorFn<Array3<f64>> = Arc::new(lower);
        let (l2, g2) = (lower.clone(), metric.clone());
        ConnectionField {
            dim: metric.dim(),
            domain: metric.domain().clone(),
            provenance,
            upper: Arc::new(move |t| raise_connection(&l2(t)?, &g2.at(t)?)),
            lower: Some(lower),
            metric: Some(metric),
        }
    }

    /// `Γ = 0` in these coordinates.
    pub fn zero(dim: usize, domain: Domain) -> Self {
        ConnectionField::from_upper(dim, domain, Provenance::Custom { label: "zero".into() }, move |_| {
            Ok(Array3::zeros((dim, dim, dim)))
        })
    }

    /// Attaches a metric so lower-index coefficients become available.
    pub fn with_metric(mut self, metric: MetricField) -> Self {
        self.lower = None;
        self.metric = Some(metric);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn metric(&self) -> Option<&MetricField> {
        self.metric.as_ref()
    }

    pub fn upper(&self, theta: &[f64]) -> Result<Array3<f64>> {
        if !self.domain.contains(theta) {
            return Err(Error::OutOfDomain { point: theta.to_vec() });
        }
        (self.upper)(theta)
    }

    pub fn lower(&self, theta: &[f64]) -> Result<Array3<f64>> {
        if !self.domain.contains(theta) {
            return Err(Error::OutOfDomain { point: theta.to_vec() });
        }
        match (&self.lower, &self.metric) {
            (Some(l), _) => l(theta),
            (None, Some(g)) => lower_connection(&(self.upper)(theta)?, &g.at(theta)?),
            (None, None) => Err(Error::InvalidConfig(
                "lower-index coefficients need a metric on the connection".into(),
            )),
        }
    }

    /// `Γ^k_ij` differentiated along each coordinate: `out[i][[j, k, l]] = ∂_i Γ^l_jk`.
    pub fn upper_derivative(&self, theta: &[f64], scheme: &DiffScheme) -> Result<Vec<Array3<f64>>> {
        let n = self.dim;
        let flat = |t: &[f64]| self.upper(t).map(|g| g.iter().cloned().collect::<Vec<f64>>());
        (0..n)
            .map(|i| {
                let d = numerics::derive_vec(flat, theta, &[i], scheme, Some(&self.domain))?;
                Ok(Array3::from_shape_vec((n, n, n), d).expect("shape matches"))
            })
            .collect()
    }
}

/// The third-order score moments all α-connections are built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMoments {
    /// `g_ij = E[∂_iℓ ∂_jℓ]`.
    pub metric: Array2<f64>,
    /// `E[∂_i∂_jℓ ∂_kℓ]`.
    pub hess_score: Array3<f64>,
    /// `E[∂_iℓ ∂_jℓ ∂_kℓ]`.
    pub skewness: Array3<f64>,
}

impl ScoreMoments {
    /// `Γ^α_ij,k = E[∂_i∂_jℓ ∂_kℓ] + (1−α)/2 E[∂_iℓ ∂_jℓ ∂_kℓ]`.
    pub fn alpha_lower(&self, alpha: f64) -> Array3<f64> {
        let c = 0.5 * (1.0 - alpha);
        let mut out = &self.hess_score + &(&self.skewness * c);
        symmetrize_ij(&mut out);
        out
    }
}

fn symmetrize_ij(a: &mut Array3<f64>) {
    let n = a.dim().0;
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                let v = 0.5 * (a[[i, j, k]] + a[[j, i, k]]);
                a[[i, j, k]] = v;
                a[[j, i, k]] = v;
            }
        }
    }
}

fn checked_metric(g: Array2<f64>) -> Result<Array2<f64>> {
    let cond = condition_number(&g);
    if cond > DEFAULT_CONDITION_CAP {
        return Err(Error::SingularMetric { condition: cond });
    }
    Ok(g)
}

/// One expectation pass for `g`, `E[∂∂ℓ ∂ℓ]` and `E[∂ℓ ∂ℓ ∂ℓ]`.
pub fn score_moments(model: &StatisticalModel, theta: &[f64]) -> Result<ScoreMoments> {
    let n = model.dim();
    let (n2, n3) = (n * n, n * n * n);
    let m = model.expect_vec(theta, |x| {
        let jet = model.score_jet(x, theta)?;
        let s = &jet.score;
        let mut out = vec![0.0; n2 + 2 * n3];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = s[i] * s[j];
                for k in 0..n {
                    let at = (i * n + j) * n + k;
                    out[n2 + at] = jet.hessian[i][j] * s[k];
                    out[n2 + n3 + at] = s[i] * s[j] * s[k];
                }
            }
        }
        Ok(out)
    })?;
    let mut metric = Array2::from_shape_vec((n, n), m[..n2].to_vec()).expect("shape");
    let t = metric.t().to_owned();
    metric = (&metric + &t) * 0.5;
    Ok(ScoreMoments {
        metric: checked_metric(metric)?,
        hess_score: Array3::from_shape_vec((n, n, n), m[n2..n2 + n3].to_vec()).expect("shape"),
        skewness: Array3::from_shape_vec((n, n, n), m[n2 + n3..].to_vec()).expect("shape"),
    })
}

/// `g_ij = E_θ[∂_iℓ ∂_jℓ]`.
pub fn fisher_metric(model: &StatisticalModel, theta: &[f64]) -> Result<Array2<f64>> {
    let n = model.dim();
    let m = model.expect_vec(theta, |x| {
        let jet = model.score_jet(x, theta)?;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = jet.score[i] * jet.score[j];
            }
        }
        Ok(out)
    })?;
    let g = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (m[i * n + j] + m[j * n + i]));
    checked_metric(g)
}

/// `Γ^α_ij,k = E_θ[(∂_i∂_jℓ + (1−α)/2 ∂_iℓ∂_jℓ) ∂_kℓ]`.
pub fn alpha_connection(model: &StatisticalModel, theta: &[f64], alpha: f64) -> Result<Array3<f64>> {
    Ok(score_moments(model, theta)?.alpha_lower(alpha))
}

/// The α-connection of `model` as a field, carrying its Fisher metric.
pub fn alpha_field(model: &StatisticalModel, alpha: f64) -> ConnectionField {
    let m = model.clone();
    let up_model = model.clone();
    let metric = MetricField::fisher(model);
    let mut field = ConnectionField::from_lower(metric, Provenance::Alpha { alpha }, move |t| {
        alpha_connection(&m, t, alpha)
    });
    // one expectation pass for both g and Γ when raising
    field.upper = Arc::new(move |t| {
        let mom = score_moments(&up_model, t)?;
        raise_connection(&mom.alpha_lower(alpha), &mom.metric)
    });
    field
}

/// Levi-Civita connection of a metric field, from finite differences of `g`.
pub fn levi_civita_field(metric: &MetricField, scheme: DiffScheme) -> ConnectionField {
    let g = metric.clone();
    ConnectionField::from_lower(metric.clone(), Provenance::LeviCivita, move |t| {
        let dg = g.derivative(t, &scheme)?;
        let n = g.dim();
        Ok(Array3::from_shape_fn((n, n, n), |(i, j, k)| {
            0.5 * (dg[[i, j, k]] + dg[[j, i, k]] - dg[[k, i, j]])
        }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{builtin, location, LocationKernel};

    fn max_abs(a: &Array3<f64>) -> f64 {
        a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn fisher_of_normal_is_diagonal() {
        let m = builtin("normal").unwrap();
        for (mu, s) in [(0.0, 1.0), (1.0, 2.0), (-0.4, 0.6)] {
            let g = fisher_metric(&m, &[mu, s]).unwrap();
            assert!((g[[0, 0]] - 1.0 / (s * s)).abs() < 1e-6);
            assert!((g[[1, 1]] - 2.0 / (s * s)).abs() < 1e-6);
            assert!(g[[0, 1]].abs() < 1e-6);
        }
    }

    #[test]
    fn fisher_of_bernoulli_at_zero() {
        let g = fisher_metric(&builtin("bernoulli-natural").unwrap(), &[0.0]).unwrap();
        assert!((g[[0, 0]] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn fisher_of_normal_natural_matches_hessian_of_potential() {
        let m = builtin("normal-natural").unwrap();
        let theta = [-0.5, 0.0];
        let g = fisher_metric(&m, &theta).unwrap();
        let k = |t: &[f64]| 0.5 * (-std::f64::consts::PI / t[0]).ln() - t[1] * t[1] / (4.0 * t[0]);
        let h = numerics::hessian(k, &theta, &DiffScheme::new(2, 2), None).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[[i, j]] - h[i][j]).abs() < 1e-6, "{i}{j}: {} vs {}", g[[i, j]], h[i][j]);
            }
        }
        assert!((g[[1, 1]] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn normal_alpha_connection_closed_form() {
        // Γ_11,2 = (1−α)/σ³, Γ_12,1 = −(1+α)/σ³, Γ_22,2 = −(2+4α)/σ³, rest zero
        let m = builtin("normal").unwrap();
        for alpha in [-1.0, 0.0, 0.5, 1.0] {
            let s: f64 = 1.5;
            let c = alpha_connection(&m, &[0.3, s], alpha).unwrap();
            let mut want = Array3::zeros((2, 2, 2));
            want[[0, 0, 1]] = (1.0 - alpha) / s.powi(3);
            want[[0, 1, 0]] = -(1.0 + alpha) / s.powi(3);
            want[[1, 0, 0]] = -(1.0 + alpha) / s.powi(3);
            want[[1, 1, 1]] = -(2.0 + 4.0 * alpha) / s.powi(3);
            assert!(max_abs(&(&c - &want)) < 1e-6, "alpha {alpha}: {c:?}");
        }
    }

    #[test]
    fn exponential_connection_vanishes_in_natural_coordinates() {
        let m = builtin("normal-natural").unwrap();
        for t in [[-0.5, 0.0], [-1.0, 0.4]] {
            assert!(max_abs(&alpha_connection(&m, &t, 1.0).unwrap()) < 1e-5);
        }
    }

    #[test]
    fn logistic_location_is_alpha_flat() {
        let m = location(LocationKernel::Logistic, 1).unwrap();
        for alpha in [-1.0, 0.0, 1.0] {
            for mu in [-0.7, 0.0, 1.3] {
                assert!(max_abs(&alpha_connection(&m, &[mu], alpha).unwrap()) < 1e-4);
            }
        }
    }

    #[test]
    fn zero_alpha_matches_levi_civita_of_fisher() {
        let m = builtin("normal").unwrap();
        let lc = levi_civita_field(&MetricField::fisher(&m), DiffScheme::nested());
        for t in [[0.0, 1.0], [0.5, 1.4]] {
            let a = alpha_connection(&m, &t, 0.0).unwrap();
            let b = lc.lower(&t).unwrap();
            assert!(max_abs(&(&a - &b)) < 1e-4);
        }
    }

    #[test]
    fn field_upper_and_lower_agree() {
        let m = builtin("normal").unwrap();
        let f = alpha_field(&m, 0.5);
        let t = [0.2, 0.9];
        let g = fisher_metric(&m, &t).unwrap();
        let back = lower_connection(&f.upper(&t).unwrap(), &g).unwrap();
        assert!(max_abs(&(&back - &f.lower(&t).unwrap())) < 1e-10);
    }

    #[test]
    fn out_of_domain_field_evaluation() {
        let f = alpha_field(&builtin("normal").unwrap(), 0.0);
        assert!(matches!(f.upper(&[0.0, -1.0]), Err(Error::OutOfDomain { .. })));
    }
}
