//! Statistical models: a sample space with a parametrized log-density.

mod catalog;
mod schema;
mod validate;

use std::fmt;
use std::sync::Arc;

pub use catalog::{
    bernoulli_natural, builtin, builtin_names, categorical_natural, location, normal, normal_natural, poisson_natural,
    quadrature_nodes, reference_grid, LocationKernel, QUAD_NODES_ENV,
};
pub(crate) use catalog::{normal_natural_placement, DEFAULT_HERMITE_NODES};
pub use schema::{
    load_model, load_model_str, BoundValue, BuiltinRef, DomainSpec, InlineModel, ModelDoc, PlacementSpec, SpaceSpec,
};
pub use validate::{validate_model, PointValidation, ValidationReport};

use crate::error::{Error, Result};
use crate::numerics::{self, DiffScheme, Domain, ExpectationRule, Placement, SampleSpace};

pub type LogDensityFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type PlacementFn = Arc<dyn Fn(&[f64]) -> Vec<Placement> + Send + Sync>;

/// Derivatives of the log-likelihood in the parameters at one sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreJet {
    pub log_density: f64,
    pub score: Vec<f64>,
    /// `hessian[i][j] = ∂_i∂_j ℓ`.
    pub hessian: Vec<Vec<f64>>,
}

/// `S = { p(x; θ) | θ ∈ Θ }` with `ℓ = log p` given as an opaque callable.
#[derive(Clone)]
pub struct StatisticalModel {
    label: String,
    dim: usize,
    space: SampleSpace,
    domain: Domain,
    log_density: LogDensityFn,
    placement: Option<PlacementFn>,
    scheme: DiffScheme,
}

impl fmt::Debug for StatisticalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatisticalModel")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("space", &self.space)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl StatisticalModel {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        space: SampleSpace,
        domain: Domain,
        log_density: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("model dimension must be >= 1".into()));
        }
        if domain.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: domain.dim(),
            });
        }
        Ok(StatisticalModel {
            label: label.into(),
            dim,
            space,
            domain,
            log_density: Arc::new(log_density),
            placement: None,
            scheme: DiffScheme::new(2, 1),
        })
    }

    /// Quadrature placement as a function of the parameter, so node sets
    /// follow the bulk of the density.
    pub fn with_placement(mut self, f: impl Fn(&[f64]) -> Vec<Placement> + Send + Sync + 'static) -> Self {
        self.placement = Some(Arc::new(f));
        self
    }

    /// Overrides the sample space's default expectation rule.
    pub fn with_rule(mut self, rule: ExpectationRule) -> Result<Self> {
        rule.validate()?;
        let applicable = if self.space.is_finite() {
            matches!(rule, ExpectationRule::ExactFiniteSum | ExpectationRule::MonteCarlo { .. })
        } else {
            !rule.is_exact()
        };
        if !applicable {
            return Err(Error::InvalidConfig(format!(
                "rule {rule:?} is not applicable to this sample space"
            )));
        }
        self.space = self.space.with_rule(rule);
        Ok(self)
    }

    pub fn with_scheme(mut self, scheme: DiffScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn rule(&self) -> &ExpectationRule {
        &self.space.rule
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn scheme(&self) -> &DiffScheme {
        &self.scheme
    }

    /// Residual tolerance appropriate for this model's expectation rule.
    pub fn tolerance(&self) -> f64 {
        if self.space.rule.is_exact() {
            1e-6
        } else {
            1e-4
        }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: theta.len(),
            });
        }
        if !self.domain.contains(theta) {
            return Err(Error::OutOfDomain { point: theta.to_vec() });
        }
        Ok(())
    }

    pub fn log_density(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        self.check_theta(theta)?;
        Ok((self.log_density)(x, theta))
    }

    pub fn density(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        self.log_density(x, theta).map(f64::exp)
    }

    /// `∂_i ℓ(x; θ)` by finite differences in θ.
    pub fn score(&self, x: &[f64], theta: &[f64], i: usize) -> Result<f64> {
        self.check_theta(theta)?;
        numerics::derive(|t| (self.log_density)(x, t), theta, &[i], &self.scheme, Some(&self.domain))
    }

    /// ℓ, its gradient and Hessian in θ at a single sample point.
    pub fn score_jet(&self, x: &[f64], theta: &[f64]) -> Result<ScoreJet> {
        self.check_theta(theta)?;
        let f = |t: &[f64]| (self.log_density)(x, t);
        let score = numerics::gradient(f, theta, &self.scheme, Some(&self.domain))?;
        let hessian = numerics::hessian(f, theta, &self.scheme, Some(&self.domain))?;
        Ok(ScoreJet {
            log_density: f(theta),
            score,
            hessian,
        })
    }

    pub fn placement(&self, theta: &[f64]) -> Vec<Placement> {
        match &self.placement {
            Some(p) => p(theta),
            None => vec![Placement::default(); self.space.outcome_dim()],
        }
    }

    /// `E_θ[integrand]` under this model's rule.
    pub fn expect_vec<F>(&self, theta: &[f64], integrand: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        self.expect_vec_with(theta, integrand, &self.space.rule)
    }

    pub fn expect_vec_with<F>(&self, theta: &[f64], integrand: F, rule: &ExpectationRule) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        self.check_theta(theta)?;
        let placement = self.placement(theta);
        numerics::expect_vec(
            &self.space,
            &placement,
            |x| (self.log_density)(x, theta).exp(),
            integrand,
            rule,
        )
    }

    pub fn expect<F>(&self, theta: &[f64], integrand: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        self.expect_vec(theta, |x| Ok(vec![integrand(x)])).map(|v| v[0])
    }

    /// Reparametrizes through `map: ψ ↦ θ`, defined on `domain`.
    pub fn compose(
        &self,
        label: impl Into<String>,
        dim: usize,
        domain: Domain,
        map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<StatisticalModel> {
        let map = Arc::new(map);
        let ld = self.log_density.clone();
        let m2 = map.clone();
        let mut out = StatisticalModel::new(label, dim, self.space.clone(), domain, move |x, u| ld(x, &m2(u)))?;
        if let Some(p) = &self.placement {
            let p = p.clone();
            out = out.with_placement(move |u| p(&map(u)));
        }
        out.scheme = self.scheme;
        Ok(out)
    }
}
