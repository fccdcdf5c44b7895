use std::f64::consts::PI;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{normal_natural_placement, PlacementFn, StatisticalModel, DEFAULT_HERMITE_NODES};
use crate::numerics::{self, log_integrate, DiffScheme, Domain, ExpectationRule, Placement, SampleSpace};

pub type StatsFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `p(x; θ) = exp(Σ θ_i F_i(x) + D(x) − K(θ))`.
#[derive(Clone)]
pub struct PotentialFamily {
    label: String,
    dim: usize,
    stats: StatsFn,
    base: ScalarFn,
    space: SampleSpace,
    domain: Domain,
    placement: Option<PlacementFn>,
    reference: Vec<f64>,
    closed_form: Option<ScalarFn>,
}

impl fmt::Debug for PotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialFamily")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("space", &self.space)
            .field("reference", &self.reference)
            .finish_non_exhaustive()
    }
}

/// A point in both charts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
    /// `φ = θ·η − K(θ)`.
    pub phi: f64,
    pub iterations: usize,
}

pub const NEWTON_MAX_ITERATIONS: usize = 100;

impl PotentialFamily {
    /// `reference` is an interior point used to start dual-coordinate inversion.
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        space: SampleSpace,
        domain: Domain,
        reference: Vec<f64>,
        stats: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        base: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("family dimension must be >= 1".into()));
        }
        if domain.dim() != dim || reference.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: if domain.dim() != dim { domain.dim() } else { reference.len() },
            });
        }
        if !domain.contains(&reference) {
            return Err(Error::OutOfDomain { point: reference });
        }
        Ok(PotentialFamily {
            label: label.into(),
            dim,
            stats: Arc::new(stats),
            base: Arc::new(base),
            space,
            domain,
            placement: None,
            reference,
            closed_form: None,
        })
    }

    pub fn with_placement(mut self, f: impl Fn(&[f64]) -> Vec<Placement> + Send + Sync + 'static) -> Self {
        self.placement = Some(Arc::new(f));
        self
    }

    pub(crate) fn with_placement_fn(mut self, f: Option<PlacementFn>) -> Self {
        self.placement = f;
        self
    }

    /// Known closed form of `K`, kept for oracle comparisons only.
    pub fn with_closed_form(mut self, k: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.closed_form = Some(Arc::new(k));
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

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn stats(&self, x: &[f64]) -> Vec<f64> {
        (self.stats)(x)
    }

    pub fn base(&self, x: &[f64]) -> f64 {
        (self.base)(x)
    }

    pub(crate) fn stats_fn(&self) -> StatsFn {
        self.stats.clone()
    }

    pub(crate) fn base_fn(&self) -> ScalarFn {
        self.base.clone()
    }

    pub(crate) fn placement_fn(&self) -> Option<PlacementFn> {
        self.placement.clone()
    }

    pub fn closed_form_potential(&self, theta: &[f64]) -> Option<f64> {
        self.closed_form.as_ref().map(|k| k(theta))
    }

    fn placement(&self, theta: &[f64]) -> Vec<Placement> {
        match &self.placement {
            Some(p) => p(theta),
            None => vec![Placement::default(); self.space.outcome_dim()],
        }
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
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

    /// `K(θ) = log ∫ exp(θ·F(x) + D(x)) dx` by the space's own rule.
    pub fn potential(&self, theta: &[f64]) -> Result<f64> {
        self.check(theta)?;
        let (stats, base) = (&self.stats, &self.base);
        log_integrate(
            &self.space,
            &self.placement(theta),
            |x| {
                let f = stats(x);
                theta.iter().zip(&f).map(|(t, v)| t * v).sum::<f64>() + base(x)
            },
            &self.space.rule,
        )
    }

    /// `η = ∇K(θ)`.
    pub fn dual_coords(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check(theta)?;
        numerics::jacobian_vec(
            |t| self.potential(t).map(|k| vec![k]),
            theta,
            &DiffScheme::new(1, 2),
            Some(&self.domain),
        )
        .map(|rows| rows.into_iter().map(|r| r[0]).collect())
    }

    /// `Hess K(θ)`.
    pub fn hessian_metric(&self, theta: &[f64]) -> Result<Array2<f64>> {
        self.check(theta)?;
        let n = self.dim;
        let k = |t: &[f64]| self.potential(t).map(|v| vec![v]);
        let s = DiffScheme::new(2, 2);
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = numerics::derive_vec(k, theta, &[i, j], &s, Some(&self.domain))?[0];
                out[[i, j]] = v;
                out[[j, i]] = v;
            }
        }
        Ok(out)
    }

    /// Both charts at `theta`.
    pub fn dual_point(&self, theta: &[f64]) -> Result<DualPoint> {
        let eta = self.dual_coords(theta)?;
        let k = self.potential(theta)?;
        Ok(DualPoint {
            phi: theta.iter().zip(&eta).map(|(a, b)| a * b).sum::<f64>() - k,
            theta: theta.to_vec(),
            eta,
            iterations: 0,
        })
    }

    /// Solves `∇K(θ) = η` by damped Newton on the convex `K(θ) − θ·η`.
    pub fn invert_dual(&self, eta: &[f64]) -> Result<DualPoint> {
        if eta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: eta.len(),
            });
        }
        let objective = |t: &[f64]| -> Result<f64> {
            Ok(self.potential(t)? - t.iter().zip(eta).map(|(a, b)| a * b).sum::<f64>())
        };
        let mut theta = self.reference.clone();
        let mut value = objective(&theta)?;
        for it in 0..NEWTON_MAX_ITERATIONS {
            let grad: Vec<f64> = self
                .dual_coords(&theta)?
                .iter()
                .zip(eta)
                .map(|(a, b)| a - b)
                .collect();
            let gnorm = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = eta.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if gnorm < 1e-11 * scale {
                let k = self.potential(&theta)?;
                return Ok(DualPoint {
                    phi: theta.iter().zip(eta).map(|(a, b)| a * b).sum::<f64>() - k,
                    theta,
                    eta: eta.to_vec(),
                    iterations: it,
                });
            }
            let hess = self.hessian_metric(&theta)?;
            let step = numerics::solve_frame(
                &(0..self.dim).map(|j| hess.column(j).to_vec()).collect::<Vec<_>>(),
                &grad,
            )
            .map_err(|_| Error::OutOfDualDomain { eta: eta.to_vec() })?;
            let mut lambda = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t - lambda * s).collect();
                if self.domain.contains(&cand) {
                    if let Ok(v) = objective(&cand) {
                        if v <= value + 1e-14 * value.abs().max(1.0) {
                            theta = cand;
                            value = v;
                            moved = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !moved || theta.iter().any(|t| t.abs() > 1e6) {
                return Err(Error::OutOfDualDomain { eta: eta.to_vec() });
            }
        }
        Err(Error::NonConvergent {
            iterations: NEWTON_MAX_ITERATIONS,
        })
    }

    /// `φ(η) = θ(η)·η − K(θ(η))`.
    pub fn dual_potential(&self, eta: &[f64]) -> Result<f64> {
        self.invert_dual(eta).map(|p| p.phi)
    }

    /// The family as a statistical model, with `K` evaluated numerically.
    pub fn model(&self) -> StatisticalModel {
        let fam = self.clone();
        // expectations evaluate many outcomes at each θ, so memoize K
        let cache: Mutex<HashMap<Vec<u64>, f64>> = Mutex::new(HashMap::new());
        let mut m = StatisticalModel::new(self.label.clone(), self.dim, self.space.clone(), self.domain.clone(), move |x, t| {
            let key: Vec<u64> = t.iter().map(|v| v.to_bits()).collect();
            let cached = cache.lock().ok().and_then(|c| c.get(&key).copied());
            let k = match cached {
                Some(k) => k,
                None => {
                    let k = fam.potential(t).unwrap_or(f64::NAN);
                    if let Ok(mut c) = cache.lock() {
                        if c.len() >= K_CACHE_SIZE {
                            c.clear();
                        }
                        c.insert(key, k);
                    }
                    k
                }
            };
            let f = fam.stats(x);
            let lin: f64 = t.iter().zip(&f).map(|(a, b)| a * b).sum();
            lin + fam.base(x) - k
        })
        .expect("family dimensions are consistent");
        if let Some(p) = &self.placement {
            let p = p.clone();
            m = m.with_placement(move |t| p(t));
        }
        m
    }
}

const K_CACHE_SIZE: usize = 4096;

const NAMES: &[&str] = &["normal-natural", "bernoulli-natural", "categorical-natural", "poisson-natural"];

pub fn family_names() -> &'static [&'static str] {
    NAMES
}

pub fn family(name: &str) -> Result<PotentialFamily> {
    match name {
        "normal-natural" => Ok(normal_family()),
        "bernoulli-natural" => Ok(bernoulli_family()),
        "categorical-natural" => categorical_family(2),
        "poisson-natural" => Ok(poisson_family(2.5)),
        other => Err(Error::UnknownSymbol(format!("builtin family `{other}`"))),
    }
}

/// Grid each catalog family is exercised on.
pub fn family_grid(name: &str) -> Vec<Vec<f64>> {
    crate::models::reference_grid(name)
}

fn log1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub fn normal_family() -> PotentialFamily {
    let rule = ExpectationRule::GaussHermite {
        nodes: crate::models::quadrature_nodes(DEFAULT_HERMITE_NODES),
    };
    PotentialFamily::new(
        "normal-natural",
        2,
        SampleSpace::real_line(rule).expect("valid rule"),
        Domain::open_box(vec![f64::NEG_INFINITY; 2], vec![0.0, f64::INFINITY]),
        vec![-0.5, 0.0],
        |x| vec![x[0] * x[0], x[0]],
        |_| 0.0,
    )
    .expect("static family")
    .with_placement(normal_natural_placement)
    .with_closed_form(|t| 0.5 * (-PI / t[0]).ln() - t[1] * t[1] / (4.0 * t[0]))
}

pub fn bernoulli_family() -> PotentialFamily {
    PotentialFamily::new(
        "bernoulli-natural",
        1,
        SampleSpace::finite(vec![vec![0.0], vec![1.0]]).expect("two points"),
        Domain::unbounded(1),
        vec![0.0],
        |x| vec![x[0]],
        |_| 0.0,
    )
    .expect("static family")
    .with_closed_form(|t| log1p_exp(t[0]))
}

/// Categorical on `{0, …, n}` with indicator statistics of categories `1..=n`.
pub fn categorical_family(n: usize) -> Result<PotentialFamily> {
    let points = (0..=n).map(|k| vec![k as f64]).collect();
    Ok(PotentialFamily::new(
        "categorical-natural",
        n,
        SampleSpace::finite(points)?,
        Domain::unbounded(n),
        vec![0.0; n],
        move |x| {
            let k = x[0].round() as usize;
            (1..=n).map(|c| if c == k { 1.0 } else { 0.0 }).collect()
        },
        |_| 0.0,
    )?
    .with_closed_form(|t| (1.0 + t.iter().map(|v| v.exp()).sum::<f64>()).ln()))
}

/// Poisson in `θ = log λ` on the same truncated support as the catalog model.
pub fn poisson_family(theta_max: f64) -> PotentialFamily {
    let model = crate::models::poisson_natural(theta_max);
    let points = match &model.space().kind {
        numerics::SpaceKind::Finite { points } => points.clone(),
        _ => unreachable!("poisson support is finite"),
    };
    let space = SampleSpace::finite(points).expect("support");
    PotentialFamily::new(
        "poisson-natural",
        1,
        space,
        model.domain().clone(),
        vec![0.0],
        |x| vec![x[0]],
        |x| -(1..=x[0].round() as usize).map(|i| (i as f64).ln()).sum::<f64>(),
    )
    .expect("static family")
    .with_closed_form(|t| t[0].exp())
}
