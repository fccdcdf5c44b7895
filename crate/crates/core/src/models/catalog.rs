use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::StatisticalModel;
use crate::error::{Error, Result};
use crate::numerics::{Domain, ExpectationRule, Placement, SampleSpace};

pub(crate) const DEFAULT_HERMITE_NODES: usize = 32;

/// Environment variable replacing every catalog default node count.
pub const QUAD_NODES_ENV: &str = "IGEO_QUAD_NODES";

/// `default`, unless `IGEO_QUAD_NODES` holds a count of at least 2.
pub fn quadrature_nodes(default: usize) -> usize {
    std::env::var(QUAD_NODES_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n >= 2)
        .unwrap_or(default)
}

/// Support cutoff for the truncated Poisson family keeps this much mass.
const POISSON_MASS: f64 = 1.0 - 1e-10;

const NAMES: &[&str] = &[
    "normal",
    "normal-natural",
    "bernoulli-natural",
    "categorical-natural",
    "poisson-natural",
    "location-logistic",
    "location-gaussian",
    "location-logistic-2",
    "location-gaussian-2",
];

pub fn builtin_names() -> &'static [&'static str] {
    NAMES
}

/// Catalog instance by name.
pub fn builtin(name: &str) -> Result<StatisticalModel> {
    match name {
        "normal" => Ok(normal()),
        "normal-natural" => Ok(normal_natural()),
        "bernoulli-natural" => Ok(bernoulli_natural()),
        "categorical-natural" => categorical_natural(2),
        "poisson-natural" => Ok(poisson_natural(2.5)),
        "location-logistic" => location(LocationKernel::Logistic, 1),
        "location-gaussian" => location(LocationKernel::Gaussian, 1),
        "location-logistic-2" => location(LocationKernel::Logistic, 2),
        "location-gaussian-2" => location(LocationKernel::Gaussian, 2),
        other => Err(Error::UnknownSymbol(format!("builtin model `{other}`"))),
    }
}

/// Parameter points each catalog entry is validated on.
pub fn reference_grid(name: &str) -> Vec<Vec<f64>> {
    match name {
        "normal" => vec![vec![0.0, 1.0], vec![1.0, 2.0], vec![-0.5, 0.7]],
        "normal-natural" => vec![vec![-0.5, 0.0], vec![-1.0, 0.5], vec![-0.25, -0.3]],
        "bernoulli-natural" | "poisson-natural" => vec![vec![-2.0], vec![0.0], vec![2.0]],
        "categorical-natural" => vec![vec![0.0, 0.0], vec![0.5, -1.0], vec![-1.5, 1.0]],
        "location-logistic" | "location-gaussian" => vec![vec![-1.0], vec![0.0], vec![0.8]],
        "location-logistic-2" | "location-gaussian-2" => vec![vec![0.0, 0.0], vec![0.5, -0.3]],
        _ => Vec::new(),
    }
}

fn hermite() -> ExpectationRule {
    ExpectationRule::GaussHermite {
        nodes: quadrature_nodes(DEFAULT_HERMITE_NODES),
    }
}

fn real_line() -> SampleSpace {
    SampleSpace::real_line(hermite()).expect("static rule is valid")
}

/// `N(μ, σ)` in `(μ, σ)` coordinates.
pub fn normal() -> StatisticalModel {
    let half_log_2pi = 0.5 * (2.0 * PI).ln();
    StatisticalModel::new(
        "normal",
        2,
        real_line(),
        Domain::open_box(vec![f64::NEG_INFINITY, 0.0], vec![f64::INFINITY; 2]),
        move |x, t| {
            let z = (x[0] - t[0]) / t[1];
            -half_log_2pi - t[1].ln() - 0.5 * z * z
        },
    )
    .expect("static model")
    .with_placement(|t| {
        vec![Placement {
            center: t[0],
            scale: t[1],
        }]
    })
}

/// Normal potential `K(θ) = ½log(−π/θ₁) − θ₂²/(4θ₁)`.
pub(crate) fn normal_potential(t: &[f64]) -> f64 {
    0.5 * (-PI / t[0]).ln() - t[1] * t[1] / (4.0 * t[0])
}

pub(crate) fn normal_natural_placement(t: &[f64]) -> Vec<Placement> {
    vec![Placement {
        center: -t[1] / (2.0 * t[0]),
        scale: (-0.5 / t[0]).sqrt(),
    }]
}

/// Normal family in natural coordinates `θ₁ = −1/(2σ²)`, `θ₂ = μ/σ²`, with
/// sufficient statistics `(x², x)`.
pub fn normal_natural() -> StatisticalModel {
    StatisticalModel::new(
        "normal-natural",
        2,
        real_line(),
        Domain::open_box(vec![f64::NEG_INFINITY; 2], vec![0.0, f64::INFINITY]),
        |x, t| t[0] * x[0] * x[0] + t[1] * x[0] - normal_potential(t),
    )
    .expect("static model")
    .with_placement(normal_natural_placement)
}

fn log1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub fn bernoulli_natural() -> StatisticalModel {
    StatisticalModel::new(
        "bernoulli-natural",
        1,
        SampleSpace::finite(vec![vec![0.0], vec![1.0]]).expect("two outcomes"),
        Domain::unbounded(1),
        |x, t| t[0] * x[0] - log1p_exp(t[0]),
    )
    .expect("static model")
}

/// Categorical distribution on `{0, …, n}` with category 0 as reference:
/// `ℓ = θ_x − log(1 + Σ e^{θ_i})` (θ_0 ≡ 0).
pub fn categorical_natural(n: usize) -> Result<StatisticalModel> {
    let points = (0..=n).map(|k| vec![k as f64]).collect();
    StatisticalModel::new(
        format!("categorical-natural-{n}"),
        n,
        SampleSpace::finite(points)?,
        Domain::unbounded(n),
        |x, t| {
            let m = t.iter().cloned().fold(0.0f64, f64::max);
            let norm = m + ((-m).exp() + t.iter().map(|v| (v - m).exp()).sum::<f64>()).ln();
            let k = x[0].round() as usize;
            let lin = if k == 0 { 0.0 } else { t[k - 1] };
            lin - norm
        },
    )
    .map(|m| m.with_label("categorical-natural"))
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Poisson family in `θ = log λ` on a truncated support that keeps at least
/// `1 − 1e-10` of the mass for every `θ < theta_max`. The truncated density
/// is renormalized, so it is itself an exponential family.
pub fn poisson_natural(theta_max: f64) -> StatisticalModel {
    let lambda = theta_max.exp();
    // smallest N with P(X > N) < 1 − POISSON_MASS at the largest rate
    let mut cutoff = 0usize;
    let mut term = (-lambda).exp();
    let mut cdf = term;
    while cdf < POISSON_MASS {
        cutoff += 1;
        term *= lambda / cutoff as f64;
        cdf += term;
    }
    let lnf: Vec<f64> = (0..=cutoff).map(ln_factorial).collect();
    let points: Vec<Vec<f64>> = (0..=cutoff).map(|k| vec![k as f64]).collect();
    StatisticalModel::new(
        "poisson-natural",
        1,
        SampleSpace::finite(points).expect("at least two outcomes"),
        Domain::open_box(vec![-5.0], vec![theta_max]),
        move |x, t| {
            let logs: Vec<f64> = lnf.iter().enumerate().map(|(k, lf)| t[0] * k as f64 - lf).collect();
            let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let k_trunc = m + logs.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            let k = x[0].round() as usize;
            t[0] * x[0] - lnf[k] - k_trunc
        },
    )
    .expect("static model")
}

/// Kernel `q` of a location family `p(x; μ) = Π q(x_i − μ_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocationKernel {
    Logistic,
    Gaussian,
}

impl LocationKernel {
    pub fn log_q(self, y: f64) -> f64 {
        match self {
            // log(e^{-y}/(1+e^{-y})²), written symmetrically for stability
            LocationKernel::Logistic => {
                let a = y.abs();
                -a - 2.0 * (-a).exp().ln_1p()
            }
            LocationKernel::Gaussian => -0.5 * (2.0 * PI).ln() - 0.5 * y * y,
        }
    }

    pub fn std_dev(self) -> f64 {
        match self {
            LocationKernel::Logistic => PI / 3f64.sqrt(),
            LocationKernel::Gaussian => 1.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            LocationKernel::Logistic => "logistic",
            LocationKernel::Gaussian => "gaussian",
        }
    }
}

/// Location family with identity scale matrix, `k ∈ {1, 2}`.
pub fn location(kernel: LocationKernel, k: usize) -> Result<StatisticalModel> {
    if !(1..=2).contains(&k) {
        return Err(Error::InvalidConfig(format!("location family needs k in 1..=2, got {k}")));
    }
    let nodes = match kernel {
        LocationKernel::Logistic => quadrature_nodes(64),
        LocationKernel::Gaussian => quadrature_nodes(DEFAULT_HERMITE_NODES),
    };
    let rule = ExpectationRule::GaussHermite { nodes };
    let space = if k == 1 {
        SampleSpace::real_line(rule)?
    } else {
        SampleSpace::real_k(k, rule)?
    };
    let label = if k == 1 {
        format!("location-{}", kernel.name())
    } else {
        format!("location-{}-{k}", kernel.name())
    };
    let sd = kernel.std_dev();
    Ok(StatisticalModel::new(label, k, space, Domain::unbounded(k), move |x, mu| {
        x.iter().zip(mu).map(|(xi, mi)| kernel.log_q(xi - mi)).sum()
    })?
    .with_placement(move |mu| mu.iter().map(|&c| Placement { center: c, scale: sd }).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn logistic_kernel_is_a_density() {
        let m = location(LocationKernel::Logistic, 1).unwrap();
        for mu in [-1.0, 0.0, 2.0] {
            let total = m.expect(&[mu], |_| 1.0).unwrap();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-4);
        }
        assert_abs_diff_eq!(LocationKernel::Logistic.log_q(0.0), -(4f64).ln(), epsilon = 1e-15);
    }

    #[test]
    fn poisson_support_keeps_the_mass() {
        let m = poisson_natural(2.5);
        let total = m.expect(&[2.4], |_| 1.0).unwrap();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        let mean = m.expect(&[2.4], |x| x[0]).unwrap();
        assert_abs_diff_eq!(mean, 2.4f64.exp(), epsilon = 1e-6);
    }

    #[test]
    fn categorical_probabilities() {
        let m = categorical_natural(2).unwrap();
        let p0 = m.density(&[0.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p0, 1.0 / 3.0, epsilon = 1e-15);
        let p2 = m.density(&[2.0], &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(p2, 1f64.exp() / (2.0 + 1f64.exp()), epsilon = 1e-15);
    }

    #[test]
    fn unknown_builtin() {
        assert!(matches!(builtin("cauchy"), Err(Error::UnknownSymbol(_))));
        assert!(location(LocationKernel::Gaussian, 3).is_err());
    }
}
