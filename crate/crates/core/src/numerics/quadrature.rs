//! Expectation kernels over finite and Euclidean sample spaces.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How expectations over a sample space are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ExpectationRule {
    ExactFiniteSum,
    GaussHermite { nodes: usize },
    AdaptiveQuadrature { tol: f64 },
    /// Seed is mandatory; unseeded Monte Carlo is rejected at deserialization.
    MonteCarlo { samples: usize, seed: u64 },
}

impl ExpectationRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExpectationRule::GaussHermite { nodes } if nodes == 0 => {
                Err(Error::InvalidConfig("Gauss-Hermite needs at least one node".into()))
            }
            ExpectationRule::AdaptiveQuadrature { tol } if !(tol > 0.0) => {
                Err(Error::InvalidConfig(format!("adaptive tolerance must be > 0, got {tol}")))
            }
            ExpectationRule::MonteCarlo { samples, .. } if samples == 0 => {
                Err(Error::InvalidConfig("Monte Carlo needs at least one sample".into()))
            }
            _ => Ok(()),
        }
    }

    /// Whether results are exact up to round-off (finite sums).
    pub fn is_exact(&self) -> bool {
        matches!(self, ExpectationRule::ExactFiniteSum)
    }
}

/// Outcome set of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceKind {
    /// Counting measure on a list of outcome vectors.
    Finite { points: Vec<Vec<f64>> },
    RealLine,
    /// Lebesgue measure on R^k.
    RealK { k: usize },
}

/// Sample space together with its default expectation rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpace {
    pub kind: SpaceKind,
    pub rule: ExpectationRule,
}

impl SampleSpace {
    pub fn finite(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfig("finite space needs points".into()));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidConfig("finite space points differ in dimension".into()));
        }
        let mut distinct = points.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(Error::InvalidConfig(
                "finite space needs at least two distinct outcomes".into(),
            ));
        }
        Ok(SampleSpace {
            kind: SpaceKind::Finite { points },
            rule: ExpectationRule::ExactFiniteSum,
        })
    }

    pub fn real_line(rule: ExpectationRule) -> Result<Self> {
        Self::real_k(1, rule).map(|mut s| {
            s.kind = SpaceKind::RealLine;
            s
        })
    }

    pub fn real_k(k: usize, rule: ExpectationRule) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("real space needs k >= 1".into()));
        }
        if rule.is_exact() {
            return Err(Error::InvalidConfig(
                "real spaces need a quadrature or Monte Carlo rule".into(),
            ));
        }
        rule.validate()?;
        Ok(SampleSpace {
            kind: SpaceKind::RealK { k },
            rule,
        })
    }

    /// Dimension of one outcome vector.
    pub fn outcome_dim(&self) -> usize {
        match &self.kind {
            SpaceKind::Finite { points } => points[0].len(),
            SpaceKind::RealLine => 1,
            SpaceKind::RealK { k } => *k,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, SpaceKind::Finite { .. })
    }

    pub fn with_rule(mut self, rule: ExpectationRule) -> Self {
        self.rule = rule;
        self
    }
}

/// Affine placement of a quadrature rule along one outcome coordinate:
/// nodes are spread as `center + scale * z` with `z` standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub center: f64,
    pub scale: f64,
}

impl Default for Placement {
    fn default() -> Self {
        Placement {
            center: 0.0,
            scale: 1.0,
        }
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Gauss-Hermite nodes and weights for `∫ f(t) exp(-t²) dt`, nodes ascending.
///
/// Newton iteration on the orthonormal Hermite recurrence, which keeps the
/// weights accurate in the relative sense even far in the tails.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    x.reverse();
    w.reverse();
    (x, w)
}

/// Nodes and Lebesgue weights of a Gauss-Hermite rule placed at `placement`:
/// `∫ g(x) dx ≈ Σ ω_i g(x_i)`, exact when `g` is a Gaussian with the placement's
/// mean and standard deviation times a polynomial of degree < 2n.
fn hermite_line(n: usize, placement: Placement) -> Vec<(f64, f64)> {
    let (t, w) = gauss_hermite(n);
    let s = std::f64::consts::SQRT_2 * placement.scale;
    t.iter()
        .zip(&w)
        .map(|(&ti, &wi)| (placement.center + s * ti, s * (wi.ln() + ti * ti).exp()))
        .collect()
}

/// Weighted node set for node-based rules. `None` for adaptive rules.
fn node_set(space: &SampleSpace, placement: &[Placement], rule: &ExpectationRule) -> Result<Option<Vec<(Vec<f64>, f64)>>> {
    rule.validate()?;
    let k = space.outcome_dim();
    let place = |d: usize| placement.get(d).copied().unwrap_or_default();
    match (&space.kind, rule) {
        (SpaceKind::Finite { points }, ExpectationRule::ExactFiniteSum) => {
            Ok(Some(points.iter().map(|p| (p.clone(), 1.0)).collect()))
        }
        (SpaceKind::Finite { points }, ExpectationRule::MonteCarlo { samples, seed }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let pick = Uniform::new(0, points.len());
            let w = points.len() as f64 / *samples as f64;
            Ok(Some(
                (0..*samples)
                    .map(|_| (points[pick.sample(&mut rng)].clone(), w))
                    .collect(),
            ))
        }
        (SpaceKind::Finite { .. }, _) => Err(Error::InvalidConfig(
            "finite spaces support exact sums or Monte Carlo only".into(),
        )),
        (_, ExpectationRule::ExactFiniteSum) => Err(Error::InvalidConfig(
            "exact sums need a finite sample space".into(),
        )),
        (_, ExpectationRule::GaussHermite { nodes }) => {
            let lines: Vec<Vec<(f64, f64)>> = (0..k).map(|d| hermite_line(*nodes, place(d))).collect();
            let mut out: Vec<(Vec<f64>, f64)> = vec![(Vec::with_capacity(k), 1.0)];
            for line in &lines {
                out = out
                    .into_iter()
                    .flat_map(|(p, w)| {
                        line.iter().map(move |&(x, lw)| {
                            let mut q = p.clone();
                            q.push(x);
                            (q, w * lw)
                        })
                    })
                    .collect();
            }
            Ok(Some(out))
        }
        (_, ExpectationRule::MonteCarlo { samples, seed }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let norm = (2.0 * std::f64::consts::PI).sqrt();
            let n = *samples as f64;
            Ok(Some(
                (0..*samples)
                    .map(|_| {
                        let mut x = Vec::with_capacity(k);
                        let mut w = 1.0 / n;
                        for d in 0..k {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            let p = place(d);
                            x.push(p.center + p.scale * z);
                            // importance weight 1/q(x) for the normal proposal
                            w *= p.scale * norm * (0.5 * z * z).exp();
                        }
                        (x, w)
                    })
                    .collect(),
            ))
        }
        (_, ExpectationRule::AdaptiveQuadrature { .. }) => Ok(None),
    }
}

/// `Σ` or `∫ integrand(x) · weight(x)` over the space, vector-valued.
pub fn expect_vec<W, F>(
    space: &SampleSpace,
    placement: &[Placement],
    weight: W,
    integrand: F,
    rule: &ExpectationRule,
) -> Result<Vec<f64>>
where
    W: Fn(&[f64]) -> f64,
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let eval = |x: &[f64]| -> Result<Option<Vec<f64>>> {
        let w = weight(x);
        if !w.is_finite() || w < 0.0 {
            return Err(Error::non_finite(format!("weight {w} at {x:?}")));
        }
        if w == 0.0 {
            return Ok(None);
        }
        let v = integrand(x)?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::non_finite(format!("integrand at {x:?}")));
        }
        Ok(Some(v.into_iter().map(|c| c * w).collect()))
    };
    match node_set(space, placement, rule)? {
        Some(nodes) => {
            let mut acc: Vec<CompensatedSum> = Vec::new();
            for (x, omega) in &nodes {
                if let Some(v) = eval(x)? {
                    if acc.is_empty() {
                        acc = vec![CompensatedSum::default(); v.len()];
                    }
                    if acc.len() != v.len() {
                        return Err(Error::DimensionMismatch {
                            expected: acc.len(),
                            got: v.len(),
                        });
                    }
                    for (a, c) in acc.iter_mut().zip(v) {
                        a.add(omega * c);
                    }
                }
            }
            if acc.is_empty() {
                // every weight vanished; infer the output width
                let probe = integrand(&nodes[0].0)?;
                return Ok(vec![0.0; probe.len()]);
            }
            Ok(acc.iter().map(CompensatedSum::value).collect())
        }
        None => {
            let tol = match rule {
                ExpectationRule::AdaptiveQuadrature { tol } => *tol,
                _ => unreachable!(),
            };
            let k = space.outcome_dim();
            let place: Vec<Placement> = (0..k).map(|d| placement.get(d).copied().unwrap_or_default()).collect();
            let centre: Vec<f64> = place.iter().map(|p| p.center).collect();
            let width = integrand(&centre)?.len();
            let f = |x: &[f64]| eval(x).map(|o| o.unwrap_or_else(|| vec![0.0; width]));
            adaptive_nd(&f, &place, tol, &mut Vec::with_capacity(k))
        }
    }
}

/// Scalar expectation.
pub fn expect<W, F>(
    space: &SampleSpace,
    placement: &[Placement],
    weight: W,
    integrand: F,
    rule: &ExpectationRule,
) -> Result<f64>
where
    W: Fn(&[f64]) -> f64,
    F: Fn(&[f64]) -> f64,
{
    expect_vec(space, placement, weight, |x| Ok(vec![integrand(x)]), rule).map(|v| v[0])
}

/// `log Σ` / `log ∫ exp(log_weight(x))` evaluated without overflow.
pub fn log_integrate<L>(space: &SampleSpace, placement: &[Placement], log_weight: L, rule: &ExpectationRule) -> Result<f64>
where
    L: Fn(&[f64]) -> f64,
{
    match node_set(space, placement, rule)? {
        Some(nodes) => {
            let terms: Vec<f64> = nodes
                .iter()
                .map(|(x, omega)| omega.ln() + log_weight(x))
                .collect();
            if terms.iter().any(|t| t.is_nan() || *t == f64::INFINITY) {
                return Err(Error::non_finite("log-weight"));
            }
            let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                return Err(Error::non_finite("all weights vanish"));
            }
            Ok(m + compensated_sum(terms.iter().map(|t| (t - m).exp())).ln())
        }
        None => {
            let k = space.outcome_dim();
            let centre: Vec<f64> = (0..k).map(|d| placement.get(d).copied().unwrap_or_default().center).collect();
            let shift = log_weight(&centre);
            if !shift.is_finite() {
                return Err(Error::non_finite("log-weight at placement centre"));
            }
            let v = expect(space, placement, |x| (log_weight(x) - shift).exp(), |_| 1.0, rule)?;
            Ok(shift + v.ln())
        }
    }
}

// Gauss-Kronrod 7-15 on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn gk15<G>(g: &G, a: f64, b: f64) -> Result<(Vec<f64>, f64)>
where
    G: Fn(f64) -> Result<Vec<f64>>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = g(c)?;
    let width = fc.len();
    let mut kron: Vec<f64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut gauss: Vec<f64> = fc.iter().map(|v| v * WG[3]).collect();
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = g(c - dx)?;
        let f2 = g(c + dx)?;
        if f1.len() != width || f2.len() != width {
            return Err(Error::DimensionMismatch { expected: width, got: f1.len() });
        }
        for d in 0..width {
            let s = f1[d] + f2[d];
            kron[d] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[d] += WG[j / 2] * s;
            }
        }
    }
    let err = kron
        .iter()
        .zip(&gauss)
        .map(|(k, g)| ((k - g) * h).abs())
        .fold(0.0, f64::max);
    Ok((kron.into_iter().map(|v| v * h).collect(), err))
}

/// Adaptive integral over the real line via `x = c + s·t/(1−t²)`, `t ∈ (−1, 1)`.
fn adaptive_line<G>(g: &G, place: Placement, tol: f64) -> Result<Vec<f64>>
where
    G: Fn(f64) -> Result<Vec<f64>>,
{
    const MAX_SEGMENTS: usize = 4000;
    let mapped = |t: f64| -> Result<Vec<f64>> {
        let d = 1.0 - t * t;
        let x = place.center + place.scale * t / d;
        let jac = place.scale * (1.0 + t * t) / (d * d);
        let v = g(x)?;
        Ok(v.into_iter().map(|c| c * jac).collect())
    };
    let mut heap = BinaryHeap::new();
    let initial = 8;
    for i in 0..initial {
        let a = -1.0 + 2.0 * i as f64 / initial as f64;
        let b = -1.0 + 2.0 * (i + 1) as f64 / initial as f64;
        let (value, error) = gk15(&mapped, a, b)?;
        heap.push(Segment { a, b, value, error });
    }
    loop {
        let total_err: f64 = heap.iter().map(|s| s.error).sum();
        let width = heap.peek().map(|s| s.value.len()).unwrap_or(0);
        let mut total = vec![0.0; width];
        for s in heap.iter() {
            for (t, v) in total.iter_mut().zip(&s.value) {
                *t += v;
            }
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if total_err <= tol.max(tol * scale) {
            // resum in a fixed order so results do not depend on heap layout
            let mut segs = heap.into_vec();
            segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
            let mut acc = vec![CompensatedSum::default(); width];
            for s in &segs {
                for (a, v) in acc.iter_mut().zip(&s.value) {
                    a.add(*v);
                }
            }
            return Ok(acc.iter().map(CompensatedSum::value).collect());
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Divergent { tol });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Divergent { tol });
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&mapped, a, b)?;
            heap.push(Segment { a, b, value, error });
        }
    }
}

fn adaptive_nd<F>(f: &F, place: &[Placement], tol: f64, prefix: &mut Vec<f64>) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let depth = prefix.len();
    if depth + 1 == place.len() {
        let g = |x: f64| {
            let mut p = prefix.clone();
            p.push(x);
            f(&p)
        };
        return adaptive_line(&g, place[depth], tol);
    }
    let g = |x: f64| {
        let mut p = prefix.clone();
        p.push(x);
        adaptive_nd(f, place, tol, &mut p)
    };
    adaptive_line(&g, place[depth], tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn std_normal(x: &[f64]) -> f64 {
        (-0.5 * x[0] * x[0]).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn hermite_rule_small_cases() {
        let (x, w) = gauss_hermite(2);
        assert_abs_diff_eq!(x[1], 0.5f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(w[0] + w[1], std::f64::consts::PI.sqrt(), epsilon = 1e-14);
        let (x, _) = gauss_hermite(3);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[2], 1.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn hermite_rule_integrates_even_moments() {
        for n in [5, 32, 64, 100] {
            let (x, w) = gauss_hermite(n);
            let m0: f64 = w.iter().sum();
            let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
            assert_abs_diff_eq!(m0, std::f64::consts::PI.sqrt(), epsilon = 1e-12);
            assert_abs_diff_eq!(m4, 0.75 * std::f64::consts::PI.sqrt(), epsilon = 1e-11);
        }
    }

    #[test]
    fn bernoulli_mean() {
        let space = SampleSpace::finite(vec![vec![0.0], vec![1.0]]).unwrap();
        let v = expect(&space, &[], |_| 0.5, |x| x[0], &space.rule).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn normal_second_moment_hermite() {
        let space = SampleSpace::real_line(ExpectationRule::GaussHermite { nodes: 32 }).unwrap();
        let v = expect(&space, &[], std_normal, |x| x[0] * x[0], &space.rule).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn normal_second_moment_adaptive() {
        let rule = ExpectationRule::AdaptiveQuadrature { tol: 1e-10 };
        let space = SampleSpace::real_line(rule.clone()).unwrap();
        let v = expect(&space, &[], std_normal, |x| x[0] * x[0], &rule).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn product_space_normalization() {
        let rule = ExpectationRule::GaussHermite { nodes: 16 };
        let space = SampleSpace::real_k(2, rule.clone()).unwrap();
        let place = [Placement { center: 1.0, scale: 2.0 }, Placement { center: -1.0, scale: 0.5 }];
        let dens = |x: &[f64]| {
            let a = (x[0] - 1.0) / 2.0;
            let b = (x[1] + 1.0) / 0.5;
            (-0.5 * (a * a + b * b)).exp() / (2.0 * std::f64::consts::PI * 2.0 * 0.5)
        };
        let v = expect(&space, &place, dens, |x| x[0] * x[1], &rule).unwrap();
        assert_abs_diff_eq!(v, -1.0, epsilon = 1e-12);
        let adaptive = ExpectationRule::AdaptiveQuadrature { tol: 1e-9 };
        let v = expect(&space, &place, dens, |_| 1.0, &adaptive).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let rule = ExpectationRule::MonteCarlo { samples: 20000, seed: 7 };
        let space = SampleSpace::real_line(rule.clone()).unwrap();
        let a = expect(&space, &[], std_normal, |x| x[0] * x[0], &rule).unwrap();
        let b = expect(&space, &[], std_normal, |x| x[0] * x[0], &rule).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - 1.0).abs() < 0.05);
    }

    #[test]
    fn unseeded_monte_carlo_rejected() {
        let r: std::result::Result<ExpectationRule, _> =
            serde_json::from_str(r#"{"rule":"monte-carlo","samples":10}"#);
        assert!(r.is_err());
    }

    #[test]
    fn log_integrate_matches_direct() {
        let space = SampleSpace::real_line(ExpectationRule::GaussHermite { nodes: 32 }).unwrap();
        let v = log_integrate(&space, &[], |x| -0.5 * x[0] * x[0], &space.rule).unwrap();
        assert_abs_diff_eq!(v, 0.5 * (2.0 * std::f64::consts::PI).ln(), epsilon = 1e-13);
    }

    #[test]
    fn divergent_adaptive_reported() {
        let rule = ExpectationRule::AdaptiveQuadrature { tol: 1e-300 };
        let space = SampleSpace::real_line(ExpectationRule::AdaptiveQuadrature { tol: 1e-8 }).unwrap();
        let err = expect(&space, &[], |x| 1.0 / (1.0 + x[0].abs()).powf(1.01), |_| 1.0, &rule).unwrap_err();
        assert!(matches!(err, Error::Divergent { .. }));
    }

    #[test]
    fn degenerate_spaces_rejected() {
        assert!(SampleSpace::finite(vec![vec![1.0], vec![1.0]]).is_err());
        assert!(SampleSpace::real_line(ExpectationRule::ExactFiniteSum).is_err());
        assert!(SampleSpace::real_line(ExpectationRule::GaussHermite { nodes: 0 }).is_err());
    }
}
