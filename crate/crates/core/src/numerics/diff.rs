//! Central finite differences with Richardson extrapolation.
//!
//! Mixed partials are built as tensor products of one-dimensional central
//! stencils, one per distinct coordinate in the multi-index. Every stencil is
//! symmetric, so the truncation error expands in even powers of the step and
//! each Richardson level removes one more power of `h^2`.

use serde::{Deserialize, Serialize};

use super::domain::Domain;
use crate::error::{Error, Result};

/// Finite-difference configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffScheme {
    /// Highest derivative order this scheme may be asked for (1..=3).
    pub order: usize,
    /// Base step before scaling by `max(1, |x_i|)`. `None` picks the
    /// truncation/round-off optimum for the requested order.
    pub base_step: Option<f64>,
    pub richardson_levels: usize,
}

impl Default for DiffScheme {
    fn default() -> Self {
        DiffScheme {
            order: 3,
            base_step: None,
            richardson_levels: 1,
        }
    }
}

impl DiffScheme {
    pub fn new(order: usize, richardson_levels: usize) -> Self {
        DiffScheme {
            order,
            base_step: None,
            richardson_levels,
        }
    }

    /// Scheme for differentiating fields that are themselves computed by
    /// finite differences or quadrature. The larger step keeps the inner
    /// round-off from dominating; two extrapolation levels recover accuracy.
    pub fn nested() -> Self {
        DiffScheme {
            order: 3,
            base_step: Some(2e-2),
            richardson_levels: 2,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.base_step = Some(step);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.order) {
            return Err(Error::InvalidConfig(format!(
                "difference order must be in 1..=3, got {}",
                self.order
            )));
        }
        if let Some(h) = self.base_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidConfig(format!("base step must be > 0, got {h}")));
            }
        }
        Ok(())
    }

    /// Unscaled step for a derivative of total order `k`.
    ///
    /// A central stencil of order `k` after `L` extrapolation levels has
    /// truncation `O(h^(2+2L))` and round-off `O(eps/h^k)`; the optimum is
    /// `eps^(1/(k+2+2L))`.
    pub fn base_step_for(&self, k: usize) -> f64 {
        match self.base_step {
            Some(h) => h,
            None => {
                let p = (k + 2 + 2 * self.richardson_levels) as f64;
                // the wider third-order stencil amplifies round-off more
                let widen = if k >= 3 { 2.0 } else { 1.0 };
                widen * f64::EPSILON.powf(1.0 / p)
            }
        }
    }

    /// Largest offset (in units of the scaled step) any node may reach.
    pub fn radius(&self, point: &[f64], multi_index: &[usize]) -> Vec<f64> {
        let base = self.base_step_for(multi_index.len());
        point
            .iter()
            .map(|x| base * x.abs().max(1.0))
            .enumerate()
            .map(|(i, h)| {
                let reach = match multi_index.iter().filter(|&&c| c == i).count() {
                    0 => 0.0,
                    3 => 2.0,
                    _ => 1.0,
                };
                h * reach
            })
            .collect()
    }
}

/// One-dimensional central stencil for a derivative of order `count`:
/// (offset multiples of h, coefficient before dividing by h^count).
fn stencil_1d(count: usize) -> &'static [(f64, f64)] {
    match count {
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        _ => unreachable!("stencil order checked by caller"),
    }
}

fn check_finite(values: &[f64], at: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::non_finite(format!("function value at {at:?}")))
    }
}

/// Plain (unextrapolated) tensor-product stencil with scaled steps `h`.
fn stencil_estimate<F>(
    f: &F,
    point: &[f64],
    groups: &[(usize, usize)],
    h: &[f64],
    domain: Option<&Domain>,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut acc: Option<Vec<f64>> = None;
    let mut node = point.to_vec();
    let mut visit = |node: &[f64], coef: f64| -> Result<()> {
        if let Some(d) = domain {
            if !d.contains(node) {
                return Err(Error::StencilOutOfDomain { node: node.to_vec() });
            }
        }
        let v = f(node)?;
        check_finite(&v, node)?;
        let acc = acc.get_or_insert_with(|| vec![0.0; v.len()]);
        if acc.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: acc.len(),
                got: v.len(),
            });
        }
        for (a, x) in acc.iter_mut().zip(v) {
            *a += coef * x;
        }
        Ok(())
    };
    walk(groups, 0, &mut node, point, h, 1.0, &mut visit)?;
    let mut out = acc.unwrap_or_default();
    let denom: f64 = groups.iter().map(|&(c, k)| h[c].powi(k as i32)).product();
    for v in out.iter_mut() {
        *v /= denom;
    }
    Ok(out)
}

fn walk<V>(
    groups: &[(usize, usize)],
    level: usize,
    node: &mut Vec<f64>,
    point: &[f64],
    h: &[f64],
    coef: f64,
    visit: &mut V,
) -> Result<()>
where
    V: FnMut(&[f64], f64) -> Result<()>,
{
    if level == groups.len() {
        return visit(node, coef);
    }
    let (coord, count) = groups[level];
    for &(off, c) in stencil_1d(count) {
        node[coord] = point[coord] + off * h[coord];
        walk(groups, level + 1, node, point, h, coef * c, visit)?;
    }
    node[coord] = point[coord];
    Ok(())
}

/// Mixed partial of a vector-valued field, Richardson-extrapolated.
pub fn derive_vec<F>(
    f: F,
    point: &[f64],
    multi_index: &[usize],
    scheme: &DiffScheme,
    domain: Option<&Domain>,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    scheme.validate()?;
    if multi_index.len() > scheme.order {
        return Err(Error::InvalidConfig(format!(
            "multi-index of length {} exceeds scheme order {}",
            multi_index.len(),
            scheme.order
        )));
    }
    if let Some(&bad) = multi_index.iter().find(|&&i| i >= point.len()) {
        return Err(Error::InvalidConfig(format!(
            "coordinate index {bad} out of range for a point of dimension {}",
            point.len()
        )));
    }
    if multi_index.is_empty() {
        if let Some(d) = domain {
            if !d.contains(point) {
                return Err(Error::StencilOutOfDomain { node: point.to_vec() });
            }
        }
        let v = f(point)?;
        check_finite(&v, point)?;
        return Ok(v);
    }

    let mut groups: Vec<(usize, usize)> = Vec::new();
    for &i in multi_index {
        match groups.iter_mut().find(|(c, _)| *c == i) {
            Some(g) => g.1 += 1,
            None => groups.push((i, 1)),
        }
    }
    groups.sort_unstable();

    let base = scheme.base_step_for(multi_index.len());
    let h0: Vec<f64> = point.iter().map(|x| base * x.abs().max(1.0)).collect();

    // Richardson table: row r holds estimates at h/2^r extrapolated c times.
    let mut prev_row: Vec<Vec<f64>> = Vec::new();
    for r in 0..=scheme.richardson_levels {
        let scale = 0.5f64.powi(r as i32);
        let h: Vec<f64> = h0.iter().map(|v| v * scale).collect();
        let mut row = vec![stencil_estimate(&f, point, &groups, &h, domain)?];
        for c in 1..=r {
            let factor = 4f64.powi(c as i32);
            let next: Vec<f64> = row[c - 1]
                .iter()
                .zip(&prev_row[c - 1])
                .map(|(fine, coarse)| (factor * fine - coarse) / (factor - 1.0))
                .collect();
            row.push(next);
        }
        prev_row = row;
    }
    Ok(prev_row.pop().unwrap_or_default())
}

/// Mixed partial of a scalar field.
pub fn derive<F>(
    f: F,
    point: &[f64],
    multi_index: &[usize],
    scheme: &DiffScheme,
    domain: Option<&Domain>,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    derive_vec(|x| Ok(vec![f(x)]), point, multi_index, scheme, domain).map(|v| v[0])
}

/// Gradient of a scalar field.
pub fn gradient<F>(f: F, point: &[f64], scheme: &DiffScheme, domain: Option<&Domain>) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    (0..point.len())
        .map(|i| derive(&f, point, &[i], scheme, domain))
        .collect()
}

/// Hessian of a scalar field, symmetric by construction.
pub fn hessian<F>(f: F, point: &[f64], scheme: &DiffScheme, domain: Option<&Domain>) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> f64,
{
    let n = point.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = derive(&f, point, &[i, j], scheme, domain)?;
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// First partials of a vector field: `out[i]` is the derivative along coordinate `i`.
pub fn jacobian_vec<F>(f: F, point: &[f64], scheme: &DiffScheme, domain: Option<&Domain>) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    (0..point.len())
        .map(|i| derive_vec(&f, point, &[i], scheme, domain))
        .collect()
}
