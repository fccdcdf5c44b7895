use std::sync::Arc;

use crate::dualflat::PotentialFamily;
use crate::error::{Error, Result};
use crate::numerics::Domain;

use super::SubmanifoldEmbedding;

/// A coordinate slice `{θ_i = C_i, i ∈ II}` as an embedding and as a family
/// in the free coordinates.
#[derive(Debug, Clone)]
pub struct Slice {
    pub embedding: SubmanifoldEmbedding,
    pub family: PotentialFamily,
    pub fixed: Vec<usize>,
    pub free: Vec<usize>,
    pub constants: Vec<f64>,
}

fn assemble(n: usize, free: &[usize], fixed: &[usize], constants: &[f64], u: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; n];
    for (i, v) in free.iter().zip(u) {
        t[*i] = *v;
    }
    for (i, c) in fixed.iter().zip(constants) {
        t[*i] = *c;
    }
    t
}

/// Fixes the coordinates `fixed` (0-based) at `constants`. The derived family
/// has statistics `F_j, j ∉ II`, and base `D + Σ_{i∈II} C_i F_i`.
pub fn slice(family: &PotentialFamily, fixed: &[usize], constants: &[f64]) -> Result<Slice> {
    let n = family.dim();
    if fixed.is_empty() {
        return Err(Error::EmptyFixed);
    }
    if fixed.len() != constants.len() {
        return Err(Error::DimensionMismatch {
            expected: fixed.len(),
            got: constants.len(),
        });
    }
    let mut sorted = fixed.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != fixed.len() || sorted.iter().any(|i| *i >= n) {
        return Err(Error::InvalidConfig(format!("fixed indices {fixed:?} must be distinct and below {n}")));
    }
    let free: Vec<usize> = (0..n).filter(|i| !fixed.contains(i)).collect();
    if free.is_empty() {
        return Err(Error::EmptyFree);
    }
    if constants.iter().any(|c| !c.is_finite()) {
        return Err(Error::IncompatibleConstants(format!("{constants:?} are not finite")));
    }

    let (fx, cs, fr) = (fixed.to_vec(), constants.to_vec(), free.clone());
    let domain = match family.domain().bounds() {
        Some((lo, hi)) => {
            for (i, c) in fixed.iter().zip(constants) {
                if !(lo[*i] < *c && *c < hi[*i]) {
                    return Err(Error::IncompatibleConstants(format!(
                        "θ_{i} = {c} lies outside ({}, {})",
                        lo[*i], hi[*i]
                    )));
                }
            }
            Domain::open_box(free.iter().map(|i| lo[*i]).collect(), free.iter().map(|i| hi[*i]).collect())
        }
        None => {
            let probe = assemble(n, &free, fixed, constants, &free.iter().map(|i| family.reference()[*i]).collect::<Vec<_>>());
            if !family.domain().contains(&probe) {
                return Err(Error::IncompatibleConstants(format!(
                    "{probe:?} lies outside the domain"
                )));
            }
            let (d, fx, cs, fr) = (family.domain().clone(), fx.clone(), cs.clone(), fr.clone());
            Domain::predicate(free.len(), move |u| d.contains(&assemble(n, &fr, &fx, &cs, u)))
        }
    };

    let reference: Vec<f64> = free.iter().map(|i| family.reference()[*i]).collect();
    let label = format!(
        "{}|{}",
        family.label(),
        fixed
            .iter()
            .zip(constants)
            .map(|(i, c)| format!("θ{i}={c}"))
            .collect::<Vec<_>>()
            .join(",")
    );

    let (stats, base) = (family.stats_fn(), family.base_fn());
    let (fx2, cs2, fr2) = (fx.clone(), cs.clone(), fr.clone());
    let (stats2, fr3) = (stats.clone(), fr.clone());
    let mut derived = PotentialFamily::new(
        label.clone(),
        free.len(),
        family.space().clone(),
        domain.clone(),
        reference,
        move |x| {
            let f = stats2(x);
            fr3.iter().map(|i| f[*i]).collect()
        },
        move |x| {
            let f = stats(x);
            base(x) + fx2.iter().zip(&cs2).map(|(i, c)| c * f[*i]).sum::<f64>()
        },
    )
    .map_err(|e| Error::IncompatibleConstants(e.to_string()))?;
    if let Some(p) = family.placement_fn() {
        let (fx, cs, fr) = (fx.clone(), cs.clone(), fr2);
        derived = derived.with_placement_fn(Some(Arc::new(move |u: &[f64]| p(&assemble(n, &fr, &fx, &cs, u)))));
    }

    let embedding = SubmanifoldEmbedding::new(label, family.model(), domain, move |u| assemble(n, &fr, &fx, &cs, u))?;
    Ok(Slice {
        embedding,
        family: derived,
        fixed: fixed.to_vec(),
        free,
        constants: constants.to_vec(),
    })
}
