use std::sync::Arc;

use crate::error::Result;
use crate::immersion::{Hypersurface, Transversal};

use super::family::{PotentialFamily, ScalarFn};

/// `f(θ) = (θ, K(θ))` with `ξ = e_{n+1}`.
pub fn graph_realization(family: &PotentialFamily) -> Result<Hypersurface> {
    let n = family.dim();
    let fam = family.clone();
    Hypersurface::new(
        format!("{}-graph", family.label()),
        n,
        family.domain().clone(),
        move |t| {
            let mut f = t.to_vec();
            f.push(fam.potential(t).unwrap_or(f64::NAN));
            f
        },
        Transversal::Field(Arc::new(move |_| {
            let mut e = vec![0.0; n + 1];
            e[n] = 1.0;
            e
        })),
    )
}

/// `f(θ) = (θ, 1)/ψ(θ)` with `ξ = −f`; `ψ` defaults to `exp∘K`.
pub fn centro_affine_lift(family: &PotentialFamily, psi: Option<ScalarFn>) -> Result<Hypersurface> {
    let psi: ScalarFn = match psi {
        Some(p) => p,
        None => {
            let fam = family.clone();
            Arc::new(move |t| fam.potential(t).map(f64::exp).unwrap_or(f64::NAN))
        }
    };
    Hypersurface::new(
        format!("{}-lift", family.label()),
        family.dim(),
        family.domain().clone(),
        move |t| {
            let s = psi(t);
            t.iter().map(|v| v / s).chain(std::iter::once(1.0 / s)).collect()
        },
        Transversal::CentroAffine,
    )
}
