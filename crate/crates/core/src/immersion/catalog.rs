use std::sync::Arc;

use super::{Hypersurface, Transversal};
use crate::error::{Error, Result};
use crate::numerics::Domain;

const NAMES: &[&str] = &["sphere", "scaled-sphere", "paraboloid", "plane", "tilted-paraboloid"];

pub fn surface_names() -> &'static [&'static str] {
    NAMES
}

pub fn surface_by_name(name: &str) -> Result<Hypersurface> {
    match name {
        "sphere" => Ok(sphere(1.0)),
        "scaled-sphere" => Ok(sphere(2.0)),
        "paraboloid" => Ok(paraboloid()),
        "plane" => Ok(plane()),
        "tilted-paraboloid" => Ok(tilted_paraboloid(0.3)),
        other => Err(Error::UnknownSymbol(format!("builtin surface `{other}`"))),
    }
}

/// Upper hemisphere of radius `r` as a graph over the disc, `ξ = −f`.
pub fn sphere(r: f64) -> Hypersurface {
    let w = 0.6 * r;
    Hypersurface::new(
        if r == 1.0 { "sphere".to_string() } else { format!("sphere-r{r}") },
        2,
        Domain::open_box(vec![-w; 2], vec![w; 2]),
        move |u| vec![u[0], u[1], (r * r - u[0] * u[0] - u[1] * u[1]).sqrt()],
        Transversal::CentroAffine,
    )
    .expect("static surface")
}

/// `x₃ = ½(x₁² + x₂²)` with `ξ = e₃`.
pub fn paraboloid() -> Hypersurface {
    Hypersurface::new(
        "paraboloid",
        2,
        Domain::unbounded(2),
        |u| vec![u[0], u[1], 0.5 * (u[0] * u[0] + u[1] * u[1])],
        Transversal::Field(Arc::new(|_| vec![0.0, 0.0, 1.0])),
    )
    .expect("static surface")
}

/// The plane `x₃ = 1` with the centro-affine transversal.
pub fn plane() -> Hypersurface {
    Hypersurface::new(
        "plane",
        2,
        Domain::unbounded(2),
        |u| vec![u[0], u[1], 1.0],
        Transversal::CentroAffine,
    )
    .expect("static surface")
}

/// Paraboloid with the non-equiaffine transversal `ξ = e₃ + a·(u₁, 0, 0)`.
pub fn tilted_paraboloid(a: f64) -> Hypersurface {
    let w = 0.9 / a.abs().max(1e-12).sqrt();
    Hypersurface::new(
        "tilted-paraboloid",
        2,
        Domain::open_box(vec![-w; 2], vec![w; 2]),
        |u| vec![u[0], u[1], 0.5 * (u[0] * u[0] + u[1] * u[1])],
        Transversal::Field(Arc::new(move |u| vec![a * u[0], 0.0, 1.0])),
    )
    .expect("static surface")
}
