//! Exponential-family potentials, Legendre duality, geodesics, and affine
//! realizations of dually flat structures.

mod family;
mod geodesic;
mod realize;
mod schema;

pub use family::{
    bernoulli_family, categorical_family, family, family_grid, family_names, normal_family, poisson_family,
    DualPoint, PotentialFamily, ScalarFn, StatsFn, NEWTON_MAX_ITERATIONS,
};
pub use geodesic::{geodesic, GeodesicPath};
pub use realize::{centro_affine_lift, graph_realization};
pub use schema::{load_family, FamilyDoc, FamilyRef};
