//! Numerical differential geometry of statistical models and affine
//! hypersurface immersions.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: finite differences, expectations, frame solves.
//! - [`models`]: statistical models and the built-in catalog.
//! - [`infogeo`]: Fisher metric, α-connections, curvature, duality checks.
//! - [`immersion`]: induced data of hypersurface immersions.
//! - [`dualflat`]: exponential-family potentials, Legendre duality, geodesics
//!   and the graph / centro-affine realizations.
//! - [`submanifold`]: embedding curvature, autoparallelism, slices.
//! - [`cli`]: batch runner behind the `igeo` binary.

pub mod cli;
pub mod dualflat;
pub mod error;
pub mod expr;
pub mod immersion;
pub mod infogeo;
pub mod models;
pub mod numerics;
pub mod submanifold;

pub use error::{Error, Result};
