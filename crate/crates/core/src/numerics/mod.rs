//! Differentiation, expectation and linear-solve kernels.
//!
//! Everything here is a pure function of its inputs.

mod diff;
mod domain;
mod linalg;
mod quadrature;

pub use diff::{derive, derive_vec, gradient, hessian, jacobian_vec, DiffScheme};
pub use domain::Domain;
pub use linalg::{
    condition_number, determinant, invert_metric, min_eigenvalue, rank, solve_frame, solve_frame_with_cap,
    DEFAULT_CONDITION_CAP,
};
pub use quadrature::{
    compensated_sum, expect, expect_vec, gauss_hermite, log_integrate, CompensatedSum, ExpectationRule, Placement,
    SampleSpace, SpaceKind,
};
