use thiserror::Error;

/// Errors raised by the numerical kernels and the geometry built on them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("stencil node {node:?} leaves the declared domain")]
    StencilOutOfDomain { node: Vec<f64> },

    #[error("non-finite value encountered: {context}")]
    NonFinite { context: String },

    #[error("adaptive quadrature did not converge to tolerance {tol:e}")]
    Divergent { tol: f64 },

    #[error("frame matrix is singular (condition estimate {condition:e})")]
    SingularFrame { condition: f64 },

    #[error("metric is singular (condition estimate {condition:e})")]
    SingularMetric { condition: f64 },

    #[error("point {point:?} lies outside the parameter domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("affine fundamental form is degenerate (|det h| = {det:e})")]
    DegenerateH { det: f64 },

    #[error("root finding failed to converge after {iterations} iterations")]
    NonConvergent { iterations: usize },

    #[error("dual coordinates {eta:?} are outside the image of the gradient map")]
    OutOfDualDomain { eta: Vec<f64> },

    #[error("geodesic left the domain at t = {t}")]
    LeftDomain {
        t: f64,
        partial: Box<crate::dualflat::GeodesicPath>,
    },

    #[error("embedding Jacobian has rank {rank} < {expected}")]
    RankDeficientB { rank: usize, expected: usize },

    #[error("slice leaves no free coordinates")]
    EmptyFree,

    #[error("slice fixes no coordinates")]
    EmptyFixed,

    #[error("slice constants are incompatible with the domain: {0}")]
    IncompatibleConstants(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }

    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}
