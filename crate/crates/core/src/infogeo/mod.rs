//! Fisher metric, α-connections, curvature and duality structure of a
//! statistical model, all in the model's own coordinates.
//!
//! Array conventions: `Γ^k_ij` and `Γ_ij,k` are both stored as `[[i, j, k]]`,
//! `R^l_ijk` as `[[l, i, j, k]]`.

mod checks;
mod fields;
mod tensors;

pub use checks::{flatness_check, flatness_check_with, FlatnessPoint, FlatnessReport, CURVATURE_TOLERANCE};
pub use fields::{
    alpha_connection, alpha_field, fisher_metric, levi_civita_field, score_moments, ConnectionField, MetricField,
    Provenance, ScoreMoments, TensorFn,
};
pub use tensors::{
    codazzi_check, codazzi_residual, conformal_at, conformal_transform, conjugate_connection, conjugate_field,
    conjugate_lower, curvature, curvature_duality_residual, lower_connection, nabla_h_from, projective_change,
    projective_equivalence, raise_connection, ricci_from, riemann_from, torsion_from, CurvaturePack, ProjectiveReport,
};
