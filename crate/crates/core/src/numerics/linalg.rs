use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

use crate::error::{Error, Result};

/// Frames whose 2-norm condition estimate exceeds this count as singular.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

pub(crate) fn to_dmatrix(a: &Array2<f64>) -> DMatrix<f64> {
    let (r, c) = a.dim();
    DMatrix::from_fn(r, c, |i, j| a[[i, j]])
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Ratio of extreme singular values (`inf` when rank-deficient).
pub fn condition_number(a: &Array2<f64>) -> f64 {
    let m = to_dmatrix(a);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

fn solve_checked(m: DMatrix<f64>, rhs: &[f64], cap: f64) -> std::result::Result<Vec<f64>, f64> {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(cond <= cap) {
        return Err(cond);
    }
    let b = DVector::from_column_slice(rhs);
    match m.lu().solve(&b) {
        Some(x) => Ok(x.iter().cloned().collect()),
        None => Err(f64::INFINITY),
    }
}

/// Coefficients `c` with `Σ c_i · columns[i] = rhs`.
pub fn solve_frame(columns: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    solve_frame_with_cap(columns, rhs, DEFAULT_CONDITION_CAP)
}

pub fn solve_frame_with_cap(columns: &[Vec<f64>], rhs: &[f64], cap: f64) -> Result<Vec<f64>> {
    let n = rhs.len();
    if columns.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: columns.len(),
        });
    }
    if let Some(bad) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let m = DMatrix::from_fn(n, n, |i, j| columns[j][i]);
    solve_checked(m, rhs, cap).map_err(|condition| Error::SingularFrame { condition })
}

/// Inverse of a metric matrix, rejecting ill-conditioned input.
pub fn invert_metric(g: &Array2<f64>) -> Result<Array2<f64>> {
    let cond = condition_number(g);
    if !(cond <= DEFAULT_CONDITION_CAP) {
        return Err(Error::SingularMetric { condition: cond });
    }
    to_dmatrix(g)
        .try_inverse()
        .map(|m| from_dmatrix(&m))
        .ok_or(Error::SingularMetric {
            condition: f64::INFINITY,
        })
}

pub fn determinant(a: &Array2<f64>) -> f64 {
    to_dmatrix(a).determinant()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &Array2<f64>) -> f64 {
    let m = to_dmatrix(a);
    let sym = (&m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Numerical rank at relative threshold `rtol`.
pub fn rank(a: &Array2<f64>, rtol: f64) -> usize {
    let sv = to_dmatrix(a).singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > rtol * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn identity_frame() {
        let c = solve_frame(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[3.0, 4.0]).unwrap();
        assert_eq!(c, vec![3.0, 4.0]);
    }

    #[test]
    fn sheared_frame() {
        let c = solve_frame(&[vec![1.0, 0.0], vec![1.0, 1.0]], &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(c[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_frame_rejected() {
        let err = solve_frame(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::SingularFrame { .. }));
        let err = solve_frame(&[vec![1.0, 0.0], vec![0.0, 1e-14]], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::SingularFrame { .. }));
    }

    #[test]
    fn metric_inverse() {
        let g = array![[2.0, 0.0], [0.0, 4.0]];
        let gi = invert_metric(&g).unwrap();
        assert_abs_diff_eq!(gi[[0, 0]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(gi[[1, 1]], 0.25, epsilon = 1e-15);
        assert!(invert_metric(&array![[1.0, 1.0], [1.0, 1.0]]).is_err());
        assert_abs_diff_eq!(min_eigenvalue(&g), 2.0, epsilon = 1e-14);
        assert_eq!(rank(&array![[1.0, 1.0], [1.0, 1.0]], 1e-10), 1);
    }
}
