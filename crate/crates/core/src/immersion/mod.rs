//! Affine hypersurface immersions `f: U ⊂ R^n → R^{n+1}` with a transversal
//! field `ξ`, and the data they induce on `U`.
//!
//! Sign convention: a centro-affine transversal is `ξ = −f`, pointing from the
//! surface toward the origin.

mod catalog;
mod checks;
mod schema;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

pub use catalog::{paraboloid, plane, sphere, surface_names, surface_by_name, tilted_paraboloid};
pub use checks::{
    classify, induced_fields, induced_volume_check, statistical_structure, structural_check, ImmersionFlags,
    StatisticalStructure, StructurePoint, StructuralResiduals, VolumeCheck, IMMERSION_TOLERANCE,
};
pub use schema::{load_surface, SurfaceDoc, TransversalSpec};

use crate::error::{Error, Result};
use crate::numerics::{self, solve_frame, DiffScheme, Domain};

pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Transversal vector field along the immersion.
#[derive(Clone)]
pub enum Transversal {
    /// `ξ = −f`.
    CentroAffine,
    Field(VectorFn),
}

impl fmt::Debug for Transversal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transversal::CentroAffine => f.write_str("CentroAffine"),
            Transversal::Field(_) => f.write_str("Field(..)"),
        }
    }
}

#[derive(Clone)]
pub struct Hypersurface {
    label: String,
    dim: usize,
    chart: VectorFn,
    transversal: Transversal,
    domain: Domain,
}

impl fmt::Debug for Hypersurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypersurface")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("transversal", &self.transversal)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Induced data at one chart point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionData {
    pub u: Vec<f64>,
    /// `Γ^k_ij` as `[[i, j, k]]`.
    pub gamma: Array3<f64>,
    /// Affine fundamental form `h_ij`.
    pub h: Array2<f64>,
    /// Shape operator as a matrix, `shape[[k, i]] = S^k_i`.
    pub shape: Array2<f64>,
    /// Transversal connection form `α_i`.
    pub alpha: Vec<f64>,
    /// `det[∂_1f … ∂_nf ξ]`.
    pub eta: f64,
}

impl ImmersionData {
    fn pack(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.gamma.iter().cloned().collect();
        v.extend(self.h.iter());
        v.extend(self.shape.iter());
        v.extend(&self.alpha);
        v.push(self.eta);
        v
    }

    fn unpack(n: usize, u: &[f64], v: &[f64]) -> Self {
        let (a, b, c) = (n * n * n, n * n * n + n * n, n * n * n + 2 * n * n);
        ImmersionData {
            u: u.to_vec(),
            gamma: Array3::from_shape_vec((n, n, n), v[..a].to_vec()).expect("shape"),
            h: Array2::from_shape_vec((n, n), v[a..b].to_vec()).expect("shape"),
            shape: Array2::from_shape_vec((n, n), v[b..c].to_vec()).expect("shape"),
            alpha: v[c..c + n].to_vec(),
            eta: v[c + n],
        }
    }
}

impl Hypersurface {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        domain: Domain,
        chart: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        transversal: Transversal,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("surface dimension must be >= 1".into()));
        }
        if domain.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: domain.dim(),
            });
        }
        Ok(Hypersurface {
            label: label.into(),
            dim,
            chart: Arc::new(chart),
            transversal,
            domain,
        })
    }

    /// Same chart with `ξ` replaced by `c·ξ`.
    pub fn rescaled(&self, c: f64) -> Self {
        let chart = self.chart.clone();
        let xi = match &self.transversal {
            Transversal::CentroAffine => {
                let ch = chart.clone();
                Transversal::Field(Arc::new(move |u: &[f64]| ch(u).iter().map(|v| -c * v).collect()))
            }
            Transversal::Field(x) => {
                let x = x.clone();
                Transversal::Field(Arc::new(move |u: &[f64]| x(u).iter().map(|v| c * v).collect()))
            }
        };
        Hypersurface {
            label: format!("{}*{c}", self.label),
            dim: self.dim,
            chart,
            transversal: xi,
            domain: self.domain.clone(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn transversal(&self) -> &Transversal {
        &self.transversal
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        if !self.domain.contains(u) {
            return Err(Error::OutOfDomain { point: u.to_vec() });
        }
        Ok(())
    }

    pub fn position(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        let f = (self.chart)(u);
        if f.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dim + 1,
                got: f.len(),
            });
        }
        Ok(f)
    }

    pub fn xi(&self, u: &[f64]) -> Result<Vec<f64>> {
        match &self.transversal {
            Transversal::CentroAffine => Ok(self.position(u)?.iter().map(|v| -v).collect()),
            Transversal::Field(x) => {
                self.check(u)?;
                let v = x(u);
                if v.len() != self.dim + 1 {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim + 1,
                        got: v.len(),
                    });
                }
                Ok(v)
            }
        }
    }

    fn chart_scheme() -> DiffScheme {
        DiffScheme::new(2, 2)
    }

    /// Induced connection, fundamental form, shape operator, α and η at `u`.
    pub fn decompose(&self, u: &[f64]) -> Result<ImmersionData> {
        self.check(u)?;
        let n = self.dim;
        let s = Self::chart_scheme();
        let dom = Some(&self.domain);
        let pos = |x: &[f64]| self.position(x);
        let df = numerics::jacobian_vec(pos, u, &s, dom)?;
        let xi = self.xi(u)?;
        let dxi: Vec<Vec<f64>> = match &self.transversal {
            Transversal::CentroAffine => df.iter().map(|c| c.iter().map(|v| -v).collect()).collect(),
            Transversal::Field(_) => numerics::jacobian_vec(|x| self.xi(x), u, &s, dom)?,
        };
        let mut frame = df.clone();
        frame.push(xi);

        let mut gamma = Array3::zeros((n, n, n));
        let mut h = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let d2 = numerics::derive_vec(pos, u, &[i, j], &s, dom)?;
                let c = solve_frame(&frame, &d2)?;
                for k in 0..n {
                    gamma[[i, j, k]] = c[k];
                    gamma[[j, i, k]] = c[k];
                }
                h[[i, j]] = c[n];
                h[[j, i]] = c[n];
            }
        }
        let mut shape = Array2::zeros((n, n));
        let mut alpha = vec![0.0; n];
        for i in 0..n {
            let c = solve_frame(&frame, &dxi[i])?;
            for k in 0..n {
                shape[[k, i]] = -c[k];
            }
            alpha[i] = c[n];
        }
        let m = ndarray::Array2::from_shape_fn((n + 1, n + 1), |(r, col)| frame[col][r]);
        Ok(ImmersionData {
            u: u.to_vec(),
            gamma,
            h,
            shape,
            alpha,
            eta: numerics::determinant(&m),
        })
    }

    /// First partials of every decomposition output: `out[i]` is `∂_i` of the data.
    pub(crate) fn decompose_derivative(&self, u: &[f64]) -> Result<(ImmersionData, Vec<ImmersionData>)> {
        let n = self.dim;
        let base = self.decompose(u)?;
        let scheme = DiffScheme::nested();
        let packed = |x: &[f64]| self.decompose(x).map(|d| d.pack());
        let partials = (0..n)
            .map(|i| {
                numerics::derive_vec(packed, u, &[i], &scheme, Some(&self.domain))
                    .map(|v| ImmersionData::unpack(n, u, &v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((base, partials))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
        it.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn sphere_shape_is_identity() {
        let s = sphere(1.0);
        for u in [[0.0, 0.0], [0.3, -0.2], [-0.45, 0.4]] {
            let d = s.decompose(&u).unwrap();
            assert!(max_abs((&d.shape - &Array2::<f64>::eye(2)).iter()) < 1e-9, "{:?}", d.shape);
            assert!(max_abs(&d.alpha) < 1e-9);
        }
    }

    #[test]
    fn sphere_frame_at_the_pole() {
        // ∂₁∂₁f = (0,0,−1) = ξ at the north pole
        let d = sphere(1.0).decompose(&[0.0, 0.0]).unwrap();
        assert!(d.gamma[[0, 0, 0]].abs() < 1e-9 && d.gamma[[0, 0, 1]].abs() < 1e-9);
        assert!((d.h[[0, 0]] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn paraboloid_data_is_constant() {
        let p = paraboloid();
        let d = p.decompose(&[0.4, -0.7]).unwrap();
        assert!(max_abs(d.gamma.iter()) < 1e-9);
        assert!(max_abs((&d.h - &Array2::<f64>::eye(2)).iter()) < 1e-9);
        assert!(max_abs(d.shape.iter()) < 1e-9);
        assert!(max_abs(&d.alpha) < 1e-9);
        assert!((d.eta - 1.0).abs() < 1e-9);
    }

    #[test]
    fn plane_is_degenerate() {
        let d = plane().decompose(&[0.2, 0.1]).unwrap();
        assert!(max_abs(d.h.iter()) < 1e-9);
    }

    #[test]
    fn tangent_transversal_is_singular() {
        let s = Hypersurface::new(
            "bad",
            2,
            Domain::unbounded(2),
            |u| vec![u[0], u[1], 0.0],
            Transversal::Field(Arc::new(|_| vec![1.0, 0.0, 0.0])),
        )
        .unwrap();
        assert!(matches!(s.decompose(&[0.0, 0.0]), Err(Error::SingularFrame { .. })));
    }

    #[test]
    fn decomposition_reconstructs_second_derivatives() {
        let s = sphere(1.0);
        let u = [0.25, -0.35];
        let d = s.decompose(&u).unwrap();
        let sch = DiffScheme::new(2, 2);
        let pos = |x: &[f64]| s.position(x);
        let df = numerics::jacobian_vec(pos, &u, &sch, None).unwrap();
        let xi = s.xi(&u).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let d2 = numerics::derive_vec(pos, &u, &[i, j], &sch, None).unwrap();
                for r in 0..3 {
                    let rec = d.gamma[[i, j, 0]] * df[0][r] + d.gamma[[i, j, 1]] * df[1][r] + d.h[[i, j]] * xi[r];
                    assert!((rec - d2[r]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn rescaling_the_transversal() {
        let s = sphere(1.0);
        let u = [0.1, 0.2];
        let d = s.decompose(&u).unwrap();
        let d2 = s.rescaled(2.5).decompose(&u).unwrap();
        assert!(max_abs((&d2.h * 2.5 - &d.h).iter()) < 1e-9);
        assert!(max_abs((&d2.gamma - &d.gamma).iter()) < 1e-9);
    }
}
