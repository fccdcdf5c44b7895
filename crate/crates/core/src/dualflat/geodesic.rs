use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infogeo::ConnectionField;

/// Sampled solution of `θ̈^k + Γ^k_ij θ̇^i θ̇^j = 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub t: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl GeodesicPath {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn end(&self) -> Option<&[f64]> {
        self.points.last().map(|p| p.as_slice())
    }
}

fn acceleration(conn: &ConnectionField, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let g = conn.upper(x)?;
    let n = x.len();
    let mut a = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let vv = v[i] * v[j];
            for (k, ak) in a.iter_mut().enumerate() {
                *ak -= g[[i, j, k]] * vv;
            }
        }
    }
    Ok(a)
}

fn axpy(x: &[f64], h: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + h * b).collect()
}

/// Classical RK4 with `steps` equal steps on `[0, t_final]`.
pub fn geodesic(conn: &ConnectionField, theta0: &[f64], v0: &[f64], t_final: f64, steps: usize) -> Result<GeodesicPath> {
    let n = conn.dim();
    if theta0.len() != n || v0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if theta0.len() != n { theta0.len() } else { v0.len() },
        });
    }
    if steps == 0 || !t_final.is_finite() {
        return Err(Error::InvalidConfig("geodesic needs steps >= 1 and a finite end time".into()));
    }
    if !conn.domain().contains(theta0) {
        return Err(Error::OutOfDomain { point: theta0.to_vec() });
    }
    let h = t_final / steps as f64;
    let mut path = GeodesicPath {
        t: vec![0.0],
        points: vec![theta0.to_vec()],
        velocities: vec![v0.to_vec()],
    };
    let (mut x, mut v) = (theta0.to_vec(), v0.to_vec());
    for s in 0..steps {
        let t = s as f64 * h;
        let stage = |x: &[f64], v: &[f64]| -> Result<Vec<f64>> {
            if !conn.domain().contains(x) {
                return Err(Error::OutOfDomain { point: x.to_vec() });
            }
            acceleration(conn, x, v)
        };
        let step = (|| -> Result<(Vec<f64>, Vec<f64>)> {
            let a1 = stage(&x, &v)?;
            let (x2, v2) = (axpy(&x, h / 2.0, &v), axpy(&v, h / 2.0, &a1));
            let a2 = stage(&x2, &v2)?;
            let (x3, v3) = (axpy(&x, h / 2.0, &v2), axpy(&v, h / 2.0, &a2));
            let a3 = stage(&x3, &v3)?;
            let (x4, v4) = (axpy(&x, h, &v3), axpy(&v, h, &a3));
            let a4 = stage(&x4, &v4)?;
            let xn = (0..n).map(|i| x[i] + h / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i])).collect::<Vec<_>>();
            let vn = (0..n).map(|i| v[i] + h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i])).collect::<Vec<_>>();
            if xn.iter().chain(&vn).any(|c| !c.is_finite()) {
                return Err(Error::non_finite("geodesic state"));
            }
            if !conn.domain().contains(&xn) {
                return Err(Error::OutOfDomain { point: xn });
            }
            Ok((xn, vn))
        })();
        match step {
            Ok((xn, vn)) => {
                x = xn;
                v = vn;
                path.t.push(t + h);
                path.points.push(x.clone());
                path.velocities.push(v.clone());
            }
            Err(Error::OutOfDomain { .. }) => {
                return Err(Error::LeftDomain {
                    t,
                    partial: Box::new(path),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualflat::normal_family;
    use crate::infogeo::{alpha_field, fisher_metric, ConnectionField, Provenance};
    use crate::models::builtin;
    use crate::numerics::Domain;
    use ndarray::Array3;

    #[test]
    fn zero_connection_gives_lines() {
        let c = ConnectionField::zero(2, Domain::unbounded(2));
        let p = geodesic(&c, &[1.0, 2.0], &[0.5, -1.0], 2.0, 10).unwrap();
        assert_eq!(p.len(), 11);
        let end = p.end().unwrap();
        assert!((end[0] - 2.0).abs() < 1e-14 && (end[1] - 0.0).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_exponential_flow() {
        // x'' = -x'^2 has x(t) = ln(1 + t) from x = 0, x' = 1
        let c = ConnectionField::from_upper(1, Domain::unbounded(1), Provenance::Custom { label: "test".into() }, |_| {
            Ok(Array3::from_elem((1, 1, 1), 1.0))
        });
        let p = geodesic(&c, &[0.0], &[1.0], 1.0, 200).unwrap();
        assert!((p.end().unwrap()[0] - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn leaving_the_domain_keeps_the_partial_path() {
        let c = ConnectionField::zero(1, Domain::open_box(vec![-1.0], vec![1.0]));
        match geodesic(&c, &[0.0], &[1.0], 3.0, 30) {
            Err(Error::LeftDomain { t, partial }) => {
                assert!(t > 0.8 && t < 1.0 + 1e-9, "{t}");
                assert!(partial.points.iter().all(|p| p[0] < 1.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dual_flat_geodesics_on_the_normal_family() {
        let m = builtin("normal-natural").unwrap();
        let (t0, v0) = ([-0.6, 0.2], [0.15, -0.3]);
        let e = geodesic(&alpha_field(&m, 1.0), &t0, &v0, 1.0, 1000).unwrap();
        let lin = e
            .t
            .iter()
            .zip(&e.points)
            .map(|(t, p)| (0..2).map(|i| (p[i] - t0[i] - t * v0[i]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        assert!(lin < 1e-8, "e-linearity {lin:e}");

        let mg = geodesic(&alpha_field(&m, -1.0), &t0, &v0, 1.0, 1000).unwrap();
        let fam = normal_family();
        let etas: Vec<Vec<f64>> = mg.points.iter().step_by(100).map(|p| fam.dual_coords(p).unwrap()).collect();
        let (a, b) = (&etas[0], etas.last().unwrap());
        let k = etas.len() - 1;
        let straight = etas
            .iter()
            .enumerate()
            .map(|(j, eta)| {
                let s = j as f64 / k as f64;
                (0..2).map(|i| (eta[i] - a[i] - s * (b[i] - a[i])).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        assert!(straight < 1e-4, "m-straightness {straight:e}");
    }

    #[test]
    fn levi_civita_geodesic_conserves_speed() {
        let m = builtin("normal").unwrap();
        let p = geodesic(&alpha_field(&m, 0.0), &[0.0, 1.0], &[0.4, 0.2], 1.0, 1000).unwrap();
        let speed = |x: &[f64], v: &[f64]| {
            let g = fisher_metric(&m, x).unwrap();
            (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| g[[i, j]] * v[i] * v[j]).sum::<f64>()
        };
        let s0 = speed(&p.points[0], &p.velocities[0]);
        let drift = p
            .points
            .iter()
            .zip(&p.velocities)
            .map(|(x, v)| (speed(x, v) - s0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-5, "drift {drift:e}");
    }
}
