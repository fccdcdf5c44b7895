//! Surface documents:
//!
//! ```json
//! {"name": "bowl", "dim": 2,
//!  "chart": ["u[0]", "u[1]", "0.5*(u[0]^2 + u[1]^2)"],
//!  "transversal": ["0", "0", "1"],
//!  "domain": {"lo": [-1, -1], "hi": [1, 1]}}
//! ```
//!
//! `"transversal": "centro-affine"` selects `ξ = −f`. A catalog surface is
//! referenced as `{"builtin": "sphere"}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{catalog, Hypersurface, Transversal};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::models::DomainSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransversalSpec {
    Named(String),
    Field(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDoc {
    pub name: String,
    pub dim: usize,
    pub chart: Vec<String>,
    pub transversal: TransversalSpec,
    pub domain: DomainSpec,
}

fn parse_all(exprs: &[String], dim: usize) -> Result<Vec<Expr>> {
    exprs
        .iter()
        .map(|s| {
            let e = Expr::parse(s, &["u"])?;
            e.check_bounds(&[dim])?;
            Ok(e)
        })
        .collect()
}

impl SurfaceDoc {
    pub fn build(&self) -> Result<Hypersurface> {
        if self.dim == 0 {
            return Err(Error::schema("`dim` must be >= 1"));
        }
        if self.chart.len() != self.dim + 1 {
            return Err(Error::schema(format!("`chart` needs {} expressions", self.dim + 1)));
        }
        let chart = parse_all(&self.chart, self.dim)?;
        let transversal = match &self.transversal {
            TransversalSpec::Named(s) if s == "centro-affine" => Transversal::CentroAffine,
            TransversalSpec::Named(s) => return Err(Error::schema(format!("unknown transversal `{s}`"))),
            TransversalSpec::Field(v) => {
                if v.len() != self.dim + 1 {
                    return Err(Error::schema(format!("`transversal` needs {} expressions", self.dim + 1)));
                }
                let xi = parse_all(v, self.dim)?;
                Transversal::Field(Arc::new(move |u: &[f64]| xi.iter().map(|e| e.eval(&[u])).collect()))
            }
        };
        Hypersurface::new(
            self.name.clone(),
            self.dim,
            self.domain.to_domain(self.dim)?,
            move |u| chart.iter().map(|e| e.eval(&[u])).collect(),
            transversal,
        )
    }
}

/// Builds a surface from a JSON document or catalog reference.
pub fn load_surface(doc: &Value) -> Result<Hypersurface> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::schema("surface document must be a JSON object"))?;
    if let Some(name) = obj.get("builtin") {
        let name = name.as_str().ok_or_else(|| Error::schema("`builtin` must be a string"))?;
        if obj.len() > 1 {
            return Err(Error::schema("a builtin surface reference takes no other fields"));
        }
        return catalog::surface_by_name(name);
    }
    let d: SurfaceDoc = serde_json::from_value(doc.clone()).map_err(|e| Error::schema(e.to_string()))?;
    d.build()
}
