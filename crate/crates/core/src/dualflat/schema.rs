//! Family documents:
//!
//! ```json
//! {"name": "bern", "stats": ["x[0]"], "base": "0",
//!  "space": {"kind": "finite", "points": [[0], [1]]},
//!  "domain": {"lo": ["-inf"], "hi": ["inf"]}, "reference": [0]}
//! ```
//!
//! `reference` defaults to the origin; catalog families are referenced as
//! `{"builtin": "normal-natural"}`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::family::{self, PotentialFamily};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::models::{DomainSpec, PlacementSpec, SpaceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub name: String,
    pub stats: Vec<String>,
    #[serde(default = "zero_base")]
    pub base: String,
    pub space: SpaceSpec,
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<PlacementSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
}

fn zero_base() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyRef {
    pub builtin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
}

impl FamilyDoc {
    pub fn build(&self) -> Result<PotentialFamily> {
        let n = self.stats.len();
        if n == 0 {
            return Err(Error::schema("`stats` needs at least one expression"));
        }
        let space = self.space.to_space()?;
        let k = space.outcome_dim();
        let parse = |s: &String| -> Result<Expr> {
            let e = Expr::parse(s, &["x"])?;
            e.check_bounds(&[k])?;
            Ok(e)
        };
        let stats = self.stats.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let base = parse(&self.base)?;
        let placement = self.placement.as_ref().map(|p| p.build(n, k)).transpose()?;
        let fam = PotentialFamily::new(
            self.name.clone(),
            n,
            space,
            self.domain.to_domain(n)?,
            self.reference.clone().unwrap_or_else(|| vec![0.0; n]),
            move |x| stats.iter().map(|e| e.eval(&[x])).collect(),
            move |x| base.eval(&[x]),
        )
        .map_err(|e| Error::schema(format!("family `{}`: {e}", self.name)))?;
        Ok(fam.with_placement_fn(placement))
    }
}

impl FamilyRef {
    pub fn build(&self) -> Result<PotentialFamily> {
        match self.builtin.as_str() {
            "categorical-natural" => family::categorical_family(self.n.unwrap_or(2)),
            "poisson-natural" => Ok(family::poisson_family(self.theta_max.unwrap_or(2.5))),
            name => family::family(name),
        }
    }
}

/// Builds a family from a JSON document or catalog reference.
pub fn load_family(doc: &Value) -> Result<PotentialFamily> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::schema("family document must be a JSON object"))?;
    if obj.contains_key("builtin") {
        let r: FamilyRef = serde_json::from_value(doc.clone()).map_err(|e| Error::schema(e.to_string()))?;
        return r.build();
    }
    let d: FamilyDoc = serde_json::from_value(doc.clone()).map_err(|e| Error::schema(e.to_string()))?;
    d.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn inline_gaussian_family_matches_catalog() {
        let f = load_family(&json!({
            "name": "gauss", "stats": ["x[0]^2", "x[0]"],
            "space": {"kind": "real-line", "quadrature": {"rule": "gauss-hermite", "nodes": 32}},
            "domain": {"lo": ["-inf", "-inf"], "hi": [0, "inf"]},
            "placement": {"center": ["-theta[1]/(2*theta[0])"], "scale": ["sqrt(-1/(2*theta[0]))"]},
            "reference": [-0.5, 0]
        }))
        .unwrap();
        let c = family::normal_family();
        for t in [[-0.5, 0.0], [-1.0, 0.5]] {
            assert!((f.potential(&t).unwrap() - c.potential(&t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn references_and_errors() {
        assert_eq!(load_family(&json!({"builtin": "categorical-natural", "n": 3})).unwrap().dim(), 3);
        assert!(load_family(&json!({"builtin": "gamma"})).is_err());
        let bad = load_family(&json!({
            "name": "b", "stats": ["y[0]"], "space": {"kind": "finite", "points": [[0], [1]]},
            "domain": {"lo": ["-inf"], "hi": ["inf"]}
        }));
        assert!(matches!(bad, Err(Error::UnknownSymbol(_))));
    }
}
