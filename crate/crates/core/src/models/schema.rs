//! JSON model documents.
//!
//! ```json
//! {"name": "bern", "dim": 1,
//!  "space": {"kind": "finite", "points": [[0], [1]]},
//!  "domain": {"lo": ["-inf"], "hi": ["inf"]},
//!  "log_density": "theta[0]*x[0] - log(1 + exp(theta[0]))"}
//! ```
//!
//! or a catalog reference such as `{"builtin": "normal-natural"}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::catalog::{self, LocationKernel, DEFAULT_HERMITE_NODES};
use super::{PlacementFn, StatisticalModel};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{Domain, ExpectationRule, Placement, SampleSpace};

/// Box bound: a number or one of `"inf"`, `"-inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundValue {
    Num(f64),
    Text(String),
}

impl BoundValue {
    pub fn value(&self) -> Result<f64> {
        match self {
            BoundValue::Num(v) => Ok(*v),
            BoundValue::Text(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(Error::schema(format!("bad bound `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lo: Vec<BoundValue>,
    pub hi: Vec<BoundValue>,
}

impl DomainSpec {
    pub fn to_domain(&self, dim: usize) -> Result<Domain> {
        if self.lo.len() != dim || self.hi.len() != dim {
            return Err(Error::schema(format!(
                "domain bounds must have {dim} entries, got {} and {}",
                self.lo.len(),
                self.hi.len()
            )));
        }
        let lo = self.lo.iter().map(BoundValue::value).collect::<Result<Vec<_>>>()?;
        let hi = self.hi.iter().map(BoundValue::value).collect::<Result<Vec<_>>>()?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::schema("domain lower bounds must be below upper bounds"));
        }
        Ok(Domain::open_box(lo, hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<ExpectationRule>,
}

impl SpaceSpec {
    pub fn to_space(&self) -> Result<SampleSpace> {
        let rule = self.quadrature.clone().unwrap_or(ExpectationRule::GaussHermite {
            nodes: catalog::quadrature_nodes(DEFAULT_HERMITE_NODES),
        });
        match self.kind.as_str() {
            "finite" | "finite-discrete" => {
                let points = self
                    .points
                    .clone()
                    .ok_or_else(|| Error::schema("finite space needs `points`"))?;
                let space = SampleSpace::finite(points).map_err(|e| Error::schema(e.to_string()))?;
                match self.quadrature.clone() {
                    Some(r @ ExpectationRule::MonteCarlo { .. }) => Ok(space.with_rule(r)),
                    Some(ExpectationRule::ExactFiniteSum) | None => Ok(space),
                    Some(r) => Err(Error::schema(format!("rule {r:?} is not valid on a finite space"))),
                }
            }
            "real-line" => SampleSpace::real_line(rule).map_err(|e| Error::schema(e.to_string())),
            "real-k" => {
                let k = self.k.ok_or_else(|| Error::schema("real-k space needs `k`"))?;
                SampleSpace::real_k(k, rule).map_err(|e| Error::schema(e.to_string()))
            }
            other => Err(Error::schema(format!("unknown space kind `{other}`"))),
        }
    }
}

/// Parameter-dependent quadrature placement: one expression in `theta[·]`
/// per outcome coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSpec {
    pub center: Vec<String>,
    pub scale: Vec<String>,
}

impl PlacementSpec {
    pub(crate) fn build(&self, dim: usize, k: usize) -> Result<PlacementFn> {
        if self.center.len() != k || self.scale.len() != k {
            return Err(Error::schema(format!("placement needs {k} center and scale expressions")));
        }
        let parse = |s: &String| -> Result<Expr> {
            let e = Expr::parse(s, &["theta"])?;
            e.check_bounds(&[dim])?;
            Ok(e)
        };
        let centers = self.center.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let scales = self.scale.iter().map(parse).collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(move |t: &[f64]| {
            centers
                .iter()
                .zip(&scales)
                .map(|(c, s)| Placement {
                    center: c.eval(&[t]),
                    scale: s.eval(&[t]),
                })
                .collect()
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineModel {
    pub name: String,
    pub dim: usize,
    pub space: SpaceSpec,
    pub domain: DomainSpec,
    pub log_density: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<PlacementSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinRef {
    pub builtin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<ExpectationRule>,
}

/// A model document, either a catalog reference or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelDoc {
    Builtin(BuiltinRef),
    Inline(InlineModel),
}

impl ModelDoc {
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::schema("model document must be a JSON object"))?;
        if obj.contains_key("builtin") {
            serde_json::from_value(v.clone())
                .map(ModelDoc::Builtin)
                .map_err(|e| Error::schema(e.to_string()))
        } else {
            serde_json::from_value(v.clone())
                .map(ModelDoc::Inline)
                .map_err(|e| Error::schema(e.to_string()))
        }
    }

    pub fn build(&self) -> Result<StatisticalModel> {
        match self {
            ModelDoc::Builtin(r) => {
                let model = match r.builtin.as_str() {
                    "categorical-natural" => catalog::categorical_natural(r.n.unwrap_or(2))?,
                    "poisson-natural" => catalog::poisson_natural(r.theta_max.unwrap_or(2.5)),
                    "location-logistic" if r.k.is_some() => catalog::location(LocationKernel::Logistic, r.k.unwrap())?,
                    "location-gaussian" if r.k.is_some() => catalog::location(LocationKernel::Gaussian, r.k.unwrap())?,
                    name => catalog::builtin(name)?,
                };
                match &r.quadrature {
                    Some(rule) => model.with_rule(rule.clone()).map_err(|e| Error::schema(e.to_string())),
                    None => Ok(model),
                }
            }
            ModelDoc::Inline(m) => build_inline(m),
        }
    }
}

fn build_inline(doc: &InlineModel) -> Result<StatisticalModel> {
    if doc.dim == 0 {
        return Err(Error::schema("`dim` must be >= 1"));
    }
    let space = doc.space.to_space()?;
    let domain = doc.domain.to_domain(doc.dim)?;
    let expr = Expr::parse(&doc.log_density, &["x", "theta"])?;
    expr.check_bounds(&[space.outcome_dim(), doc.dim])?;
    let k = space.outcome_dim();
    let mut model = StatisticalModel::new(doc.name.clone(), doc.dim, space, domain, move |x, t| expr.eval(&[x, t]))?;
    if let Some(p) = &doc.placement {
        let f = p.build(doc.dim, k)?;
        model = model.with_placement(move |t| f(t));
    }
    Ok(model)
}

/// Builds a model from a JSON document.
pub fn load_model(doc: &Value) -> Result<StatisticalModel> {
    ModelDoc::from_value(doc)?.build()
}

pub fn load_model_str(text: &str) -> Result<StatisticalModel> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::schema(e.to_string()))?;
    load_model(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn catalog_reference() {
        let m = load_model(&json!({"builtin": "normal-natural"})).unwrap();
        assert_eq!(m.label(), "normal-natural");
        assert_eq!(m.dim(), 2);
    }

    #[test]
    fn expression_bernoulli_matches_catalog() {
        let doc = json!({
            "name": "bern-expr", "dim": 1,
            "space": {"kind": "finite", "points": [[0], [1]]},
            "domain": {"lo": ["-inf"], "hi": ["inf"]},
            "log_density": "theta[0]*x[0] - log(1 + exp(theta[0]))"
        });
        let m = load_model(&doc).unwrap();
        let c = catalog::builtin("bernoulli-natural").unwrap();
        for t in [-3.0, -0.5, 0.0, 1.2, 4.0] {
            for x in [0.0, 1.0] {
                let a = m.log_density(&[x], &[t]).unwrap();
                let b = c.log_density(&[x], &[t]).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn missing_dim_is_a_schema_error() {
        let doc = json!({
            "name": "bad",
            "space": {"kind": "finite", "points": [[0], [1]]},
            "domain": {"lo": [0], "hi": [1]},
            "log_density": "x[0]"
        });
        match load_model(&doc) {
            Err(Error::Schema(msg)) => assert!(msg.contains("dim"), "{msg}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_symbol_in_formula() {
        let doc = json!({
            "name": "bad", "dim": 1,
            "space": {"kind": "finite", "points": [[0], [1]]},
            "domain": {"lo": [0], "hi": [1]},
            "log_density": "mu[0] * x[0]"
        });
        assert!(matches!(load_model(&doc), Err(Error::UnknownSymbol(_))));
    }

    #[test]
    fn real_line_model_with_placement() {
        let doc = json!({
            "name": "gauss", "dim": 1,
            "space": {"kind": "real-line", "quadrature": {"rule": "gauss-hermite", "nodes": 24}},
            "domain": {"lo": ["-inf"], "hi": ["inf"]},
            "log_density": "-0.5*log(2*pi) - 0.5*(x[0]-theta[0])^2",
            "placement": {"center": ["theta[0]"], "scale": ["1"]}
        });
        let m = load_model(&doc).unwrap();
        let mean = m.expect(&[0.7], |x| x[0]).unwrap();
        assert!((mean - 0.7).abs() < 1e-12);
    }
}
