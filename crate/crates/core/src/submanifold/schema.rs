//! Embedding documents:
//!
//! ```json
//! {"name": "diagonal", "ambient": {"builtin": "normal"},
//!  "map": ["u[0]", "u[0]"], "domain": {"lo": [0.2], "hi": [3]}}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::SubmanifoldEmbedding;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::models::{load_model, DomainSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingDoc {
    #[serde(default = "default_name")]
    pub name: String,
    pub ambient: Value,
    pub map: Vec<String>,
    pub domain: DomainSpec,
}

fn default_name() -> String {
    "embedding".into()
}

impl EmbeddingDoc {
    pub fn build(&self) -> Result<SubmanifoldEmbedding> {
        let ambient = load_model(&self.ambient)?;
        if self.map.len() != ambient.dim() {
            return Err(Error::schema(format!(
                "`map` needs {} expressions, one per ambient coordinate",
                ambient.dim()
            )));
        }
        let m = self.domain.lo.len();
        let domain = self.domain.to_domain(m)?;
        let exprs = self
            .map
            .iter()
            .map(|s| {
                let e = Expr::parse(s, &["u"])?;
                e.check_bounds(&[m])?;
                Ok(e)
            })
            .collect::<Result<Vec<_>>>()?;
        SubmanifoldEmbedding::new(self.name.clone(), ambient, domain, move |u| {
            exprs.iter().map(|e| e.eval(&[u])).collect()
        })
        .map_err(|e| Error::schema(e.to_string()))
    }
}

pub fn load_embedding(doc: &Value) -> Result<SubmanifoldEmbedding> {
    let d: EmbeddingDoc = serde_json::from_value(doc.clone()).map_err(|e| Error::schema(e.to_string()))?;
    d.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn diagonal_curve_document() {
        let e = load_embedding(&json!({
            "name": "diagonal", "ambient": {"builtin": "normal"},
            "map": ["u[0]", "u[0]"], "domain": {"lo": [0.2], "hi": [3]}
        }))
        .unwrap();
        assert_eq!(e.dim(), 1);
        assert_eq!(e.theta(&[1.5]).unwrap(), vec![1.5, 1.5]);
    }

    #[test]
    fn map_length_must_match_ambient() {
        let r = load_embedding(&json!({
            "ambient": {"builtin": "normal"}, "map": ["u[0]"], "domain": {"lo": [0], "hi": [1]}
        }));
        assert!(matches!(r, Err(Error::Schema(_))));
    }
}
