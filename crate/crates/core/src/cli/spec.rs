//! Run specifications.
//!
//! ```json
//! {"name": "e-flat",
//!  "subject": {"model": {"builtin": "normal-natural"}},
//!  "grid": {"linspace": [[-1.0, -0.25, 3], [-0.5, 0.5, 3]]},
//!  "checks": ["flatness", {"name": "duality", "alpha": [0.5]}],
//!  "alpha": [1, -1],
//!  "tolerances": {"flatness": 1e-4}}
//! ```
//!
//! A suite document `{"suite": [spec, …]}` runs several specs into one report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dualflat::{load_family, PotentialFamily};
use crate::error::{Error, Result};
use crate::immersion::{load_surface, Hypersurface};
use crate::models::{load_model, StatisticalModel};
use crate::numerics::ExpectationRule;
use crate::submanifold::{load_embedding, SubmanifoldEmbedding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubjectKind {
    Model,
    Surface,
    Family,
    Embedding,
}

impl SubjectKind {
    pub fn name(self) -> &'static str {
        match self {
            SubjectKind::Model => "model",
            SubjectKind::Surface => "surface",
            SubjectKind::Family => "family",
            SubjectKind::Embedding => "embedding",
        }
    }
}

use SubjectKind::{Embedding as E, Family as F, Model as M, Surface as S};

/// Check name, subjects it applies to, whether it sweeps the α list, default tolerance.
pub const CHECKS: &[(&str, &[SubjectKind], bool, f64)] = &[
    ("validate", &[M, F], false, 1e-6),
    ("fisher", &[M, F], false, 0.0),
    ("duality", &[M, F], true, 1e-4),
    ("flatness", &[M, F], true, crate::infogeo::CURVATURE_TOLERANCE),
    ("codazzi", &[M, F], true, 1e-5),
    ("exponential-form", &[M, F, E], false, crate::submanifold::EXPONENTIAL_FORM_TOLERANCE),
    ("structural", &[S], false, crate::immersion::IMMERSION_TOLERANCE),
    ("classify", &[S, F], false, crate::immersion::IMMERSION_TOLERANCE),
    ("statistical-structure", &[S, F], false, 1e-5),
    ("legendre", &[F], false, 1e-8),
    ("hessian-metric", &[F], false, 1e-4),
    ("graph-realization", &[F], false, 1e-5),
    ("centro-affine-lift", &[F], false, 1e-6),
    ("autoparallel", &[E], true, crate::submanifold::AUTOPARALLEL_TOLERANCE),
    ("exponential-implies-autoparallel", &[E], false, crate::submanifold::AUTOPARALLEL_TOLERANCE),
    ("geodesic", &[M, F], false, 1e-5),
];

pub fn check_names() -> impl Iterator<Item = &'static str> {
    CHECKS.iter().map(|c| c.0)
}

pub(crate) fn check_entry(name: &str) -> Result<&'static (&'static str, &'static [SubjectKind], bool, f64)> {
    CHECKS.iter().find(|c| c.0 == name).ok_or_else(|| {
        Error::schema(format!(
            "unknown check `{name}`; known checks: {}",
            check_names().collect::<Vec<_>>().join(", ")
        ))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    /// Per-coordinate `[lo, hi, count]`, combined as a product grid.
    Linspace(Vec<(f64, f64, usize)>),
    Points(Vec<Vec<f64>>),
}

impl GridSpec {
    /// Grid points in row-major order, last coordinate fastest.
    pub fn points(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        let pts = match self {
            GridSpec::Points(p) => p.clone(),
            GridSpec::Linspace(axes) => {
                if axes.len() != dim {
                    return Err(Error::schema(format!("grid has {} axes, subject has dimension {dim}", axes.len())));
                }
                let mut pts = vec![Vec::new()];
                for &(lo, hi, n) in axes {
                    if n == 0 || !lo.is_finite() || !hi.is_finite() {
                        return Err(Error::schema("linspace axes need finite bounds and count >= 1"));
                    }
                    let vals: Vec<f64> = if n == 1 {
                        vec![lo]
                    } else {
                        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
                    };
                    pts = pts
                        .into_iter()
                        .flat_map(|p| {
                            vals.iter().map(move |v| {
                                let mut q = p.clone();
                                q.push(*v);
                                q
                            })
                        })
                        .collect();
                }
                pts
            }
        };
        if pts.is_empty() {
            return Err(Error::schema("grid is empty"));
        }
        if let Some(p) = pts.iter().find(|p| p.len() != dim) {
            return Err(Error::schema(format!("grid point {p:?} does not have dimension {dim}")));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckSpec {
    Name(String),
    Detailed {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
        /// `"fail"` marks a negative witness: the check passes when its criterion fails.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expect>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Pass,
    Fail,
}

impl CheckSpec {
    pub fn name(&self) -> &str {
        match self {
            CheckSpec::Name(n) | CheckSpec::Detailed { name: n, .. } => n,
        }
    }

    pub fn alpha(&self) -> Option<&[f64]> {
        match self {
            CheckSpec::Detailed { alpha: Some(a), .. } => Some(a),
            _ => None,
        }
    }

    pub fn expect(&self) -> Expect {
        match self {
            CheckSpec::Detailed { expect: Some(e), .. } => *e,
            _ => Expect::Pass,
        }
    }

    pub fn tolerance(&self) -> Option<f64> {
        match self {
            CheckSpec::Detailed { tolerance, .. } => *tolerance,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSpec {
    #[serde(default = "one")]
    pub alpha: f64,
    pub theta0: Vec<f64>,
    pub v0: Vec<f64>,
    #[serde(default = "one")]
    pub t_final: f64,
    #[serde(default = "thousand")]
    pub steps: usize,
}

fn one() -> f64 {
    1.0
}

fn thousand() -> usize {
    1000
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub subject: Value,
    pub grid: GridSpec,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputSpec>,
}

/// A single spec or a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDoc {
    pub runs: Vec<RunSpec>,
    pub seed: Option<u64>,
    pub outputs: OutputSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteDoc {
    suite: Vec<RunSpec>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    outputs: Option<OutputSpec>,
}

impl SpecDoc {
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::schema("run spec must be a JSON object"))?;
        if obj.contains_key("suite") {
            let s: SuiteDoc = serde_json::from_value(v.clone()).map_err(|e| Error::schema(e.to_string()))?;
            if s.suite.is_empty() {
                return Err(Error::schema("`suite` is empty"));
            }
            Ok(SpecDoc {
                runs: s.suite,
                seed: s.seed,
                outputs: s.outputs.unwrap_or_default(),
            })
        } else {
            let r: RunSpec = serde_json::from_value(v.clone()).map_err(|e| Error::schema(e.to_string()))?;
            Ok(SpecDoc {
                seed: r.seed,
                outputs: r.outputs.clone().unwrap_or_default(),
                runs: vec![r],
            })
        }
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::schema(format!("invalid JSON: {e}")))?;
        SpecDoc::from_value(&v)
    }
}

/// A resolved subject.
#[derive(Debug, Clone)]
pub enum Subject {
    Model(StatisticalModel),
    Surface(Hypersurface),
    Family(PotentialFamily),
    Embedding(SubmanifoldEmbedding),
}

impl Subject {
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| Error::schema("`subject` must have exactly one of model, surface, family, embedding"))?;
        let (k, doc) = obj.iter().next().expect("one entry");
        match k.as_str() {
            "model" => load_model(doc).map(Subject::Model),
            "surface" => load_surface(doc).map(Subject::Surface),
            "family" => load_family(doc).map(Subject::Family),
            "embedding" => load_embedding(doc).map(Subject::Embedding),
            other => Err(Error::schema(format!("unknown subject kind `{other}`"))),
        }
    }

    pub fn kind(&self) -> SubjectKind {
        match self {
            Subject::Model(_) => SubjectKind::Model,
            Subject::Surface(_) => SubjectKind::Surface,
            Subject::Family(_) => SubjectKind::Family,
            Subject::Embedding(_) => SubjectKind::Embedding,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Subject::Model(m) => m.label().to_string(),
            Subject::Surface(s) => s.label().to_string(),
            Subject::Family(f) => f.label().to_string(),
            Subject::Embedding(e) => e.label().to_string(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Subject::Model(m) => m.dim(),
            Subject::Surface(s) => s.dim(),
            Subject::Family(f) => f.dim(),
            Subject::Embedding(e) => e.dim(),
        }
    }

    /// Reseeds Monte Carlo expectation rules.
    pub fn reseed(self, seed: u64) -> Result<Self> {
        match self {
            Subject::Model(m) => match m.rule().clone() {
                ExpectationRule::MonteCarlo { samples, .. } => {
                    m.with_rule(ExpectationRule::MonteCarlo { samples, seed }).map(Subject::Model)
                }
                _ => Ok(Subject::Model(m)),
            },
            other => Ok(other),
        }
    }
}

/// Validates check names against the subject and resolves tolerances.
pub fn validate_run(run: &RunSpec, kind: SubjectKind, require_checks: bool) -> Result<()> {
    if require_checks && run.checks.is_empty() {
        return Err(Error::schema("`checks` must name at least one check"));
    }
    for c in &run.checks {
        let (name, kinds, _, _) = check_entry(c.name())?;
        if !kinds.contains(&kind) {
            return Err(Error::schema(format!("check `{name}` does not apply to a {} subject", kind.name())));
        }
        if *name == "geodesic" && run.geodesic.is_none() {
            return Err(Error::schema("check `geodesic` needs a `geodesic` section"));
        }
    }
    for k in run.tolerances.keys() {
        check_entry(k)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn product_grid_order() {
        let g = GridSpec::Linspace(vec![(0.0, 1.0, 2), (5.0, 7.0, 3)]);
        let p = g.points(2).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0.0, 5.0]);
        assert_eq!(p[1], vec![0.0, 6.0]);
        assert_eq!(p[5], vec![1.0, 7.0]);
        assert!(GridSpec::Points(vec![]).points(2).is_err());
        assert!(g.points(3).is_err());
    }

    #[test]
    fn single_and_suite_documents() {
        let one = json!({"subject": {"model": {"builtin": "normal"}}, "grid": {"points": [[0, 1]]}, "checks": ["fisher"]});
        let d = SpecDoc::from_value(&one).unwrap();
        assert_eq!(d.runs.len(), 1);
        let suite = json!({"suite": [one.clone(), one], "seed": 7});
        let d = SpecDoc::from_value(&suite).unwrap();
        assert_eq!((d.runs.len(), d.seed), (2, Some(7)));
        assert!(SpecDoc::from_value(&json!({"suite": []})).is_err());
    }

    #[test]
    fn unknown_and_misplaced_checks() {
        let run: RunSpec = serde_json::from_value(json!({
            "subject": {"model": {"builtin": "normal"}}, "grid": {"points": [[0, 1]]}, "checks": ["curvy"]
        }))
        .unwrap();
        assert!(matches!(validate_run(&run, SubjectKind::Model, true), Err(Error::Schema(_))));
        let run: RunSpec = serde_json::from_value(json!({
            "subject": {"model": {"builtin": "normal"}}, "grid": {"points": [[0, 1]]}, "checks": ["structural"]
        }))
        .unwrap();
        assert!(validate_run(&run, SubjectKind::Model, true).is_err());
        assert!(validate_run(&run, SubjectKind::Surface, true).is_ok());
    }

    #[test]
    fn subject_needs_exactly_one_kind() {
        assert!(Subject::from_value(&json!({"model": {"builtin": "normal"}, "surface": {"builtin": "sphere"}})).is_err());
        assert_eq!(Subject::from_value(&json!({"surface": {"builtin": "sphere"}})).unwrap().kind(), SubjectKind::Surface);
    }
}
