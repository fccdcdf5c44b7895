use ndarray::Dimension;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Untestable,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One grid point of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub index: usize,
    pub point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub status: Status,
    /// Summary value compared against `tolerance` as stated in `criterion`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub criterion: String,
    /// What the residual is measured against.
    pub oracle: String,
    pub points: Vec<PointResult>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Set for negative witnesses: the raw outcome before inversion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Status>,
}

impl CheckReport {
    /// Turns the report into a negative witness: pass iff every point
    /// evaluated and the criterion failed.
    pub fn expect_failure(mut self) -> Self {
        let raw = self.status;
        let evaluated = self.points.iter().all(|p| p.error.is_none());
        self.status = match raw {
            Status::Fail if evaluated && (self.residual.is_some() || self.points.is_empty()) => Status::Pass,
            Status::Untestable => Status::Untestable,
            _ => Status::Fail,
        };
        self.outcome = Some(raw);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectInfo {
    pub kind: String,
    pub label: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub subject: SubjectInfo,
    pub status: Status,
    pub grid_size: usize,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub report_version: u32,
    pub command: String,
    /// Seconds since the Unix epoch; the only field allowed to differ between identical runs.
    pub timestamp: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_nodes: Option<usize>,
    pub status: Status,
    pub config: Value,
    pub runs: Vec<RunReport>,
}

/// Overall status: any failure fails; otherwise pass, with untestable checks tolerated.
pub fn aggregate<'a>(statuses: impl IntoIterator<Item = &'a Status>) -> Status {
    let mut any = false;
    let mut all_untestable = true;
    for s in statuses {
        any = true;
        match s {
            Status::Fail => return Status::Fail,
            Status::Pass => all_untestable = false,
            Status::Untestable => {}
        }
    }
    if any && all_untestable {
        Status::Untestable
    } else {
        Status::Pass
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report as JSON with the timestamp removed, for comparisons.
    pub fn comparable(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("timestamp");
        }
        v
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        fs::write(path, self.to_json() + "\n").map_err(io_err)
    }
}

pub(crate) fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(format!("I/O error: {e}"))
}

/// A tensor dump: rows of `(point index, tensor indices…, value)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Adds every entry of an array as `point, i, j, …, value`.
    pub fn push_array<S, D>(&mut self, point: usize, a: &ndarray::ArrayBase<S, D>)
    where
        S: ndarray::Data<Elem = f64>,
        D: ndarray::Dimension,
    {
        for (idx, v) in a.view().into_dyn().indexed_iter() {
            let mut row = vec![point.to_string()];
            row.extend(idx.as_array_view().iter().map(|i| i.to_string()));
            row.push(format!("{v:e}"));
            self.rows.push(row);
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        let mut w = csv::Writer::from_path(path).map_err(io_err)?;
        w.write_record(&self.header).map_err(io_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn aggregation_rules() {
        assert_eq!(aggregate(&[Status::Pass, Status::Untestable]), Status::Pass);
        assert_eq!(aggregate(&[Status::Pass, Status::Fail]), Status::Fail);
        assert_eq!(aggregate(&[Status::Untestable]), Status::Untestable);
        assert_eq!(aggregate(&[]), Status::Pass);
    }

    #[test]
    fn table_rows_list_indices_then_value() {
        let mut t = Table::new(&["point", "i", "j", "value"]);
        t.push_array(3, &arr2(&[[1.0, 2.0], [3.0, 4.0]]));
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[1], vec!["3", "0", "1", "2e0"]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        t.write(&p).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert!(text.starts_with("point,i,j,value\n3,0,0,1e0\n"));
    }
}
