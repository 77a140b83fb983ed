//! Convergence sweeps over the truncation order or the step count.

use serde::Serialize;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{solve, ScatteringProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Truncation order `N`.
    Order,
    /// Total time points `N_T`.
    Steps,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Order => "N",
            SweepAxis::Steps => "N_T",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "order" => Ok(SweepAxis::Order),
            "nt" | "n_t" | "steps" => Ok(SweepAxis::Steps),
            _ => Err(Error::Parse(format!(
                "unknown sweep axis `{s}` (use N or N_T)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: usize,
    pub rel_l2_error: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub version: String,
    pub config: Vec<(String, String)>,
    pub rows: Vec<SweepRow>,
}

/// Solve `base` once per value of `axis` and record the error against the
/// exact solution.
pub fn convergence_sweep(
    base: &ScatteringProblem,
    axis: SweepAxis,
    values: &[usize],
) -> Result<SweepTable> {
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidProblem(
            "sweep values must be strictly ascending".into(),
        ));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut pb = base.clone();
        match axis {
            SweepAxis::Order => pb.order = v,
            SweepAxis::Steps => pb.time_points = v,
        }
        let out = solve(&pb)?;
        let err = out.rel_l2_error.ok_or_else(|| {
            Error::InvalidProblem("sweeps need a data source with an exact solution".into())
        })?;
        rows.push(SweepRow {
            axis,
            value: v,
            rel_l2_error: err,
            wall_seconds: out.stats.total_seconds,
        });
    }
    Ok(SweepTable {
        version: crate::VERSION.to_string(),
        config: base.describe(),
        rows,
    })
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# version={}", self.version)?;
        for (k, v) in &self.config {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "axis,value,rel_l2_error,wall_seconds")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.6e},{:.4}",
                r.axis.name(),
                r.value,
                r.rel_l2_error,
                r.wall_seconds
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let config: serde_json::Map<String, serde_json::Value> =
            self.config
                .iter()
                .fold(serde_json::Map::new(), |mut m, (k, v)| {
                    match m.get_mut(k) {
                        Some(serde_json::Value::Array(a)) => a.push(v.clone().into()),
                        Some(prev) => {
                            *prev = serde_json::Value::Array(vec![prev.clone(), v.clone().into()])
                        }
                        None => {
                            m.insert(k.clone(), v.clone().into());
                        }
                    }
                    m
                });
        serde_json::json!({
            "version": self.version,
            "config": config,
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "axis": r.axis.name(),
                "value": r.value,
                "rel_l2_error": r.rel_l2_error,
                "wall_seconds": r.wall_seconds,
            })).collect::<Vec<_>>(),
        })
    }
}
