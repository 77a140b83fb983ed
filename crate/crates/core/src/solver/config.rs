//! Flat `key = value` problem description.
//!
//! ```text
//! # manufactured two-source problem
//! bc = robin
//! order = 32
//! ptime = 10
//! steps = 500
//! radius = 10
//! time = 12
//! grid = 128x128
//! source = 1, 0.3, -0.5, 0.6, 1.2, 0.05, 20     # c, y1, y2, y3, t0, a, k
//! probe = 0, 0                                  # theta, phi
//! ```
//!
//! Repeatable keys: `source`, `incident`, `probe`. `data` names a CSV table
//! of boundary samples. Without sources or data the manufactured sources
//! are used, with carrier frequencies `k1` and `k2`.

use std::path::{Path, PathBuf};

use crate::boundary::BoundaryKind;
use crate::error::{Error, Result};

use super::sources::manufactured_sources;
use super::{DataSource, PointSource, Probe, ScatteringProblem, TabulatedData};

pub const DEFAULT_ORDER: usize = 24;
pub const DEFAULT_PTIME: usize = 10;
pub const DEFAULT_STEPS: usize = 200;
pub const DEFAULT_RADIUS: f64 = 10.0;
pub const DEFAULT_TIME: f64 = 12.0;
pub const DEFAULT_K1: f64 = 20.0;
pub const DEFAULT_K2: f64 = 16.0;

/// Problem settings; unset fields take defaults when the problem is built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemConfig {
    pub bc: Option<BoundaryKind>,
    pub order: Option<usize>,
    pub ptime: Option<usize>,
    /// Total time points `N_T`.
    pub steps: Option<usize>,
    pub radius: Option<f64>,
    pub time: Option<f64>,
    pub grid: Option<(usize, usize)>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub sources: Vec<PointSource>,
    pub incident: Vec<PointSource>,
    pub data: Option<PathBuf>,
    pub probes: Vec<Probe>,
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{v}`")))
}

fn list(key: &str, v: &str, len: usize) -> Result<Vec<f64>> {
    let parts: Vec<f64> = v
        .split(',')
        .map(|s| num::<f64>(key, s.trim()))
        .collect::<Result<_>>()?;
    if parts.len() != len {
        return Err(Error::Parse(format!(
            "`{key}` needs {len} comma-separated numbers, got `{v}`"
        )));
    }
    Ok(parts)
}

pub fn parse_grid(v: &str) -> Result<(usize, usize)> {
    let (a, b) = v
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Parse(format!("grid must look like 64x64, got `{v}`")))?;
    Ok((num("grid", a.trim())?, num("grid", b.trim())?))
}

pub fn parse_source(v: &str) -> Result<PointSource> {
    let p = list("source", v, 7)?;
    PointSource::new(p[0], [p[1], p[2], p[3]], p[4], p[5], p[6])
}

pub fn format_source(s: &PointSource) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        s.c, s.y[0], s.y[1], s.y[2], s.t0, s.a, s.k
    )
}

pub fn parse_probe(v: &str) -> Result<Probe> {
    let p = list("probe", v, 2)?;
    Ok(Probe {
        theta: p[0],
        phi: p[1],
    })
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ProblemConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "bc" => self.bc = Some(v.parse()?),
            "order" => self.order = Some(num(key, v)?),
            "ptime" => self.ptime = Some(num(key, v)?),
            "steps" => self.steps = Some(num(key, v)?),
            "radius" => self.radius = Some(num(key, v)?),
            "time" => self.time = Some(num(key, v)?),
            "grid" => self.grid = Some(parse_grid(v)?),
            "k1" => self.k1 = Some(num(key, v)?),
            "k2" => self.k2 = Some(num(key, v)?),
            "source" => self.sources.push(parse_source(v)?),
            "incident" => self.incident.push(parse_source(v)?),
            "data" => self.data = Some(PathBuf::from(v)),
            "probe" => self.probes.push(parse_probe(v)?),
            _ => return Err(Error::Parse(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn data_source(&self) -> Result<DataSource> {
        let kinds = [
            !self.sources.is_empty(),
            !self.incident.is_empty(),
            self.data.is_some(),
        ];
        if kinds.iter().filter(|&&b| b).count() > 1 {
            return Err(Error::InvalidProblem(
                "use only one of `source`, `incident` and `data`".into(),
            ));
        }
        Ok(if let Some(path) = &self.data {
            DataSource::Tabulated(TabulatedData::load(path)?)
        } else if !self.incident.is_empty() {
            DataSource::Incident(self.incident.clone())
        } else if !self.sources.is_empty() {
            DataSource::PointSources(self.sources.clone())
        } else {
            DataSource::PointSources(manufactured_sources(
                self.k1.unwrap_or(DEFAULT_K1),
                self.k2.unwrap_or(DEFAULT_K2),
            ))
        })
    }

    pub fn to_problem(&self) -> Result<ScatteringProblem> {
        let problem = ScatteringProblem {
            bc: self.bc.unwrap_or(BoundaryKind::Dirichlet),
            data: self.data_source()?,
            order: self.order.unwrap_or(DEFAULT_ORDER),
            p: self.ptime.unwrap_or(DEFAULT_PTIME),
            time_points: self.steps.unwrap_or(DEFAULT_STEPS),
            radius: self.radius.unwrap_or(DEFAULT_RADIUS),
            time: self.time.unwrap_or(DEFAULT_TIME),
            grid: self.grid,
            probes: self.probes.clone(),
        };
        problem.validate()?;
        Ok(problem)
    }
}
