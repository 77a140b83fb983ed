//! Boundary data read from a CSV table with header `t,theta,phi,value`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::transform::SphericalGrid;

const NODE_TOL: f64 = 1e-9;

/// Boundary samples on a spherical grid at a set of times.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedData {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Polar angles, descending (the grid order).
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Ascending sample times.
    pub times: Vec<f64>,
    /// Per time, values theta-major in the grid's node order.
    pub values: Vec<Vec<f64>>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= NODE_TOL * (1.0 + a.abs().max(b.abs()))
}

fn distinct_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| same(*a, *b));
    v
}

fn position(sorted: &[f64], x: f64) -> Option<usize> {
    let i = sorted.partition_point(|v| *v < x - NODE_TOL * (1.0 + x.abs()));
    (i < sorted.len() && same(sorted[i], x)).then_some(i)
}

impl TabulatedData {
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .clone();
        let want = ["t", "theta", "phi", "value"];
        if header.len() != 4 || header.iter().zip(want).any(|(h, w)| h != w) {
            return Err(Error::Parse(format!(
                "tabulated data header must be `t,theta,phi,value`, got `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let mut vals = [0.0f64; 4];
            for (i, v) in vals.iter_mut().enumerate() {
                *v = rec[i].parse().map_err(|_| {
                    Error::Parse(format!("row {}: `{}` is not a number", line + 2, &rec[i]))
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse(format!("row {}: non-finite value", line + 2)));
                }
            }
            rows.push(vals);
        }
        if rows.is_empty() {
            return Err(Error::Parse("tabulated data has no rows".into()));
        }
        let times = distinct_sorted(rows.iter().map(|r| r[0]).collect());
        let theta = distinct_sorted(rows.iter().map(|r| r[1]).collect());
        let phi = distinct_sorted(rows.iter().map(|r| r[2]).collect());
        let (nt, np) = (theta.len(), phi.len());
        let mut values = vec![vec![f64::NAN; nt * np]; times.len()];
        for r in &rows {
            let ti = position(&times, r[0]).unwrap();
            let i = position(&theta, r[1]).unwrap();
            let k = position(&phi, r[2]).unwrap();
            // store in grid order: theta descending = cos theta ascending
            let slot = &mut values[ti][(nt - 1 - i) * np + k];
            if !slot.is_nan() {
                return Err(Error::Parse(format!(
                    "duplicate sample at t = {}, theta = {}, phi = {}",
                    r[0], r[1], r[2]
                )));
            }
            *slot = r[3];
        }
        for (ti, v) in values.iter().enumerate() {
            if v.iter().any(|x| x.is_nan()) {
                return Err(Error::Parse(format!(
                    "incomplete grid at t = {}",
                    times[ti]
                )));
            }
        }
        let mut theta = theta;
        theta.reverse();
        Ok(TabulatedData {
            n_theta: nt,
            n_phi: np,
            theta,
            phi,
            times,
            values,
        })
    }

    /// Check that the nodes coincide with `grid`.
    pub fn check_grid(&self, grid: &SphericalGrid) -> Result<()> {
        let ok = self.n_theta == grid.n_theta
            && self.n_phi == grid.n_phi
            && self
                .theta
                .iter()
                .zip(&grid.theta)
                .all(|(a, b)| same(*a, *b))
            && self.phi.iter().zip(&grid.phi).all(|(a, b)| same(*a, *b));
        if !ok {
            return Err(Error::Mismatch(format!(
                "tabulated data on a {} x {} grid does not match the {} x {} solver grid",
                self.n_theta, self.n_phi, grid.n_theta, grid.n_phi
            )));
        }
        Ok(())
    }

    /// Check that every time in `required` is tabulated.
    pub fn check_times(&self, required: impl IntoIterator<Item = f64>) -> Result<()> {
        for t in required {
            if self.lookup(t).is_none() {
                return Err(Error::Mismatch(format!(
                    "tabulated data has no samples at t = {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn lookup(&self, t: f64) -> Option<&[f64]> {
        position(&self.times, t).map(|i| self.values[i].as_slice())
    }
}

/// Write `f(t, theta, phi)` at every grid node and time as a table.
pub fn write_tabulated<W, F>(mut out: W, grid: &SphericalGrid, times: &[f64], f: F) -> Result<()>
where
    W: Write,
    F: Fn(f64, usize, usize) -> f64,
{
    writeln!(out, "t,theta,phi,value")?;
    for &t in times {
        for i in 0..grid.n_theta {
            for k in 0..grid.n_phi {
                writeln!(
                    out,
                    "{t:e},{:e},{:e},{:e}",
                    grid.theta[i],
                    grid.phi[k],
                    f(t, i, k)
                )?;
            }
        }
    }
    Ok(())
}
