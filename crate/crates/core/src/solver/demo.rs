//! Scattering of the field of two exterior sources by the unit sphere:
//! north-pole traces and a snapshot of the scattered field in the annulus
//! `1 < r < 3` of the xz-plane.

use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::boundary::BoundaryKind;
use crate::error::Result;
use crate::transform::synthesize_points;

use super::sources::exterior_sources;
use super::{solve, DataSource, PointSource, Probe, ScatteringProblem};

#[derive(Debug, Clone)]
pub struct DemoConfig {
    pub bc: BoundaryKind,
    pub sources: Vec<PointSource>,
    pub order: usize,
    pub p: usize,
    /// Steps per unit of boundary time.
    pub steps_per_unit: f64,
    /// Radius of the north-pole solution trace and its final time.
    pub trace_radius: f64,
    pub trace_time: f64,
    /// Snapshot time and sampling of the annulus.
    pub snapshot_time: f64,
    pub annulus_radii: usize,
    pub annulus_angles: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            bc: BoundaryKind::Dirichlet,
            sources: exterior_sources(20.0),
            order: 40,
            p: 10,
            steps_per_unit: 50.0,
            trace_radius: 100.0,
            trace_time: 103.0,
            snapshot_time: 4.0,
            annulus_radii: 20,
            annulus_angles: 181,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoOutput {
    /// Boundary data at the north pole of the unit sphere: `(t, value)`.
    pub boundary_trace: Vec<(f64, f64)>,
    /// Scattered field at the north pole of the trace sphere: `(t, value)`.
    pub solution_trace: Vec<(f64, f64)>,
    /// Scattered field at `snapshot_time`: `(x, z, value)`.
    pub annulus: Vec<(f64, f64, f64)>,
}

fn steps_for(window: f64, per_unit: f64) -> usize {
    ((window * per_unit).ceil() as usize).max(1)
}

fn problem(cfg: &DemoConfig, radius: f64, time: f64, probes: Vec<Probe>) -> ScatteringProblem {
    ScatteringProblem {
        bc: cfg.bc,
        data: DataSource::Incident(cfg.sources.clone()),
        order: cfg.order,
        p: cfg.p,
        time_points: cfg.p * steps_for(time - radius + 1.0, cfg.steps_per_unit),
        radius,
        time,
        grid: None,
        probes,
    }
}

/// Boundary data at the north pole of the unit sphere at time `t`.
pub fn north_pole_data(cfg: &DemoConfig, t: f64) -> f64 {
    let x = [0.0, 0.0, 1.0];
    cfg.sources
        .iter()
        .map(|s| {
            let d = s.distance(x);
            let mut v = s.field_at_distance(d, t);
            if cfg.bc == BoundaryKind::Robin {
                v += s.distance_derivative(d, t) * (1.0 - s.y[2]) / d;
            }
            -v
        })
        .sum()
}

/// Run the demo: one solve for the trace and one per annulus radius.
pub fn scattering_demo(cfg: &DemoConfig) -> Result<DemoOutput> {
    let trace_pb = problem(
        cfg,
        cfg.trace_radius,
        cfg.trace_time,
        vec![Probe::NORTH_POLE],
    );
    let out = solve(&trace_pb)?;
    let tr = &out.probes[0];
    let solution_trace: Vec<(f64, f64)> = tr
        .times
        .iter()
        .copied()
        .zip(tr.values.iter().copied())
        .collect();
    let shift = cfg.trace_radius - 1.0;
    let boundary_trace = tr
        .times
        .iter()
        .map(|&t| (t - shift, north_pole_data(cfg, t - shift)))
        .collect();

    let mut annulus = Vec::new();
    let t = cfg.snapshot_time;
    for i in 1..=cfg.annulus_radii {
        let r = 1.0 + 2.0 * i as f64 / cfg.annulus_radii as f64;
        if t <= r - 1.0 {
            continue;
        }
        let sol = solve(&problem(cfg, r, t, Vec::new()))?;
        // angle around the y-axis, from +z through +x
        let pts: Vec<(f64, f64)> = (0..cfg.annulus_angles)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / cfg.annulus_angles as f64;
                if a <= PI {
                    (a, 0.0)
                } else {
                    (2.0 * PI - a, PI)
                }
            })
            .collect();
        let vals = synthesize_points(&sol.coefficients, &pts);
        for ((theta, phi), v) in pts.iter().zip(vals) {
            let x = r * theta.sin() * phi.cos();
            let z = r * theta.cos();
            annulus.push((x, z, v.re));
        }
    }
    Ok(DemoOutput {
        boundary_trace,
        solution_trace,
        annulus,
    })
}

/// Write the three plot files into `dir`.
pub fn write_demo(dir: &Path, out: &DemoOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut f =
        std::io::BufWriter::new(std::fs::File::create(dir.join("north_pole_boundary.csv"))?);
    writeln!(f, "t,value")?;
    for (t, v) in &out.boundary_trace {
        writeln!(f, "{t:.8e},{v:.8e}")?;
    }
    let mut f =
        std::io::BufWriter::new(std::fs::File::create(dir.join("north_pole_solution.csv"))?);
    writeln!(f, "t,value")?;
    for (t, v) in &out.solution_trace {
        writeln!(f, "{t:.8e},{v:.8e}")?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("annulus.csv"))?);
    writeln!(f, "x,z,value")?;
    for (x, z, v) in &out.annulus {
        writeln!(f, "{x:.8e},{z:.8e},{v:.8e}")?;
    }
    Ok(())
}
