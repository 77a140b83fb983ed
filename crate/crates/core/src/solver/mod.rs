//! End-to-end exterior solve: boundary sampling, per-step spherical
//! harmonic analysis, batched mode marching, and evaluation on the target
//! sphere.

pub mod config;
pub mod demo;
pub mod sources;
pub mod sweep;
pub mod tabulated;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

use crate::boundary::BoundaryKind;
use crate::error::{Error, Result};
use crate::march::{build_plan, field_scale, right_end_weights, MarchPlan, ModeState};
use crate::special::{legendre_nodes, normalized_legendre_table, tri_index};
use crate::transform::{ModeCoefficients, SphericalGrid, SphericalTransform};
use crate::zeros::{zeros, ZeroCache, ZeroTable};

pub use sources::{
    exact_radial_derivative, exact_solution, exterior_sources, manufactured_sources, PointSource,
};
pub use tabulated::{write_tabulated, TabulatedData};

/// Where the boundary data comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// Interior sources: the data is the trace of their field (Dirichlet) or
    /// of `(d/dr + 1)` of it (Robin), and the field itself is the exact
    /// exterior solution.
    PointSources(Vec<PointSource>),
    /// Exterior sources: the data cancels the incident field (sound-soft
    /// Dirichlet, or the matching Robin condition).
    Incident(Vec<PointSource>),
    /// Samples read from a table on the solver grid.
    Tabulated(TabulatedData),
}

/// A point on the target sphere where a time trace is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub theta: f64,
    pub phi: f64,
}

impl Probe {
    pub const NORTH_POLE: Probe = Probe {
        theta: 0.0,
        phi: 0.0,
    };
}

#[derive(Debug, Clone)]
pub struct ScatteringProblem {
    pub bc: BoundaryKind,
    pub data: DataSource,
    /// Truncation order `N` of the harmonic expansion.
    pub order: usize,
    /// Collocation points per step.
    pub p: usize,
    /// Total number of time collocation points `N_T`, `p` per step.
    pub time_points: usize,
    /// Radius of the target sphere.
    pub radius: f64,
    /// Final time.
    pub time: f64,
    /// `(n_theta, n_phi)`; defaults to `4N x 4N`.
    pub grid: Option<(usize, usize)>,
    pub probes: Vec<Probe>,
}

impl ScatteringProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 1.0 && self.radius.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "target radius {} must exceed 1",
                self.radius
            )));
        }
        if !(self.time > self.radius - 1.0 && self.time.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "final time {} must exceed radius - 1 = {}",
                self.time,
                self.radius - 1.0
            )));
        }
        if self.time_points == 0 || self.p == 0 || !self.time_points.is_multiple_of(self.p) {
            return Err(Error::InvalidProblem(format!(
                "N_T = {} time points must be a positive multiple of p = {}",
                self.time_points, self.p
            )));
        }
        legendre_nodes(self.p)?;
        match &self.data {
            DataSource::PointSources(s) => {
                for src in s {
                    src.validate()?;
                    if src.radius() >= 1.0 {
                        return Err(Error::InvalidProblem(format!(
                            "manufactured-solution sources must lie inside the unit sphere, |y| = {}",
                            src.radius()
                        )));
                    }
                }
            }
            DataSource::Incident(s) => {
                for src in s {
                    src.validate()?;
                    if src.radius() <= 1.0 {
                        return Err(Error::InvalidProblem(format!(
                            "incident-field sources must lie outside the unit sphere, |y| = {}",
                            src.radius()
                        )));
                    }
                }
            }
            DataSource::Tabulated(_) => {}
        }
        Ok(())
    }

    /// Number of steps, `N_T / p`.
    pub fn steps(&self) -> usize {
        self.time_points / self.p.max(1)
    }

    /// Step length `(T - r + 1) / steps`.
    pub fn dt(&self) -> f64 {
        (self.time - self.radius + 1.0) / self.steps() as f64
    }

    pub fn make_grid(&self) -> Result<SphericalGrid> {
        match self.grid {
            Some((nt, np)) => SphericalGrid::new(nt, np),
            None => SphericalGrid::for_order(self.order),
        }
    }

    /// Flat `key=value` description, as written to output headers.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("bc".to_string(), self.bc.name().to_string()),
            ("order".to_string(), self.order.to_string()),
            ("ptime".to_string(), self.p.to_string()),
            ("steps".to_string(), self.time_points.to_string()),
            ("radius".to_string(), self.radius.to_string()),
            ("time".to_string(), self.time.to_string()),
        ];
        if let Some((a, b)) = self.grid {
            kv.push(("grid".into(), format!("{a}x{b}")));
        }
        match &self.data {
            DataSource::PointSources(s) | DataSource::Incident(s) => {
                let key = if matches!(self.data, DataSource::PointSources(_)) {
                    "source"
                } else {
                    "incident"
                };
                for src in s {
                    kv.push((key.into(), config::format_source(src)));
                }
            }
            DataSource::Tabulated(t) => kv.push((
                "data".into(),
                format!("tabulated {}x{}", t.n_theta, t.n_phi),
            )),
        }
        for p in &self.probes {
            kv.push(("probe".into(), format!("{},{}", p.theta, p.phi)));
        }
        kv
    }
}

/// Time trace of the solution at one probe on the target sphere.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeTrace {
    pub probe: Probe,
    /// Physical times `k dt + r - 1`.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveStats {
    pub zeros_seconds: f64,
    pub plan_seconds: f64,
    pub analysis_seconds: f64,
    pub march_seconds: f64,
    pub total_seconds: f64,
    /// Largest `|Im|` of zonal (`m = 0`) outputs relative to their largest
    /// magnitude; zero in exact arithmetic for real data.
    pub zonal_imaginary_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutput {
    pub dt: f64,
    pub grid: (usize, usize),
    /// Mode coefficients of the field on the target sphere at the final time.
    pub coefficients: ModeCoefficients,
    /// Field on the target grid (theta-major) at the final time.
    pub field: Vec<f64>,
    /// Exact field at the same nodes, when the data source has one.
    pub exact: Option<Vec<f64>>,
    pub rel_l2_error: Option<f64>,
    pub probes: Vec<ProbeTrace>,
    pub stats: SolveStats,
}

/// Gaussian exponents beyond this contribute below `1e-26` and are skipped.
const GAUSS_CUTOFF: f64 = 60.0;

/// Per-source node geometry: distance `R`, `dR/dr`, `cos kR`, `sin kR`.
struct SourceNodes {
    dist: Vec<f64>,
    slope: Vec<f64>,
    cos_kr: Vec<f64>,
    sin_kr: Vec<f64>,
}

/// Samples the boundary data on the grid.
struct Sampler<'a> {
    bc: BoundaryKind,
    data: &'a DataSource,
    geometry: Vec<SourceNodes>,
}

impl<'a> Sampler<'a> {
    fn new(bc: BoundaryKind, data: &'a DataSource, grid: &SphericalGrid) -> Self {
        let sources: &[PointSource] = match data {
            DataSource::PointSources(s) | DataSource::Incident(s) => s,
            DataSource::Tabulated(_) => &[],
        };
        let geometry = sources
            .iter()
            .map(|s| {
                let mut g = SourceNodes {
                    dist: Vec::with_capacity(grid.len()),
                    slope: Vec::with_capacity(grid.len()),
                    cos_kr: Vec::with_capacity(grid.len()),
                    sin_kr: Vec::with_capacity(grid.len()),
                };
                for i in 0..grid.n_theta {
                    for k in 0..grid.n_phi {
                        let x = grid.point(i, k, 1.0);
                        let d = s.distance(x);
                        let xy: f64 = (0..3).map(|c| x[c] * s.y[c]).sum();
                        let (sn, cs) = (s.k * d).sin_cos();
                        g.dist.push(d);
                        g.slope.push((1.0 - xy) / d);
                        g.cos_kr.push(cs);
                        g.sin_kr.push(sn);
                    }
                }
                g
            })
            .collect();
        Sampler { bc, data, geometry }
    }

    /// Fill `out` with the data at time `t`; `false` if not available.
    fn sample(&self, t: f64, out: &mut [f64]) -> bool {
        let (sources, sign) = match self.data {
            DataSource::PointSources(s) => (s, 1.0),
            DataSource::Incident(s) => (s, -1.0),
            DataSource::Tabulated(tab) => {
                return match tab.lookup(t) {
                    Some(v) => {
                        out.copy_from_slice(v);
                        true
                    }
                    None if t == 0.0 => {
                        out.iter_mut().for_each(|v| *v = 0.0);
                        true
                    }
                    None => false,
                };
            }
        };
        out.iter_mut().for_each(|v| *v = 0.0);
        let robin = self.bc == BoundaryKind::Robin;
        for (s, g) in sources.iter().zip(&self.geometry) {
            let (st, ct) = (s.k * t).sin_cos();
            let lag = t - s.t0;
            for (idx, o) in out.iter_mut().enumerate() {
                let d = g.dist[idx];
                let shift = lag - d;
                let arg = shift * shift / s.a;
                if arg > GAUSS_CUTOFF {
                    continue;
                }
                let gauss = s.c * (-arg).exp();
                // cos / sin of k (t - R)
                let c = ct * g.cos_kr[idx] + st * g.sin_kr[idx];
                let mut v = gauss * c / d;
                if robin {
                    let sn = st * g.cos_kr[idx] - ct * g.sin_kr[idx];
                    let d_profile = gauss * (2.0 * shift / s.a * c + s.k * sn);
                    v += (d_profile / d - gauss * c / (d * d)) * g.slope[idx];
                }
                *o += sign * v;
            }
        }
        true
    }
}

/// One degree `n`: its plan and the state of modes `m = 0..=n`.
struct ModeBlock {
    plan: MarchPlan,
    state: ModeState,
    nodes: Vec<Complex64>,
    end: Vec<Complex64>,
    out: Vec<Complex64>,
}

/// Zero tables for all degrees up to `order`, optionally through a cache.
pub fn zero_tables(
    kind: BoundaryKind,
    order: usize,
    cache: Option<&ZeroCache>,
) -> Result<Vec<ZeroTable>> {
    (0..=order)
        .into_par_iter()
        .map(|n| match cache {
            Some(c) => c.get(kind, n),
            None => zeros(kind, n),
        })
        .collect()
}

/// Run the full pipeline.
pub fn solve(problem: &ScatteringProblem) -> Result<SolveOutput> {
    solve_with_cache(problem, None)
}

pub fn solve_with_cache(
    problem: &ScatteringProblem,
    cache: Option<&ZeroCache>,
) -> Result<SolveOutput> {
    problem.validate()?;
    let start = Instant::now();
    let mut stats = SolveStats::default();
    let (nmax, p, steps, r) = (problem.order, problem.p, problem.steps(), problem.radius);
    let dt = problem.dt();
    let grid = problem.make_grid()?;
    if let DataSource::Tabulated(tab) = &problem.data {
        tab.check_grid(&grid)?;
        let (x, _) = legendre_nodes(p)?;
        tab.check_times((0..steps).flat_map(|k| {
            x.iter()
                .map(move |xl| (k as f64 + 0.5 * (1.0 + xl)) * dt)
                .collect::<Vec<_>>()
        }))?;
    }
    let transform = SphericalTransform::new(grid.clone(), nmax)?;

    let t0 = Instant::now();
    let dir = zero_tables(BoundaryKind::Dirichlet, nmax, cache)?;
    let rob = match problem.bc {
        BoundaryKind::Robin => Some(zero_tables(BoundaryKind::Robin, nmax, cache)?),
        BoundaryKind::Dirichlet => None,
    };
    stats.zeros_seconds = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let mut blocks: Vec<ModeBlock> = (0..=nmax)
        .into_par_iter()
        .map(|n| {
            let plan = build_plan(
                n,
                problem.bc,
                r,
                dt,
                p,
                &dir[n],
                rob.as_ref().map(|v| &v[n]),
            )
            .map_err(|e| Error::Mode {
                n,
                m: 0,
                source: Box::new(e),
            })?;
            let w = n + 1;
            let state = ModeState::new(&plan, w);
            Ok(ModeBlock {
                plan,
                state,
                nodes: vec![Complex64::new(0.0, 0.0); p * w],
                end: vec![Complex64::new(0.0, 0.0); w],
                out: vec![Complex64::new(0.0, 0.0); w],
            })
        })
        .collect::<Result<_>>()?;
    stats.plan_seconds = t0.elapsed().as_secs_f64();

    let sampler = Sampler::new(problem.bc, &problem.data, &grid);
    let ncoef = (nmax + 1) * (nmax + 1);
    let right = right_end_weights(p)?;
    let (xnodes, _) = legendre_nodes(p)?;
    // p node samples plus the step end
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); ncoef]; p + 1];
    let analyze_at = |t: f64, buf: &mut Vec<f64>, c: &mut [Complex64]| -> bool {
        buf.resize(grid.len(), 0.0);
        if !sampler.sample(t, buf) {
            return false;
        }
        transform.analyze_real_into(buf, c);
        true
    };

    // probe tables: bar P_n^m(cos theta) e^{i m phi}
    let probe_tables: Vec<Vec<Complex64>> = problem
        .probes
        .iter()
        .map(|pr| {
            let mut leg = Vec::new();
            normalized_legendre_table(nmax, pr.theta, &mut leg);
            let mut tab = vec![Complex64::new(0.0, 0.0); leg.len()];
            for n in 0..=nmax {
                for m in 0..=n {
                    tab[tri_index(n, m)] =
                        Complex64::from_polar(leg[tri_index(n, m)], m as f64 * pr.phi);
                }
            }
            tab
        })
        .collect();
    let mut traces: Vec<ProbeTrace> = problem
        .probes
        .iter()
        .map(|&probe| ProbeTrace {
            probe,
            times: Vec::with_capacity(steps + 1),
            values: Vec::with_capacity(steps + 1),
        })
        .collect();
    let scale = field_scale(problem.bc, r);
    let record = |traces: &mut Vec<ProbeTrace>, blocks: &[ModeBlock], k: usize| {
        for (tr, tab) in traces.iter_mut().zip(&probe_tables) {
            let mut v = 0.0;
            for (n, b) in blocks.iter().enumerate() {
                v += (b.out[0] * tab[tri_index(n, 0)]).re;
                for m in 1..=n {
                    v += 2.0 * (b.out[m] * tab[tri_index(n, m)]).re;
                }
            }
            tr.times.push(k as f64 * dt + r - 1.0);
            tr.values.push(scale * v);
        }
    };

    // t = 0
    let mut buf = Vec::new();
    let ta = Instant::now();
    if !analyze_at(0.0, &mut buf, &mut coeffs[p]) {
        coeffs[p]
            .iter_mut()
            .for_each(|c| *c = Complex64::new(0.0, 0.0));
    }
    stats.analysis_seconds += ta.elapsed().as_secs_f64();
    for (n, b) in blocks.iter_mut().enumerate() {
        for m in 0..=n {
            b.out[m] = coeffs[p][n * n + n + m] * b.plan.direct_gain;
        }
    }
    record(&mut traces, &blocks, 0);

    let mut zonal_im: f64 = 0.0;
    let mut zonal_abs: f64 = 0.0;
    for k in 0..steps {
        let ta = Instant::now();
        let times: Vec<f64> = xnodes
            .iter()
            .map(|xl| (k as f64 + 0.5 * (1.0 + xl)) * dt)
            .chain(std::iter::once((k + 1) as f64 * dt))
            .collect();
        let ok: Vec<bool> = coeffs
            .par_iter_mut()
            .zip(times.par_iter())
            .map_init(Vec::new, |buf, (c, &t)| analyze_at(t, buf, c))
            .collect();
        if ok[..p].iter().any(|o| !o) {
            return Err(Error::Mismatch(format!("no boundary data in step {k}")));
        }
        if !ok[p] {
            let (nodes, end) = coeffs.split_at_mut(p);
            for (i, e) in end[0].iter_mut().enumerate() {
                *e = (0..p).map(|l| nodes[l][i] * right[l]).sum();
            }
        }
        stats.analysis_seconds += ta.elapsed().as_secs_f64();

        let tm = Instant::now();
        let coeffs_ref = &coeffs;
        blocks.par_iter_mut().enumerate().for_each(|(n, b)| {
            let w = n + 1;
            let base = n * n + n;
            for l in 0..p {
                b.nodes[l * w..(l + 1) * w].copy_from_slice(&coeffs_ref[l][base..base + w]);
            }
            b.end.copy_from_slice(&coeffs_ref[p][base..base + w]);
            b.state.advance(&b.plan, &b.nodes, &b.end, &mut b.out);
        });
        for b in &blocks {
            zonal_im = zonal_im.max(b.out[0].im.abs());
            zonal_abs = zonal_abs.max(b.out[0].norm());
        }
        stats.march_seconds += tm.elapsed().as_secs_f64();
        record(&mut traces, &blocks, k + 1);
    }
    stats.zonal_imaginary_ratio = if zonal_abs > 0.0 {
        zonal_im / zonal_abs
    } else {
        0.0
    };

    let mut fc = ModeCoefficients::zeros(nmax);
    for (n, b) in blocks.iter().enumerate() {
        for m in 0..=n {
            let v = b.out[m] * scale;
            fc.set(n, m as i64, v);
            if m > 0 {
                fc.set(n, -(m as i64), v.conj());
            }
        }
    }
    let field: Vec<f64> = transform.synthesize(&fc)?.iter().map(|c| c.re).collect();
    let exact = match &problem.data {
        DataSource::PointSources(s) => Some(exact_on_sphere(s, &grid, r, problem.time)?),
        _ => None,
    };
    let rel_l2_error = exact.as_ref().map(|e| relative_l2(&grid, &field, e));
    stats.total_seconds = start.elapsed().as_secs_f64();
    Ok(SolveOutput {
        dt,
        grid: (grid.n_theta, grid.n_phi),
        coefficients: fc,
        field,
        exact,
        rel_l2_error,
        probes: traces,
        stats,
    })
}

/// Exact field of `sources` on the grid scaled to radius `r`.
pub fn exact_on_sphere(
    sources: &[PointSource],
    grid: &SphericalGrid,
    r: f64,
    t: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.n_theta {
        for k in 0..grid.n_phi {
            out.push(exact_solution(sources, grid.point(i, k, r), t)?);
        }
    }
    Ok(out)
}

/// Relative L2 error with the grid quadrature weights.
pub fn relative_l2(grid: &SphericalGrid, approx: &[f64], exact: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid.n_theta {
        let w = grid.weight(i);
        for k in 0..grid.n_phi {
            let idx = i * grid.n_phi + k;
            num += w * (approx[idx] - exact[idx]).powi(2);
            den += w * exact[idx].powi(2);
        }
    }
    if den == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (num / den).sqrt()
}
