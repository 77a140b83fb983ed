//! Per-mode time marching of the exterior mode solution.
//!
//! The Laplace-domain kernel factors into one-pole filters,
//! `prod_j (s - c_j) / (s - lambda_j)`, and each filter is applied as a
//! convolution against `e^{lambda_j t}`. Over a step the filter input is
//! replaced by its Legendre interpolant on `p` Gauss nodes, so the history
//! `h_j` advances exactly for polynomial input:
//!
//! ```text
//! h_j(t_k)   = e^{lambda dt} h_j(t_{k-1}) + sum_l q_l  phi_{j-1}(t_l)
//! phi_j(t_l) = pass phi_{j-1}(t_l) + c_j (e^{lambda dt (1+x_l)/2} h_j(t_{k-1})
//!              + sum_s w_ls phi_{j-1}(t_s))
//! ```
//!
//! Dirichlet stages use the zeros `alpha_j` of `k_n` with `c_j = (1 - 1/r)
//! alpha_j`. Robin uses the zeros `beta_j` of `D_n`: stage 0 is a pure
//! convolution (`c = 1`, no pass-through), stages `j >= 1` use
//! `c_j = beta_j - alpha_j / r`.

use num_complex::Complex64;
use serde::Serialize;

use crate::boundary::BoundaryKind;
use crate::error::{Error, Result};
use crate::quadrature::integrate_vec;
use crate::special::{
    legendre_nodes, legendre_values, value_to_coeff_matrix, MAX_COLLOCATION_ORDER,
};
use crate::zeros::ZeroTable;

const MOMENT_REL_TOL: f64 = 1e-14;
const MOMENT_MAX_PIECES: usize = 400;

/// One one-pole filter of a plan.
#[derive(Debug, Clone)]
pub struct Stage {
    pub pole: Complex64,
    pub multiplier: Complex64,
    /// 1 when the filter adds to its input, 0 for a pure convolution.
    pub passthrough: f64,
    /// `e^{lambda dt}`.
    pub step_decay: Complex64,
    /// `e^{lambda dt (1 + x_l) / 2}`.
    pub node_decay: Vec<Complex64>,
    /// End-of-step weights `q_l`.
    pub q: Vec<Complex64>,
    /// Intra-step weights `w_ls`, row-major in `l`.
    pub w: Vec<Complex64>,
    scaled_decay: Vec<Complex64>,
    scaled_w: Vec<Complex64>,
}

/// Precomputed marching coefficients for one `(n, kind, r, dt, p)`.
#[derive(Debug, Clone)]
pub struct MarchPlan {
    pub n: usize,
    pub kind: BoundaryKind,
    pub r: f64,
    pub dt: f64,
    pub p: usize,
    pub nodes: Vec<f64>,
    /// Samples-to-Legendre-coefficients matrix, row-major `p x p`.
    pub conversion: Vec<f64>,
    pub stages: Vec<Stage>,
    /// Product of the pass-through flags: weight of the raw input in the output.
    pub direct_gain: f64,
}

impl MarchPlan {
    /// Scale turning the march output into the mode field at radius `r`.
    pub fn field_scale(&self) -> f64 {
        field_scale(self.kind, self.r)
    }
}

/// `1/r` (Dirichlet) or `-1/r` (Robin).
pub fn field_scale(kind: BoundaryKind, r: f64) -> f64 {
    match kind {
        BoundaryKind::Dirichlet => 1.0 / r,
        BoundaryKind::Robin => -1.0 / r,
    }
}

/// `(e^a - 1) / a`.
fn phi1(a: Complex64) -> Complex64 {
    if a.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..30 {
            term *= a / k as f64;
            sum += term;
        }
        sum
    } else {
        (a.exp() - 1.0) / a
    }
}

/// `int_0^1 s e^{a s} ds`.
fn psi1(a: Complex64) -> Complex64 {
    if a.norm() < 0.5 {
        // sum a^k / (k! (k + 2))
        let mut fact = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.5, 0.0);
        for k in 1..30 {
            fact *= a / k as f64;
            sum += fact / (k as f64 + 2.0);
        }
        sum
    } else {
        (a.exp() * (a - 1.0) + 1.0) / (a * a)
    }
}

/// `int_{-1}^{x} e^{z (x - y)} P_i(y) dy` for `i < p`.
pub fn moment_integrals(
    z: Complex64,
    x: f64,
    p: usize,
) -> std::result::Result<Vec<Complex64>, usize> {
    let len = x + 1.0;
    let mut out = if p > 2 {
        integrate_vec(
            |y, buf| {
                let mut pv = [0.0; MAX_COLLOCATION_ORDER];
                legendre_values(y, &mut pv[..p]);
                let e = (z * (x - y)).exp();
                for i in 0..p {
                    buf[i] = e * pv[i];
                }
            },
            -1.0,
            x,
            p,
            MOMENT_REL_TOL,
            0.0,
            MOMENT_MAX_PIECES,
        )
        .map_err(|_| 2usize)?
    } else {
        vec![Complex64::new(0.0, 0.0); p]
    };
    // closed forms for the two lowest moments
    let a = z * len;
    out[0] = phi1(a) * len;
    if p > 1 {
        out[1] = phi1(a) * (x * len) - psi1(a) * (len * len);
    }
    Ok(out)
}

fn build_stage(
    pole: Complex64,
    multiplier: Complex64,
    passthrough: f64,
    dt: f64,
    nodes: &[f64],
    u: &[f64],
    index: usize,
) -> Result<Stage> {
    let p = nodes.len();
    let z = pole * (0.5 * dt);
    let quad_err = |moment: usize| Error::Quadrature {
        pole: index,
        moment,
    };
    let full = moment_integrals(z, 1.0, p).map_err(quad_err)?;
    let mut q = vec![Complex64::new(0.0, 0.0); p];
    for (l, ql) in q.iter_mut().enumerate() {
        for i in 0..p {
            *ql += full[i] * u[i * p + l];
        }
        *ql *= 0.5 * dt;
    }
    let mut w = vec![Complex64::new(0.0, 0.0); p * p];
    for (l, &xl) in nodes.iter().enumerate() {
        let part = moment_integrals(z, xl, p).map_err(quad_err)?;
        for s in 0..p {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..p {
                acc += part[i] * u[i * p + s];
            }
            w[l * p + s] = acc * (0.5 * dt);
        }
    }
    let node_decay: Vec<Complex64> = nodes.iter().map(|&x| (z * (1.0 + x)).exp()).collect();
    Ok(Stage {
        pole,
        multiplier,
        passthrough,
        step_decay: (z * 2.0).exp(),
        scaled_decay: node_decay.iter().map(|e| e * multiplier).collect(),
        scaled_w: w.iter().map(|v| v * multiplier).collect(),
        node_decay,
        q,
        w,
    })
}

/// Order in which the one-pole filters are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoleOrder {
    /// Ascending real part (most negative first), the stable choice.
    Ascending,
    /// Reverse of `Ascending`, for diagnostics only.
    Descending,
}

fn check_table(t: &ZeroTable, n: usize, kind: BoundaryKind) -> Result<()> {
    if t.n != n || t.kind != kind || t.zeros.len() != kind.count(n) {
        return Err(Error::Mismatch(format!(
            "expected {kind} table for n = {n}, got {} table for n = {} with {} zeros",
            t.kind,
            t.n,
            t.zeros.len()
        )));
    }
    Ok(())
}

/// Build a plan with the stable (ascending) pole order.
///
/// `dirichlet` holds the zeros of `k_n`; Robin plans also need `robin`, the
/// zeros of `D_n`.
pub fn build_plan(
    n: usize,
    kind: BoundaryKind,
    r: f64,
    dt: f64,
    p: usize,
    dirichlet: &ZeroTable,
    robin: Option<&ZeroTable>,
) -> Result<MarchPlan> {
    build_plan_ordered(n, kind, r, dt, p, dirichlet, robin, PoleOrder::Ascending)
}

#[allow(clippy::too_many_arguments)]
pub fn build_plan_ordered(
    n: usize,
    kind: BoundaryKind,
    r: f64,
    dt: f64,
    p: usize,
    dirichlet: &ZeroTable,
    robin: Option<&ZeroTable>,
    order: PoleOrder,
) -> Result<MarchPlan> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidProblem(format!(
            "time step {dt} must be positive"
        )));
    }
    if !(r > 1.0) {
        return Err(Error::InvalidProblem(format!("radius {r} must exceed 1")));
    }
    let (nodes, _) = legendre_nodes(p)?;
    let u = value_to_coeff_matrix(p)?;
    check_table(dirichlet, n, BoundaryKind::Dirichlet)?;
    let mut alphas = dirichlet.zeros.clone();
    let mut specs: Vec<(Complex64, Complex64, f64)> = Vec::new();
    match kind {
        BoundaryKind::Dirichlet => {
            if order == PoleOrder::Descending {
                alphas.reverse();
            }
            for a in alphas {
                specs.push((a, a * (1.0 - 1.0 / r), 1.0));
            }
        }
        BoundaryKind::Robin => {
            let rt =
                robin.ok_or_else(|| Error::Mismatch("Robin plan needs the zeros of D_n".into()))?;
            check_table(rt, n, BoundaryKind::Robin)?;
            let mut betas = rt.zeros.clone();
            if order == PoleOrder::Descending {
                betas.reverse();
                alphas.reverse();
            }
            specs.push((betas[0], Complex64::new(1.0, 0.0), 0.0));
            for (b, a) in betas[1..].iter().zip(&alphas) {
                specs.push((*b, b - a / r, 1.0));
            }
        }
    }
    let stages = specs
        .iter()
        .enumerate()
        .map(|(j, &(pole, c, pass))| build_stage(pole, c, pass, dt, &nodes, &u, j))
        .collect::<Result<Vec<_>>>()?;
    let direct_gain = stages.iter().map(|s| s.passthrough).product();
    Ok(MarchPlan {
        n,
        kind,
        r,
        dt,
        p,
        nodes,
        conversion: u,
        stages,
        direct_gain,
    })
}

/// Weights extrapolating node values of a step to its right end.
pub fn right_end_weights(p: usize) -> Result<Vec<f64>> {
    let u = value_to_coeff_matrix(p)?;
    // P_i(1) = 1, so the right end value is the sum of the coefficients
    Ok((0..p).map(|l| (0..p).map(|i| u[i * p + l]).sum()).collect())
}

/// Samples of one mode coefficient of the boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSignal {
    pub n: usize,
    pub m: i64,
    pub p: usize,
    pub dt: f64,
    /// Values at `(k-1) dt + dt (1 + x_l)/2`, step-major, `steps * p` entries.
    pub samples: Vec<Complex64>,
    /// Optional values at the step boundaries `k dt`, `steps + 1` entries.
    pub boundary: Option<Vec<Complex64>>,
}

/// Collocation times of step `k` (0-based), in order of the nodes.
pub fn collocation_times(p: usize, dt: f64, k: usize) -> Result<Vec<f64>> {
    let (x, _) = legendre_nodes(p)?;
    Ok(x.iter()
        .map(|xl| (k as f64 + 0.5 * (1.0 + xl)) * dt)
        .collect())
}

impl ModeSignal {
    /// Sample `f` at every collocation time and step boundary.
    pub fn from_fn<F: Fn(f64) -> Complex64>(
        n: usize,
        m: i64,
        p: usize,
        dt: f64,
        steps: usize,
        f: F,
    ) -> Result<Self> {
        let (x, _) = legendre_nodes(p)?;
        let mut samples = Vec::with_capacity(steps * p);
        for k in 0..steps {
            for xl in &x {
                samples.push(f((k as f64 + 0.5 * (1.0 + xl)) * dt));
            }
        }
        let boundary = (0..=steps).map(|k| f(k as f64 * dt)).collect();
        Ok(ModeSignal {
            n,
            m,
            p,
            dt,
            samples,
            boundary: Some(boundary),
        })
    }

    pub fn steps(&self) -> usize {
        self.samples.len() / self.p.max(1)
    }

    /// Boundary values, extrapolating each step's interpolant to its right
    /// end when they were not supplied. The value at `t = 0` is 0.
    pub fn boundary_values(&self) -> Result<Vec<Complex64>> {
        if let Some(b) = &self.boundary {
            return Ok(b.clone());
        }
        let p = self.p;
        let right = right_end_weights(p)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.steps() + 1];
        for k in 0..self.steps() {
            out[k + 1] = (0..p).map(|l| self.samples[k * p + l] * right[l]).sum();
        }
        Ok(out)
    }
}

/// History state of a batch of modes sharing one plan.
#[derive(Debug, Clone)]
pub struct ModeState {
    width: usize,
    /// `h_j` for each stage, `stages * width`.
    h: Vec<Complex64>,
    cur: Vec<Complex64>,
    nxt: Vec<Complex64>,
    pub step: usize,
    /// Largest `|phi_j|` seen at any node, when tracking is enabled.
    pub max_intermediate: f64,
    track: bool,
}

impl ModeState {
    pub fn new(plan: &MarchPlan, width: usize) -> Self {
        ModeState {
            width,
            h: vec![Complex64::new(0.0, 0.0); plan.stages.len() * width],
            cur: vec![Complex64::new(0.0, 0.0); plan.p * width],
            nxt: vec![Complex64::new(0.0, 0.0); plan.p * width],
            step: 0,
            max_intermediate: 0.0,
            track: false,
        }
    }

    /// Record the largest intermediate magnitude while marching.
    pub fn tracking(mut self) -> Self {
        self.track = true;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn history(&self) -> &[Complex64] {
        &self.h
    }

    /// Advance one step.
    ///
    /// `nodes[l * width + i]` is the input of mode `i` at node `l` of this
    /// step, `end[i]` its value at the end of the step. Writes the filter
    /// output at the end of the step to `out`.
    pub fn advance(
        &mut self,
        plan: &MarchPlan,
        nodes: &[Complex64],
        end: &[Complex64],
        out: &mut [Complex64],
    ) {
        let (w, p) = (self.width, plan.p);
        debug_assert_eq!(nodes.len(), p * w);
        self.cur.copy_from_slice(nodes);
        if self.track {
            for v in nodes {
                self.max_intermediate = self.max_intermediate.max(v.norm());
            }
        }
        let last = plan.stages.len().saturating_sub(1);
        for (j, st) in plan.stages.iter().enumerate() {
            let h = &mut self.h[j * w..(j + 1) * w];
            // node values of the next stage (not needed after the last one)
            if j < last || self.track {
                for l in 0..p {
                    let row = &mut self.nxt[l * w..(l + 1) * w];
                    let e = st.scaled_decay[l];
                    let pass = st.passthrough;
                    for i in 0..w {
                        row[i] = self.cur[l * w + i] * pass + e * h[i];
                    }
                    for s in 0..p {
                        let c = st.scaled_w[l * p + s];
                        let src = &self.cur[s * w..(s + 1) * w];
                        for i in 0..w {
                            row[i] += c * src[i];
                        }
                    }
                }
            }
            for hi in h.iter_mut() {
                *hi *= st.step_decay;
            }
            for l in 0..p {
                let ql = st.q[l];
                let src = &self.cur[l * w..(l + 1) * w];
                for i in 0..w {
                    h[i] += ql * src[i];
                }
            }
            if j < last || self.track {
                std::mem::swap(&mut self.cur, &mut self.nxt);
                if self.track {
                    for v in &self.cur {
                        self.max_intermediate = self.max_intermediate.max(v.norm());
                    }
                }
            }
        }
        for i in 0..w {
            let mut acc = end[i] * plan.direct_gain;
            for (j, st) in plan.stages.iter().enumerate() {
                acc += st.multiplier * self.h[j * w + i];
            }
            out[i] = acc;
        }
        self.step += 1;
    }
}

fn check_signal(plan: &MarchPlan, signal: &ModeSignal) -> Result<()> {
    if signal.p != plan.p || signal.n != plan.n {
        return Err(Error::Mismatch(format!(
            "signal (n = {}, p = {}) does not fit plan (n = {}, p = {})",
            signal.n, signal.p, plan.n, plan.p
        )));
    }
    if (signal.dt - plan.dt).abs() > 1e-12 * plan.dt {
        return Err(Error::Mismatch(format!(
            "signal dt {} differs from plan dt {}",
            signal.dt, plan.dt
        )));
    }
    if !signal.samples.len().is_multiple_of(plan.p) {
        return Err(Error::Mismatch(
            "sample count is not a multiple of p".into(),
        ));
    }
    Ok(())
}

/// March one mode; returns the filter output at `k dt`, `k = 0..=steps`.
pub fn march(plan: &MarchPlan, signal: &ModeSignal) -> Result<Vec<Complex64>> {
    march_tracked(plan, signal, false).map(|(v, _)| v)
}

fn march_tracked(
    plan: &MarchPlan,
    signal: &ModeSignal,
    track: bool,
) -> Result<(Vec<Complex64>, f64)> {
    check_signal(plan, signal)?;
    let steps = signal.steps();
    let boundary = signal.boundary_values()?;
    if boundary.len() != steps + 1 {
        return Err(Error::Mismatch(format!(
            "{} boundary samples for {steps} steps",
            boundary.len()
        )));
    }
    let mut state = ModeState::new(plan, 1);
    if track {
        state = state.tracking();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); steps + 1];
    out[0] = boundary[0] * plan.direct_gain;
    let mut buf = [Complex64::new(0.0, 0.0)];
    for k in 0..steps {
        let nodes = &signal.samples[k * plan.p..(k + 1) * plan.p];
        state.advance(plan, nodes, &boundary[k + 1..k + 2], &mut buf);
        out[k + 1] = buf[0];
    }
    Ok((out, state.max_intermediate))
}

/// March a Dirichlet mode: returns `phi_n(k dt)`; the mode field is
/// `phi_n(t - r + 1) / r`.
pub fn march_dirichlet(plan: &MarchPlan, signal: &ModeSignal) -> Result<Vec<Complex64>> {
    if plan.kind != BoundaryKind::Dirichlet {
        return Err(Error::Mismatch(
            "march_dirichlet needs a Dirichlet plan".into(),
        ));
    }
    march(plan, signal)
}

/// March a Robin mode: returns `psi_n(k dt)`; the mode field is
/// `-psi_n(t - r + 1) / r`.
pub fn march_robin(plan: &MarchPlan, signal: &ModeSignal) -> Result<Vec<Complex64>> {
    if plan.kind != BoundaryKind::Robin {
        return Err(Error::Mismatch("march_robin needs a Robin plan".into()));
    }
    march(plan, signal)
}

/// Largest intermediate magnitude under each pole order.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingReport {
    pub n: usize,
    pub r: f64,
    pub data_max: f64,
    pub ascending_max: f64,
    pub descending_max: f64,
    pub ascending_output_max: f64,
    pub descending_output_max: f64,
}

/// Run the same Dirichlet march with ascending and reversed pole order.
pub fn pole_ordering_study(
    n: usize,
    r: f64,
    dirichlet: &ZeroTable,
    signal: &ModeSignal,
) -> Result<OrderingReport> {
    if n > 128 {
        return Err(Error::Domain(format!(
            "ordering study limited to n <= 128, got {n}"
        )));
    }
    let mut maxes = Vec::new();
    for order in [PoleOrder::Ascending, PoleOrder::Descending] {
        let plan = build_plan_ordered(
            n,
            BoundaryKind::Dirichlet,
            r,
            signal.dt,
            signal.p,
            dirichlet,
            None,
            order,
        )?;
        let (out, inter) = march_tracked(&plan, signal, true)?;
        let omax = out.iter().map(|v| v.norm()).fold(0.0, f64::max);
        maxes.push((inter, omax));
    }
    let data_max = signal.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(OrderingReport {
        n,
        r,
        data_max,
        ascending_max: maxes[0].0,
        descending_max: maxes[1].0,
        ascending_output_max: maxes[0].1,
        descending_output_max: maxes[1].1,
    })
}
