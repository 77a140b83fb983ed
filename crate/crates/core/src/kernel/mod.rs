//! Residues of the nonreflecting kernels, the time-domain kernel and its
//! Laplace transform, and growth asymptotics of the residues.

pub mod ode;

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::LOG10_E;

use crate::boundary::BoundaryKind;
use crate::error::{Error, Result};
use crate::special::{eval_kn_log_ratio, ln_hankel_poly, DdComplex, ZeroCurvePoint, CURVE_T0};
use crate::zeros::ZeroTable;

pub use ode::{
    dopri5, eigenvector_condition, ode_oracle_dirichlet, ode_oracle_dirichlet_series,
    EigenConditionReport, IntegratorStats, OracleValue, ORACLE_TOL,
};

/// Decimal digits carried by an `f64`.
pub const AVAILABLE_DIGITS: f64 = 15.65;
/// Digits that must survive cancellation for the kernel sum to be trusted.
pub const MIN_SURVIVING_DIGITS: f64 = 2.0;

/// Residues of the kernel at its poles, aligned with the zero table.
///
/// Robin residues are stored divided by `r`, the factor multiplying the
/// kernel in the boundary condition, so that for `n = 0` the single entry is
/// `-1/r`.
#[derive(Debug, Clone, Serialize)]
pub struct ResidueSet {
    pub n: usize,
    pub r: f64,
    pub kind: BoundaryKind,
    pub values: Vec<Complex64>,
    /// Natural log of each residue (log-magnitude, phase).
    pub logs: Vec<Complex64>,
    /// Entries whose magnitude is not representable; `values` holds NaN there.
    pub overflowed: Vec<bool>,
    /// Rounding remainders, `values + tails` carries about 32 digits.
    #[serde(skip)]
    pub tails: Vec<Complex64>,
}

/// Running product in double-double with a separate binary exponent.
struct ScaledProduct {
    acc: DdComplex,
    exp2: i32,
}

impl ScaledProduct {
    const STEP: i32 = 512;

    fn new() -> Self {
        ScaledProduct {
            acc: DdComplex::from_c64(Complex64::new(1.0, 0.0)),
            exp2: 0,
        }
    }

    fn mul(&mut self, f: DdComplex) {
        self.acc = self.acc * f;
        let m = self.acc.magnitude();
        if m > pow2(Self::STEP) {
            self.acc = self.acc.scale(pow2(-Self::STEP));
            self.exp2 += Self::STEP;
        } else if m < pow2(-Self::STEP) && m > 0.0 {
            self.acc = self.acc.scale(pow2(Self::STEP));
            self.exp2 -= Self::STEP;
        }
    }
}

fn pow2(e: i32) -> f64 {
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// `num / den`, or `None` if the quotient is not representable.
fn quotient(num: ScaledProduct, den: ScaledProduct) -> Option<DdComplex> {
    let mut q = num.acc / den.acc;
    let mut e = num.exp2 - den.exp2;
    while e != 0 {
        let step = e.clamp(-ScaledProduct::STEP, ScaledProduct::STEP);
        q = q.scale(pow2(step));
        e -= step;
    }
    let v = q.to_c64();
    (v.re.is_finite() && v.im.is_finite()).then_some(q)
}

/// `r x - y` in double-double.
fn scaled_difference(x: Complex64, r: f64, y: Complex64) -> DdComplex {
    DdComplex::from_c64(x) * r - DdComplex::from_c64(y)
}

impl ResidueSet {
    fn build(
        n: usize,
        r: f64,
        kind: BoundaryKind,
        logs: Vec<Complex64>,
        exact: Vec<Option<DdComplex>>,
    ) -> Self {
        let mut values = Vec::with_capacity(logs.len());
        let mut tails = Vec::with_capacity(logs.len());
        let mut overflowed = Vec::with_capacity(logs.len());
        for (l, q) in logs.iter().zip(exact) {
            let (v, t) = match q {
                Some(q) => (q.to_c64(), q.tail()),
                None => (l.exp(), Complex64::new(0.0, 0.0)),
            };
            let bad = !(v.re.is_finite() && v.im.is_finite());
            overflowed.push(bad);
            values.push(if bad {
                Complex64::new(f64::NAN, f64::NAN)
            } else {
                v
            });
            tails.push(if bad { Complex64::new(0.0, 0.0) } else { t });
        }
        ResidueSet {
            n,
            r,
            kind,
            values,
            logs,
            overflowed,
            tails,
        }
    }

    /// Residue `j` in double-double.
    pub(crate) fn extended(&self, j: usize) -> DdComplex {
        let tail = self.tails.get(j).copied().unwrap_or_default();
        DdComplex::from_parts(self.values[j], tail)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn any_overflow(&self) -> bool {
        self.overflowed.iter().any(|&b| b)
    }

    /// `log10 max_j |residue_j|`, valid even when entries overflow.
    pub fn log10_max(&self) -> f64 {
        self.logs
            .iter()
            .map(|l| l.re * LOG10_E)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sum of the residues, accumulated in double-double.
    pub fn sum(&self) -> Complex64 {
        (0..self.len())
            .fold(DdComplex::default(), |acc, j| acc + self.extended(j))
            .to_c64()
    }
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::Domain(format!(
            "radius ratio must exceed 1, got {r}"
        )));
    }
    Ok(())
}

fn check_kind(table: &ZeroTable, kind: BoundaryKind, n: usize) -> Result<()> {
    if table.kind != kind || table.n != n || table.zeros.len() != kind.count(n) {
        return Err(Error::Mismatch(format!(
            "expected {} table for n = {n}, got {} table for n = {} with {} zeros",
            kind.name(),
            table.kind.name(),
            table.n,
            table.zeros.len()
        )));
    }
    Ok(())
}

/// Residues `a_j = prod_k (alpha_j - alpha_k / r) / prod_{k != j} (alpha_j - alpha_k)`.
pub fn dirichlet_residues(n: usize, r: f64, zeros: &ZeroTable) -> Result<ResidueSet> {
    check_r(r)?;
    check_kind(zeros, BoundaryKind::Dirichlet, n)?;
    let a = &zeros.zeros;
    let logs = a
        .iter()
        .enumerate()
        .map(|(j, &aj)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &ak) in a.iter().enumerate() {
                acc += (aj - ak / r).ln();
                if k != j {
                    acc -= (aj - ak).ln();
                }
            }
            acc
        })
        .collect();
    let exact = (0..a.len())
        .map(|j| {
            let (mut num, mut den) = (ScaledProduct::new(), ScaledProduct::new());
            for (k, &ak) in a.iter().enumerate() {
                num.mul(scaled_difference(a[j], r, ak));
                let d = if k == j {
                    DdComplex::from_c64(Complex64::new(1.0, 0.0))
                } else {
                    DdComplex::from_c64(a[j]) - DdComplex::from_c64(ak)
                };
                den.mul(d * r);
            }
            quotient(num, den)
        })
        .collect();
    Ok(ResidueSet::build(
        n,
        r,
        BoundaryKind::Dirichlet,
        logs,
        exact,
    ))
}

/// Robin residues `-prod_k (beta_j - alpha_k / r) / prod_{k != j} (beta_j - beta_k)`,
/// divided by `r`.
pub fn robin_residues(
    n: usize,
    r: f64,
    dirichlet: &ZeroTable,
    robin: &ZeroTable,
) -> Result<ResidueSet> {
    check_r(r)?;
    check_kind(dirichlet, BoundaryKind::Dirichlet, n)?;
    check_kind(robin, BoundaryKind::Robin, n)?;
    let a = &dirichlet.zeros;
    let b = &robin.zeros;
    let minus_over_r = Complex64::new(-r.ln(), std::f64::consts::PI);
    let logs = b
        .iter()
        .enumerate()
        .map(|(j, &bj)| {
            let mut acc = minus_over_r;
            for &ak in a {
                acc += (bj - ak / r).ln();
            }
            for (k, &bk) in b.iter().enumerate() {
                if k != j {
                    acc -= (bj - bk).ln();
                }
            }
            acc
        })
        .collect();
    let exact = (0..b.len())
        .map(|j| {
            let (mut num, mut den) = (ScaledProduct::new(), ScaledProduct::new());
            num.mul(DdComplex::from_c64(Complex64::new(-1.0, 0.0)));
            den.mul(DdComplex::from_c64(Complex64::new(r, 0.0)));
            for &ak in a {
                num.mul(scaled_difference(b[j], r, ak));
                den.mul(DdComplex::from_c64(Complex64::new(r, 0.0)));
            }
            for (k, &bk) in b.iter().enumerate() {
                if k != j {
                    den.mul(DdComplex::from_c64(b[j]) - DdComplex::from_c64(bk));
                }
            }
            quotient(num, den)
        })
        .collect();
    Ok(ResidueSet::build(n, r, BoundaryKind::Robin, logs, exact))
}

/// `n (n + 1) / 2 (1/r - 1)`, the Dirichlet kernel at `t = 0`.
pub fn dirichlet_kernel_at_zero(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    0.5 * nf * (nf + 1.0) * (1.0 / r - 1.0)
}

/// Estimated decimal digits lost summing the residues at `t = 0`.
pub fn digits_lost(residues: &ResidueSet) -> f64 {
    if residues.is_empty() {
        return 0.0;
    }
    let c0 = match residues.kind {
        BoundaryKind::Dirichlet => dirichlet_kernel_at_zero(residues.n, residues.r).abs(),
        BoundaryKind::Robin => residues.sum().norm(),
    };
    if c0 == 0.0 || !c0.is_finite() {
        return f64::INFINITY;
    }
    (residues.log10_max() - c0.log10()).max(0.0)
}

/// `C(t) = sum_j res_j e^{pole_j t}`, refused when cancellation would leave
/// fewer than two significant digits.
pub fn kernel_time(residues: &ResidueSet, poles: &ZeroTable, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("kernel time must be >= 0, got {t}")));
    }
    check_kind(poles, residues.kind, residues.n)?;
    if residues.is_empty() {
        return Ok(0.0);
    }
    let lost = digits_lost(residues);
    if residues.any_overflow() || AVAILABLE_DIGITS - lost < MIN_SURVIVING_DIGITS {
        return Err(Error::PrecisionLoss {
            n: residues.n,
            r: residues.r,
            digits_lost: lost,
            available: AVAILABLE_DIGITS,
        });
    }
    let mut acc = DdComplex::default();
    let mut scale = 0.0;
    for (j, &p) in poles.zeros.iter().enumerate() {
        let term = residues.extended(j) * DdComplex::from_c64((p * t).exp());
        scale += term.magnitude();
        acc = acc + term;
    }
    let sum = acc.to_c64();
    let tol = 1e3 * f64::EPSILON * scale;
    if sum.im.abs() > tol.max(1e-6 * sum.re.abs()) {
        return Err(Error::PrecisionLoss {
            n: residues.n,
            r: residues.r,
            digits_lost: (sum.im.abs() / (f64::EPSILON * scale)).log10(),
            available: AVAILABLE_DIGITS,
        });
    }
    Ok(sum.re)
}

/// `e^z - 1` without cancellation for small `z`.
fn expm1(z: Complex64) -> Complex64 {
    let half = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half * half,
        z.re.exp() * z.im.sin(),
    )
}

/// Laplace transform of the Dirichlet kernel,
/// `r e^{s (r - 1)} k_n(s r) / k_n(s) - 1 = p_n(s r) / (r^n p_n(s)) - 1`.
pub fn kernel_laplace(n: usize, r: f64, s: Complex64) -> Result<Complex64> {
    check_r(r)?;
    if s == Complex64::new(0.0, 0.0) || !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::Domain(format!(
            "kernel transform needs finite s != 0, got {s}"
        )));
    }
    if n == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // Newton distance to the nearest zero of k_n
    let distance = eval_kn_log_ratio(n, s)?.norm();
    if distance < 1e-10 * n as f64 {
        return Err(Error::Pole { n, distance });
    }
    let log_ratio = ln_hankel_poly(n, s * r)? - n as f64 * r.ln() - ln_hankel_poly(n, s)?;
    Ok(expm1(log_ratio))
}

/// Real part of the growth exponent of the residues at a point `z` of the
/// limiting zero curve.
fn growth_exponent_at(z: Complex64, r: f64) -> f64 {
    let s = (1.0 + z * z * r * r).sqrt();
    (r - 1.0) * z.re - (1.0 + s).norm().ln() + (z * r).norm().ln() + s.re
}

/// Predicted slope of `log10 max_j |a_j(r)|` against `n`.
pub fn growth_exponent_curve(r: f64) -> Result<f64> {
    check_r(r)?;
    const SAMPLES: usize = 4000;
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    let eval = |t: f64| growth_exponent_at(ZeroCurvePoint::at(t).z, r);
    for i in 0..=SAMPLES {
        let v = eval(CURVE_T0 * i as f64 / SAMPLES as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // golden-section polish around the best sample
    let h = CURVE_T0 / SAMPLES as f64;
    let (mut lo, mut hi) = (
        (best_i as f64 * h - h).max(0.0),
        (best_i as f64 * h + h).min(CURVE_T0),
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if eval(a) > eval(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    Ok(best.max(eval(0.5 * (lo + hi))) * LOG10_E)
}

/// One row of a diagnostics table.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticRow {
    pub n: usize,
    pub r: f64,
    pub quantity: String,
    pub value: f64,
}

/// Residue growth, residue-sum identity error, kernel at zero and digits
/// lost, for each `n` in `orders`.
pub fn residue_diagnostics(orders: &[usize], r: f64) -> Result<Vec<DiagnosticRow>> {
    let mut rows = Vec::new();
    let mut push = |n: usize, q: &str, v: f64| {
        rows.push(DiagnosticRow {
            n,
            r,
            quantity: q.to_string(),
            value: v,
        })
    };
    for &n in orders {
        let z = crate::zeros::dirichlet_zeros(n)?;
        let res = dirichlet_residues(n, r, &z)?;
        let exact = dirichlet_kernel_at_zero(n, r);
        push(n, "log10_max_residue", res.log10_max());
        if n > 0 && !res.any_overflow() {
            push(
                n,
                "residue_sum_rel_error",
                ((res.sum() - exact).norm() / exact.abs()).max(0.0),
            );
        }
        push(n, "kernel_at_zero", exact);
        push(n, "digits_lost", digits_lost(&res));
    }
    push(0, "predicted_slope", growth_exponent_curve(r)?);
    Ok(rows)
}

/// Least-squares slope of `log10 max_j |a_j(r)|` over `orders`.
pub fn residue_growth_slope(orders: &[usize], r: f64) -> Result<f64> {
    let mut pts = Vec::with_capacity(orders.len());
    for &n in orders {
        let z = crate::zeros::dirichlet_zeros(n)?;
        pts.push((n as f64, dirichlet_residues(n, r, &z)?.log10_max()));
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2))
    });
    Ok(num / den)
}
