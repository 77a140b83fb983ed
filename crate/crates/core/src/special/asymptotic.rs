//! Uniform-asymptotic geometry of the zeros of `k_n` and `D_n`.
//!
//! The scaled zeros `alpha / (n + 1/2)` cluster on the arc
//! `z(t) = -(t^2 - t tanh t)^{1/2} ± i (t coth t - t^2)^{1/2}`, `t in [0, t0]`,
//! joining `±i` through the point `-(t0^2 - 1)^{1/2}` on the negative real
//! axis. Along the arc the map
//!
//! ```text
//! F(z) = (2/3) zeta^{3/2} = ln(i (1 + sqrt(1 + z^2)) / z) - sqrt(1 + z^2)
//! ```
//!
//! is purely imaginary. `F` is taken real on the segment `(0, i)` and is
//! extended to the lower half-plane by `F(conj z) = conj F(z)`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Positive root of `t = coth t`.
pub const CURVE_T0: f64 = 1.199_678_640_257_734;

const INVERT_MAX_ITER: usize = 50;
const INVERT_TOL: f64 = 1e-13;
/// Accepted relative residual once Newton stagnates on rounding noise.
const INVERT_NOISE: f64 = 1e-12;

/// Leading-order estimate of the `j`-th negative zero of `Ai`.
pub fn airy_zero_estimate(j: usize) -> f64 {
    assert!(j >= 1, "Airy zero index starts at 1");
    -(1.5 * PI * (j as f64 - 0.25)).powf(2.0 / 3.0)
}

/// Leading-order estimate of the `j`-th negative zero of `Ai'`.
pub fn airy_prime_zero_estimate(j: usize) -> f64 {
    assert!(j >= 1, "Airy zero index starts at 1");
    -(1.5 * PI * (j as f64 - 0.75)).powf(2.0 / 3.0)
}

/// A point on the upper half of the limiting zero curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCurvePoint {
    pub t: f64,
    pub z: Complex64,
}

impl ZeroCurvePoint {
    pub fn at(t: f64) -> Self {
        let t = t.clamp(0.0, CURVE_T0);
        // t (t - tanh t); series near 0 avoids cancellation
        let re2 = if t < 1e-3 {
            let t2 = t * t;
            t2 * t2 * (1.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * 17.0 / 315.0))
        } else {
            t * (t - t.tanh())
        };
        let coth_t = if t == 0.0 { 1.0 } else { t / t.tanh() };
        let im2 = (coth_t - t * t).max(0.0);
        ZeroCurvePoint {
            t,
            z: Complex64::new(-re2.max(0.0).sqrt(), im2.sqrt()),
        }
    }
}

/// `F` on the closed upper half-plane (continuous onto the negative real axis).
fn phase_upper(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let s = ((z + i) * (z - i)).sqrt();
    if s.norm() < 0.5 {
        // F = atanh(s) - s near the turning point z = i
        let s2 = s * s;
        let mut pow = s * s2;
        let mut sum = pow / 3.0;
        for k in 2..60 {
            pow *= s2;
            let term = pow / (2 * k + 1) as f64;
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        return sum;
    }
    let ln_z = Complex64::new(z.norm().ln(), z.im.atan2(z.re).abs());
    (1.0 + s).ln() - ln_z + Complex64::new(0.0, FRAC_PI_2) - s
}

/// `(2/3) zeta^{3/2}` as a function of `z`.
pub fn zeta_phase(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        phase_upper(z)
    } else {
        phase_upper(z.conj()).conj()
    }
}

/// Forward map `z -> zeta`.
pub fn forward_zeta(z: Complex64) -> Complex64 {
    let f = zeta_phase(z);
    if f == Complex64::new(0.0, 0.0) {
        return f;
    }
    (1.5 * f).powf(2.0 / 3.0)
}

/// Invert `zeta(z)`, choosing the branch that is real on the positive
/// imaginary axis.
///
/// A bisection on the curve parameter supplies the seed; complex Newton on
/// `F(z) = (2/3) zeta^{3/2}` then polishes it.
pub fn invert_zeta(zeta: Complex64) -> Result<Complex64> {
    if zeta == Complex64::new(0.0, 0.0) {
        // turning point of the arc
        return Ok(Complex64::new(0.0, 1.0));
    }
    let target = (1.5 * zeta.ln()).exp() / 1.5;
    // The solve happens in the upper half-plane; lower-half targets are
    // mirrored.
    let lower = target.im > 0.0;
    let goal = if lower { target.conj() } else { target };

    let want = -goal.im;
    let mut z = if want <= 0.0 {
        // target on the segment (0, i) of the imaginary axis
        Complex64::new(0.0, 0.5)
    } else if want >= FRAC_PI_2 {
        ZeroCurvePoint::at(CURVE_T0).z
    } else {
        let (mut lo, mut hi) = (0.0f64, CURVE_T0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if -phase_upper(ZeroCurvePoint::at(mid).z).im < want {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        ZeroCurvePoint::at(0.5 * (lo + hi)).z
    };

    // Newton on zeta itself, which is regular at the turning point where
    // F ~ (z - i)^{3/2} is not.
    let zeta_goal = if lower { zeta.conj() } else { zeta };
    let mut best = (f64::INFINITY, z);
    for _ in 0..INVERT_MAX_ITER {
        let root = (1.5 * phase_upper(z)).powf(1.0 / 3.0);
        let resid = root * root - zeta_goal;
        let rn = resid.norm();
        if rn < best.0 {
            best = (rn, z);
        } else if best.0 <= INVERT_NOISE * zeta_goal.norm() {
            // stagnated at the evaluation noise floor
            break;
        }
        if rn <= INVERT_TOL * zeta_goal.norm() {
            break;
        }
        let s = (1.0 + z * z).sqrt();
        let deriv = -s / (z * root);
        if !deriv.is_finite() || deriv.norm() == 0.0 {
            break;
        }
        let step = resid / deriv;
        z -= step;
        if step.norm() <= 1e-15 * z.norm() {
            best = (0.0, z);
            break;
        }
    }
    if best.0 <= INVERT_NOISE * zeta_goal.norm() {
        let z = best.1;
        return Ok(if lower { z.conj() } else { z });
    }
    Err(Error::NonConvergence {
        what: "invert_zeta",
        index: 0,
        iterations: INVERT_MAX_ITER,
    })
}

/// Seed `zeta` for the `j`-th Dirichlet zero (lower half-plane).
pub fn dirichlet_zeta(n: usize, j: usize) -> Complex64 {
    airy_ray(n, airy_zero_estimate(j))
}

/// Seed `xi` for the `j`-th Robin zero (lower half-plane).
pub fn robin_xi(n: usize, j: usize) -> Complex64 {
    airy_ray(n, airy_prime_zero_estimate(j))
}

fn airy_ray(n: usize, a: f64) -> Complex64 {
    let nu = n as f64 + 0.5;
    Complex64::from_polar(1.0, -2.0 * PI / 3.0) * (nu.powf(-2.0 / 3.0) * a)
}
