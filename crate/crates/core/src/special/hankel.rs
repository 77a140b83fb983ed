//! Modified spherical Hankel functions of complex argument.
//!
//! `k_n(z) = p_n(z) e^{-z} / z^{n+1}` where `p_n` is the monic polynomial
//! generated by `p_{n+1} = (2n+1) p_n + z^2 p_{n-1}`, `p_0 = 1`, `p_1 = z + 1`.
//! The polynomial grows factorially with `n`, so it is carried as a mantissa
//! plus a binary exponent. Ratios such as `k_n / k_n'` never need the
//! exponent at all.
//!
//! `D_n(z) = z k_n'(z) + k_n(z) = q_{n+1}(z) e^{-z} / z^{n+1}` with
//! `q_{n+1} = z p_n' - (z + n) p_n`.

use num_complex::Complex64;

use super::dd::DdComplex;
use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1.0e150;
const RESCALE_BITS: i64 = 498;

/// Multiply by `2^e` without intermediate overflow.
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// `p_n`, `p_n'` in double-double, sharing the binary exponent `exp2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledPoly {
    value: DdComplex,
    deriv: DdComplex,
    pub exp2: i64,
}

impl ScaledPoly {
    pub fn value(&self) -> Complex64 {
        self.value.to_c64()
    }

    pub fn deriv(&self) -> Complex64 {
        self.deriv.to_c64()
    }

    /// Mantissa of `z^{n+2} e^z k_n'(z) = z p' - (z + n + 1) p`.
    fn kn_deriv_scaled(&self, n: usize, z: DdComplex) -> DdComplex {
        z * self.deriv - z.add_real(n as f64 + 1.0) * self.value
    }

    /// `q_{n+1}` and its derivative, sharing this exponent.
    ///
    /// `q' = (z + n + 1) p' - (2n + 1) p`, which follows from the ODE
    /// `z p'' = 2 (z + n) p' - 2 n p` satisfied by `p_n`.
    fn robin(&self, n: usize, z: DdComplex) -> (DdComplex, DdComplex) {
        let nf = n as f64;
        let q = z * self.deriv - z.add_real(nf) * self.value;
        let dq = z.add_real(nf + 1.0) * self.deriv - self.value * (2.0 * nf + 1.0);
        (q, dq)
    }
}

pub(crate) fn hankel_poly(n: usize, z: Complex64) -> ScaledPoly {
    let one = DdComplex::from_c64(Complex64::new(1.0, 0.0));
    let zero = DdComplex::default();
    if n == 0 {
        return ScaledPoly {
            value: one,
            deriv: zero,
            exp2: 0,
        };
    }
    let zd = DdComplex::from_c64(z);
    let z2 = zd * zd;
    let two_z = zd * 2.0;
    let (mut p_prev, mut p) = (one, zd.add_real(1.0));
    let (mut d_prev, mut d) = (zero, one);
    let mut exp2 = 0i64;
    let down = 2f64.powi(-(RESCALE_BITS as i32));
    for k in 1..n {
        let c = (2 * k + 1) as f64;
        let p_next = p * c + z2 * p_prev;
        let d_next = d * c + two_z * p_prev + z2 * d_prev;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        if p.magnitude().max(d.magnitude()) > RESCALE_ABOVE {
            p_prev = p_prev.scale(down);
            p = p.scale(down);
            d_prev = d_prev.scale(down);
            d = d.scale(down);
            exp2 += RESCALE_BITS;
        }
    }
    ScaledPoly {
        value: p,
        deriv: d,
        exp2,
    }
}

/// Returns `mantissa * 2^exp2 * e^{-z} / z^{n+1}`, or an overflow error.
fn apply_prefactor(n: usize, z: Complex64, mantissa: Complex64, exp2: i64) -> Result<Complex64> {
    if mantissa == Complex64::new(0.0, 0.0) {
        return Ok(mantissa);
    }
    let ln2 = std::f64::consts::LN_2;
    let log_mag =
        mantissa.norm().ln() + exp2 as f64 * ln2 - z.re - (n as f64 + 1.0) * z.norm().ln();
    if log_mag > f64::MAX.ln() {
        return Err(Error::Overflow(format!(
            "|value| = e^{log_mag:.1} at n = {n}, z = {z}"
        )));
    }
    // z^{-(n+1)} by repeated squaring with exponent tracking.
    let mut pow = Complex64::new(1.0, 0.0);
    let mut pow_exp = 0i64;
    let mut base = z.inv();
    let mut base_exp = 0i64;
    let mut k = n + 1;
    let renorm = |v: &mut Complex64, e: &mut i64| {
        let m = v.re.abs().max(v.im.abs());
        if m > 0.0 {
            let shift = m.log2().floor() as i64;
            if shift.abs() > 400 {
                *v *= ldexp(1.0, -shift);
                *e += shift;
            }
        }
    };
    while k > 0 {
        if k & 1 == 1 {
            pow *= base;
            pow_exp += base_exp;
            renorm(&mut pow, &mut pow_exp);
        }
        k >>= 1;
        if k > 0 {
            base *= base;
            base_exp *= 2;
            renorm(&mut base, &mut base_exp);
        }
    }
    let mut value = mantissa * pow;
    let mut total_exp = exp2 + pow_exp;
    // e^{-Re z} split into a power of two and a factor in [1, 2).
    let k2 = (-z.re / ln2).floor();
    let frac = (-z.re - k2 * ln2).exp();
    value *= Complex64::from_polar(frac, -z.im);
    total_exp += k2 as i64;
    Ok(Complex64::new(
        ldexp(value.re, total_exp),
        ldexp(value.im, total_exp),
    ))
}

/// Cancellation the double-double recurrence absorbs while leaving full
/// double precision.
const MAX_CANCELLATION_LN: f64 = 32.2; // ln 1e14

/// Which combination of `p_n`, `p_n'` a direct evaluation forms.
#[derive(Clone, Copy)]
enum Combo {
    Value,
    KnDeriv,
    Robin,
}

/// Direct evaluation of `combo` at `z`, or `None` when the recurrence loses
/// too many digits to cancellation (left half-plane, near the zeros).
fn direct(n: usize, z: Complex64, combo: Combo) -> Option<(Complex64, i64)> {
    let p = hankel_poly(n, z);
    let zd = DdComplex::from_c64(z);
    let nf = n as f64;
    let m = match combo {
        Combo::Value => p.value,
        Combo::KnDeriv => p.kn_deriv_scaled(n, zd),
        Combo::Robin => p.robin(n, zd).0,
    }
    .to_c64();
    if z.re >= 0.0 || n == 0 || m.norm() == 0.0 {
        return Some((m, p.exp2));
    }
    let a = z.norm();
    let bound_poly = hankel_poly(n, Complex64::new(a, 0.0));
    let (bv, bd) = (bound_poly.value().re, bound_poly.deriv().re);
    let bound = match combo {
        Combo::Value => bv,
        Combo::KnDeriv => a * bd + (a + nf + 1.0) * bv,
        Combo::Robin => a * bd + (a + nf) * bv,
    };
    let ln2 = std::f64::consts::LN_2;
    let lost = bound.ln() + bound_poly.exp2 as f64 * ln2 - (m.norm().ln() + p.exp2 as f64 * ln2);
    (lost < MAX_CANCELLATION_LN).then_some((m, p.exp2))
}

fn check_nonzero(z: Complex64) -> Result<()> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Domain("argument z = 0".into()));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    Ok(())
}

/// Modified spherical Hankel function `k_n(z) = sqrt(2/(pi z)) K_{n+1/2}(z)`.
pub fn eval_kn(n: usize, z: Complex64) -> Result<Complex64> {
    check_nonzero(z)?;
    match direct(n, z, Combo::Value) {
        Some((m, e)) => apply_prefactor(n, z, m, e),
        None => {
            let r = Reflection::new(n, z)?;
            r.finish(r.value(), false, n, z)
        }
    }
}

/// Derivative `k_n'(z)`.
pub fn eval_kn_derivative(n: usize, z: Complex64) -> Result<Complex64> {
    check_nonzero(z)?;
    match direct(n, z, Combo::KnDeriv) {
        Some((m, e)) => apply_prefactor(n, z, m / z, e),
        None => {
            let r = Reflection::new(n, z)?;
            r.finish(r.deriv(), true, n, z)
        }
    }
}

/// Newton correction `k_n(z) / k_n'(z)`, free of the exponential prefactor.
pub fn eval_kn_log_ratio(n: usize, z: Complex64) -> Result<Complex64> {
    check_nonzero(z)?;
    if z.re < 0.0 && n > 0 {
        return reflected_ratio(n, z, false);
    }
    let p = hankel_poly(n, z);
    let zd = DdComplex::from_c64(z);
    Ok((zd * p.value).to_c64() / p.kn_deriv_scaled(n, zd).to_c64())
}

/// Robin boundary function `D_n(z) = z k_n'(z) + k_n(z)`.
pub fn eval_dn(n: usize, z: Complex64) -> Result<Complex64> {
    check_nonzero(z)?;
    match direct(n, z, Combo::Robin) {
        Some((m, e)) => apply_prefactor(n, z, m, e),
        None => {
            let r = Reflection::new(n, z)?;
            r.finish(r.robin(), false, n, z)
        }
    }
}

fn dn_deriv_scaled(n: usize, z: DdComplex, q: DdComplex, dq: DdComplex) -> DdComplex {
    z * dq - z.add_real(n as f64 + 1.0) * q
}

/// Derivative `D_n'(z) = (z + n (n + 1) / z) k_n(z)`, from the Bessel equation.
pub fn eval_dn_derivative(n: usize, z: Complex64) -> Result<Complex64> {
    let k = eval_kn(n, z)?;
    let nf = n as f64;
    Ok((z + nf * (nf + 1.0) / z) * k)
}

/// Newton correction `D_n(z) / D_n'(z)`.
pub fn eval_dn_log_ratio(n: usize, z: Complex64) -> Result<Complex64> {
    check_nonzero(z)?;
    if z.re < 0.0 && n > 0 {
        return reflected_ratio(n, z, true);
    }
    let p = hankel_poly(n, z);
    let zd = DdComplex::from_c64(z);
    let (q, dq) = p.robin(n, zd);
    Ok((zd * q).to_c64() / dn_deriv_scaled(n, zd, q, dq).to_c64())
}

const CF_MAX_TERMS: usize = 1_000_000;

/// `i_{n+1}(w) / i_n(w)` by the backward continued fraction (modified Lentz).
fn bessel_i_ratio(n: usize, w: Complex64) -> Result<Complex64> {
    // i_n / i_{n+1} = b_{n+1} + 1 / (b_{n+2} + ...), b_k = (2k + 1) / w
    let tiny = Complex64::new(1e-150, 0.0);
    let winv = w.inv();
    let b = |k: usize| winv * (2.0 * k as f64 + 1.0);
    let mut f = b(n + 1);
    if f.norm() == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for j in 2..=CF_MAX_TERMS {
        let bj = b(n + j);
        d = bj + d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = bj + c.inv();
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok(f.inv());
        }
    }
    Err(Error::NonConvergence {
        what: "Bessel ratio continued fraction",
        index: n,
        iterations: CF_MAX_TERMS,
    })
}

/// Left half-plane evaluation through the reflection
/// `k_n(z) = (-1)^{n+1} (k_n(w) + 2 (-1)^n i_n(w))`, `w = -z`.
///
/// Both terms are evaluated where their recurrences are stable and only
/// ratios against `k_n(w)` are formed, so there is no overflow and no
/// recurrence cancellation near the zeros.
struct Reflection {
    n: f64,
    w: Complex64,
    /// `k_n'(w) / k_n(w)`.
    kd: Complex64,
    /// `i_{n+1}(w) / i_n(w)`.
    rho: Complex64,
    /// `ln(i_n(w) / k_n(w))`.
    ln_ratio: Complex64,
    /// `ln k_n(w)`.
    ln_kw: Complex64,
    sign: f64,
    odd: bool,
}

impl Reflection {
    fn new(n: usize, z: Complex64) -> Result<Self> {
        let w = -z;
        let nf = n as f64;
        let p = hankel_poly(n, w);
        let pv = p.value();
        let kd = p.deriv() / pv - (nf + 1.0) / w - 1.0;
        let rho = bessel_i_ratio(n, w)?;
        // k_{n+1}(w) / k_n(w)
        let up = nf / w - kd;
        let ln_p = pv.ln() + p.exp2 as f64 * std::f64::consts::LN_2;
        let ln_ratio = 2.0 * nf * w.ln() + 2.0 * w - 2.0 * ln_p - (up + rho).ln();
        let ln_kw = ln_p - w - (nf + 1.0) * w.ln();
        Ok(Reflection {
            n: nf,
            w,
            kd,
            rho,
            ln_ratio,
            ln_kw,
            sign: if n.is_multiple_of(2) { 2.0 } else { -2.0 },
            odd: n % 2 == 1,
        })
    }

    /// `a0 + sign I a1` with `I = i_n(w) / k_n(w)`, divided by `I` when
    /// `|I| > 1`; [`Self::ln_scale`] is the log of the divisor.
    fn combine(&self, a0: Complex64, a1: Complex64) -> Complex64 {
        if self.ln_ratio.re > 0.0 {
            a0 * (-self.ln_ratio).exp() + self.sign * a1
        } else {
            a0 + self.sign * a1 * self.ln_ratio.exp()
        }
    }

    fn ln_scale(&self) -> Complex64 {
        if self.ln_ratio.re > 0.0 {
            self.ln_ratio
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `(k_n(w) + sign i_n(w)) / k_n(w)`, scaled.
    fn value(&self) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        self.combine(one, one)
    }

    /// `(k_n'(w) + sign i_n'(w)) / k_n(w)`, scaled.
    fn deriv(&self) -> Complex64 {
        self.combine(self.kd, self.rho + self.n / self.w)
    }

    /// `w` times the derivative bracket plus the value bracket, scaled; the
    /// bracket of `D_n(z)`.
    fn robin(&self) -> Complex64 {
        self.combine(self.w * self.kd + 1.0, self.w * self.rho + self.n + 1.0)
    }

    /// `(-1)^{n+1+flip} k_n(w) e^{ln_scale} factor`.
    fn finish(&self, factor: Complex64, flip: bool, n: usize, z: Complex64) -> Result<Complex64> {
        if factor.norm() == 0.0 {
            return Ok(factor);
        }
        let ln_v = self.ln_kw + self.ln_scale() + factor.ln();
        if ln_v.re > f64::MAX.ln() {
            return Err(Error::Overflow(format!(
                "|value| = e^{:.1} at n = {n}, z = {z}",
                ln_v.re
            )));
        }
        let v = ln_v.exp();
        Ok(if self.odd ^ flip { v } else { -v })
    }
}

fn reflected_ratio(n: usize, z: Complex64, robin: bool) -> Result<Complex64> {
    let r = Reflection::new(n, z)?;
    let f = r.value();
    if robin {
        Ok(-r.robin() / ((r.w + r.n * (r.n + 1.0) / r.w) * f))
    } else {
        Ok(-f / r.deriv())
    }
}

/// Natural log of `p_n(z)`, up to a multiple of `2 pi i`.
pub(crate) fn ln_hankel_poly(n: usize, z: Complex64) -> Result<Complex64> {
    check_nonzero(z)?;
    let ln2 = std::f64::consts::LN_2;
    match direct(n, z, Combo::Value) {
        Some((m, e)) => Ok(m.ln() + e as f64 * ln2),
        None => {
            let r = Reflection::new(n, z)?;
            let parity = if n.is_multiple_of(2) {
                std::f64::consts::PI
            } else {
                0.0
            };
            Ok(r.ln_kw
                + r.ln_scale()
                + r.value().ln()
                + Complex64::new(0.0, parity)
                + z
                + (n as f64 + 1.0) * z.ln())
        }
    }
}
