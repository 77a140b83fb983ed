//! Reference solution of the mode recursion as a lower-bidiagonal ODE
//! system, and the (unstable) eigen-decomposition route for comparison.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::zeros::ZeroTable;

/// Step statistics of an adaptive integration.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand–Prince 5(4) for complex systems, from `t0` to `t1`.
pub fn dopri5<F>(
    f: F,
    t0: f64,
    y0: &[Complex64],
    t1: f64,
    rtol: f64,
    atol: f64,
    max_steps: usize,
) -> Result<(Vec<Complex64>, IntegratorStats)>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    let dim = y0.len();
    let mut stats = IntegratorStats::default();
    let mut y = y0.to_vec();
    if dim == 0 || t1 == t0 {
        return Ok((y, stats));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut k: Vec<Vec<Complex64>> = vec![vec![zero; dim]; 7];
    let mut tmp = vec![zero; dim];
    let mut ynew = vec![zero; dim];
    let mut t = t0;
    let span = t1 - t0;
    let mut h = span.abs().min(1e-3 * (1.0 + span.abs())) * span.signum();
    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    while (t1 - t) * span.signum() > 0.0 {
        if stats.accepted + stats.rejected >= max_steps {
            return Err(Error::Integrator {
                steps: stats.accepted,
                rejected: stats.rejected,
                t,
            });
        }
        if (t + h - t1) * span.signum() > 0.0 {
            h = t1 - t;
        }
        let stage = |coef: &[f64], k: &[Vec<Complex64>], out: &mut [Complex64]| {
            for i in 0..dim {
                let mut acc = zero;
                for (c, ks) in coef.iter().zip(k) {
                    if *c != 0.0 {
                        acc += ks[i] * *c;
                    }
                }
                out[i] = y[i] + acc * h;
            }
        };
        stage(&[A21], &k[..1], &mut tmp);
        f(t + C2 * h, &tmp, &mut k[1]);
        stage(&[A31, A32], &k[..2], &mut tmp);
        f(t + C3 * h, &tmp, &mut k[2]);
        stage(&[A41, A42, A43], &k[..3], &mut tmp);
        f(t + C4 * h, &tmp, &mut k[3]);
        stage(&[A51, A52, A53, A54], &k[..4], &mut tmp);
        f(t + C5 * h, &tmp, &mut k[4]);
        stage(&[A61, A62, A63, A64, A65], &k[..5], &mut tmp);
        f(t + h, &tmp, &mut k[5]);
        stage(&[B1, 0.0, B3, B4, B5, B6], &k[..6], &mut ynew);
        f(t + h, &ynew, &mut k[6]);
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..dim {
            let e = (k[0][i] * E1
                + k[2][i] * E3
                + k[3][i] * E4
                + k[4][i] * E5
                + k[5][i] * E6
                + k[6][i] * E7)
                * h;
            let sc = atol + rtol * y[i].norm().max(ynew[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / dim as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integrator {
                steps: stats.accepted,
                rejected: stats.rejected,
                t,
            });
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        h *= if err <= 1.0 { fac } else { fac.min(1.0) };
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::Integrator {
                steps: stats.accepted,
                rejected: stats.rejected,
                t,
            });
        }
    }
    Ok((y, stats))
}

/// Local tolerance used by the reference integrator.
pub const ORACLE_TOL: f64 = 1e-12;
const ORACLE_MAX_STEPS: usize = 5_000_000;

/// Reference result at one time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleValue {
    pub t: f64,
    pub value: Complex64,
}

/// Solve `A phi' = B phi + F` for the Dirichlet recursion with data `f`
/// (`f(t) -> (f, f')`, with `f(0) = 0`) and report `phi_n` at each of
/// `times` (ascending).
pub fn ode_oracle_dirichlet_series<F>(
    r: f64,
    zeros: &ZeroTable,
    data: F,
    times: &[f64],
) -> Result<(Vec<OracleValue>, IntegratorStats)>
where
    F: Fn(f64) -> (Complex64, Complex64),
{
    let n = zeros.zeros.len();
    let alpha = &zeros.zeros;
    let rhs = |t: f64, phi: &[Complex64], out: &mut [Complex64]| {
        let (fv, fd) = data(t);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let prev = if j == 0 { fv } else { phi[j - 1] };
            let mut g = alpha[j] * phi[j] - alpha[j] / r * prev;
            if j == 0 {
                g += fd;
            }
            acc += g;
            out[j] = acc;
        }
    };
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut t = 0.0;
    let mut total = IntegratorStats::default();
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t {
            return Err(Error::Domain("oracle times must be ascending".into()));
        }
        let (yn, st) = dopri5(rhs, t, &y, target, ORACLE_TOL, ORACLE_TOL, ORACLE_MAX_STEPS)?;
        total.accepted += st.accepted;
        total.rejected += st.rejected;
        total.evaluations += st.evaluations;
        y = yn;
        t = target;
        let value = if n == 0 { data(t).0 } else { y[n - 1] };
        out.push(OracleValue { t, value });
    }
    Ok((out, total))
}

/// `phi_n(T)` from the reference integrator.
pub fn ode_oracle_dirichlet<F>(
    r: f64,
    zeros: &ZeroTable,
    data: F,
    t_final: f64,
) -> Result<Complex64>
where
    F: Fn(f64) -> (Complex64, Complex64),
{
    Ok(ode_oracle_dirichlet_series(r, zeros, data, &[t_final])?.0[0].value)
}

/// Conditioning of the eigenvector matrix of `M = A^{-1} B`.
#[derive(Debug, Clone, Serialize)]
pub struct EigenConditionReport {
    pub n: usize,
    pub r: f64,
    /// Frobenius-norm condition number of `M`.
    pub matrix_condition: f64,
    /// Frobenius-norm condition number of the eigenvector matrix `S`.
    pub eigenvector_condition: f64,
}

fn lower_inverse(l: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
    for col in 0..n {
        for i in col..n {
            let mut acc = if i == col {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for k in col..i {
                acc -= l[i * n + k] * inv[k * n + col];
            }
            inv[i * n + col] = acc / l[i * n + i];
        }
    }
    inv
}

fn frobenius(m: &[Complex64]) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Build `M = A^{-1} B` and its unit-norm eigenvectors and report their conditioning.
/// Shown only to document why diagonalizing the system is not used.
pub fn eigenvector_condition(r: f64, zeros: &ZeroTable) -> EigenConditionReport {
    let n = zeros.zeros.len();
    let a = &zeros.zeros;
    // A^{-1} is the all-ones lower triangle, so row i of M sums rows 0..=i of B.
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in j..=i {
                if k == j {
                    acc += a[j];
                } else if k == j + 1 {
                    acc -= a[k] / r;
                }
            }
            m[i * n + j] = acc;
        }
    }
    // eigenvector k: zero above k, v_k = 1, v_j = (alpha_j / r - alpha_k) / (alpha_j - alpha_k) v_{j-1}
    let mut s = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let mut v = Complex64::new(1.0, 0.0);
        s[k * n + k] = v;
        for j in (k + 1)..n {
            v *= (a[j] / r - a[k]) / (a[j] - a[k]);
            s[j * n + k] = v;
        }
        let norm = (k..n).map(|j| s[j * n + k].norm_sqr()).sum::<f64>().sqrt();
        for j in k..n {
            s[j * n + k] /= norm;
        }
    }
    let cond = |x: &[Complex64]| frobenius(x) * frobenius(&lower_inverse(x, n));
    EigenConditionReport {
        n,
        r,
        matrix_condition: cond(&m),
        eigenvector_condition: cond(&s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::dirichlet_zeros;

    #[test]
    fn dopri_exponential() {
        let lam = Complex64::new(-0.5, 3.0);
        let (y, st) = dopri5(
            |_, y, out| out[0] = lam * y[0],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            2.0,
            1e-12,
            1e-12,
            100_000,
        )
        .unwrap();
        assert!((y[0] - (lam * 2.0).exp()).norm() < 1e-10);
        assert!(st.accepted > 0);
    }

    #[test]
    fn single_pole_matches_closed_form() {
        // n = 1, alpha = -1, f = 1 - e^{-t}, r = 2
        let z = dirichlet_zeros(1).unwrap();
        let t = 3.0;
        let v = ode_oracle_dirichlet(
            2.0,
            &z,
            |t| {
                (
                    Complex64::new(1.0 - (-t).exp(), 0.0),
                    Complex64::new((-t).exp(), 0.0),
                )
            },
            t,
        )
        .unwrap();
        let f = 1.0 - (-t).exp();
        let exact = f - 0.5 * (1.0 - (-t).exp() - t * (-t).exp());
        assert!((v.re - exact).abs() < 1e-10 && v.im.abs() < 1e-12);
    }

    #[test]
    fn zero_data_stays_zero() {
        let z = dirichlet_zeros(5).unwrap();
        let v = ode_oracle_dirichlet(
            2.0,
            &z,
            |_| (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            4.0,
        )
        .unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn eigenvectors_are_ill_conditioned() {
        let z = dirichlet_zeros(30).unwrap();
        let rep = eigenvector_condition(2.0, &z);
        assert!(rep.eigenvector_condition > 1e5);
        assert!(rep.eigenvector_condition > 1e3 * rep.matrix_condition);
    }
}
