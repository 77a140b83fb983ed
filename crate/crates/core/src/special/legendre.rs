//! Gauss–Legendre rules, Legendre polynomials and orthonormal spherical
//! harmonics.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest collocation order accepted by [`legendre_nodes`].
pub const MAX_COLLOCATION_ORDER: usize = 32;

/// `P_i(x)` by the three-term recurrence.
pub fn legendre_eval(i: usize, x: f64) -> f64 {
    legendre_with_derivative(i, x).0
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() > 0.0 {
        nf * (x * p1 - p0) / (x * x - 1.0)
    } else {
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    };
    (p1, dp)
}

/// Fill `out[i] = P_i(x)` for `i < out.len()`.
pub fn legendre_values(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]` for any `n >= 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Collocation nodes and weights for orders `1..=32`.
pub fn legendre_nodes(p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if p == 0 || p > MAX_COLLOCATION_ORDER {
        return Err(Error::Domain(format!(
            "collocation order {p} outside 1..={MAX_COLLOCATION_ORDER}"
        )));
    }
    Ok(gauss_legendre(p))
}

/// Row-major `p x p` matrix `u` with `c_i = sum_l u[i][l] f(x_l)` giving the
/// Legendre coefficients of the degree `p - 1` interpolant.
pub fn value_to_coeff_matrix(p: usize) -> Result<Vec<f64>> {
    let (x, w) = legendre_nodes(p)?;
    let mut u = vec![0.0; p * p];
    let mut vals = vec![0.0; p];
    for l in 0..p {
        legendre_values(x[l], &mut vals);
        for i in 0..p {
            u[i * p + l] = 0.5 * (2.0 * i as f64 + 1.0) * w[l] * vals[i];
        }
    }
    Ok(u)
}

/// Index of `(n, m)`, `0 <= m <= n`, in a packed triangular table.
#[inline]
pub fn tri_index(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

/// Orthonormal associated Legendre values `bar P_n^m(cos theta)` for
/// `0 <= m <= n <= nmax`, including the Condon–Shortley phase, packed by
/// [`tri_index`]. `Y_n^m = bar P_n^{|m|} e^{i m phi}`.
pub fn normalized_legendre_table(nmax: usize, theta: f64, out: &mut Vec<f64>) {
    let len = tri_index(nmax, nmax) + 1;
    out.clear();
    out.resize(len, 0.0);
    let (x, s) = (theta.cos(), theta.sin().abs());
    let mut pmm = 0.5 / PI.sqrt();
    for m in 0..=nmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        out[tri_index(m, m)] = pmm;
        if m == nmax {
            break;
        }
        let mut p_prev = pmm;
        let mut p = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        out[tri_index(m + 1, m)] = p;
        let mf2 = (m * m) as f64;
        for n in (m + 2)..=nmax {
            let nf = n as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf2)).sqrt();
            let n1 = nf - 1.0;
            let b = ((n1 * n1 - mf2) / (4.0 * n1 * n1 - 1.0)).sqrt();
            let next = a * (x * p - b * p_prev);
            p_prev = p;
            p = next;
            out[tri_index(n, m)] = p;
        }
    }
}

/// Orthonormal spherical harmonic `Y_n^m(theta, phi)` built from `P_n^{|m|}`.
pub fn spherical_harmonic(n: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > n {
        return Err(Error::Domain(format!("|m| = {} exceeds n = {n}", m.abs())));
    }
    let mut table = Vec::new();
    normalized_legendre_table(n, theta, &mut table);
    let p = table[tri_index(n, m.unsigned_abs() as usize)];
    Ok(Complex64::from_polar(1.0, m as f64 * phi) * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules() {
        let (x, w) = legendre_nodes(1).unwrap();
        assert_eq!(x, vec![0.0]);
        assert!((w[0] - 2.0).abs() < 1e-15);
        let (x, w) = legendre_nodes(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
        assert!(legendre_nodes(0).is_err());
        assert!(legendre_nodes(33).is_err());
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [3usize, 17, 64, 200, 520] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            // exact on x^(2n-2)
            let k = 2 * n - 2;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((q - 2.0 / (k as f64 + 1.0)).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn interpolation_identity() {
        let p = 10;
        let (x, _) = legendre_nodes(p).unwrap();
        let u = value_to_coeff_matrix(p).unwrap();
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) - t.powi(9) + 0.25 * t.powi(6);
        let samples: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let coeffs: Vec<f64> = (0..p)
            .map(|i| (0..p).map(|l| u[i * p + l] * samples[l]).sum())
            .collect();
        for t in [-1.0, -0.3, 0.0, 0.77, 1.0] {
            let s: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * legendre_eval(i, t))
                .sum();
            assert!((s - f(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_harmonics() {
        let y00 = spherical_harmonic(0, 0, 0.3, 1.1).unwrap();
        assert!((y00.re - 0.5 / PI.sqrt()).abs() < 1e-15 && y00.im == 0.0);
        let th = 0.83;
        let y10 = spherical_harmonic(1, 0, th, 2.0).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * th.cos()).abs() < 1e-15);
        let y11 = spherical_harmonic(1, 1, th, 0.4).unwrap();
        let expect = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * th.sin(), 0.4);
        assert!((y11 - expect).norm() < 1e-15);
        assert!(spherical_harmonic(2, 3, 0.1, 0.1).is_err());
    }

    #[test]
    fn conjugation_flips_m() {
        for (n, m) in [(3usize, 2i64), (7, 5), (12, 1)] {
            let a = spherical_harmonic(n, m, 1.2, 0.7).unwrap();
            let b = spherical_harmonic(n, -m, 1.2, 0.7).unwrap();
            assert!((a.conj() - b).norm() < 1e-15);
        }
    }

    #[test]
    fn orthonormal_on_tensor_grid() {
        let nmax = 20;
        let (x, w) = gauss_legendre(nmax + 1);
        let nphi = 2 * nmax + 1;
        let mut tables = Vec::new();
        for &xi in &x {
            let mut t = Vec::new();
            normalized_legendre_table(nmax, xi.acos(), &mut t);
            tables.push(t);
        }
        let modes: Vec<(usize, i64)> = (0..=nmax)
            .flat_map(|n| (-(n as i64)..=n as i64).map(move |m| (n, m)))
            .collect();
        let dphi = 2.0 * PI / nphi as f64;
        let phi_sum = |dm: i64| -> Complex64 {
            (0..nphi)
                .map(|k| Complex64::from_polar(dphi, dm as f64 * dphi * k as f64))
                .sum()
        };
        let mut worst: f64 = 0.0;
        for &(n1, m1) in &modes {
            for &(n2, m2) in &modes {
                let mut s = 0.0;
                for (i, t) in tables.iter().enumerate() {
                    s += w[i]
                        * t[tri_index(n1, m1.unsigned_abs() as usize)]
                        * t[tri_index(n2, m2.unsigned_abs() as usize)];
                }
                let v = phi_sum(m2 - m1) * s;
                let expect = if n1 == n2 && m1 == m2 { 1.0 } else { 0.0 };
                worst = worst.max((v - expect).norm());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }
}
