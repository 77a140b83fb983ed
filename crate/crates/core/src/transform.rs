//! Spherical harmonic analysis and synthesis on a Gauss–Legendre ×
//! uniform grid.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::special::{gauss_legendre, normalized_legendre_table, tri_index};

/// Quadrature grid on the unit sphere. Samples are stored theta-major:
/// `index = i * n_phi + k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericalGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Polar angles, ascending in `cos theta` (so descending in theta).
    pub theta: Vec<f64>,
    pub cos_theta: Vec<f64>,
    /// Gauss–Legendre weights in `cos theta`; they sum to 2.
    pub weights: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SphericalGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::GridTooSmall(format!(
                "empty grid {n_theta} x {n_phi}"
            )));
        }
        let (x, w) = gauss_legendre(n_theta);
        Ok(SphericalGrid {
            n_theta,
            n_phi,
            theta: x.iter().map(|c| c.acos()).collect(),
            cos_theta: x,
            weights: w,
            phi: (0..n_phi)
                .map(|k| 2.0 * PI * k as f64 / n_phi as f64)
                .collect(),
        })
    }

    /// Default grid for band limit `order`: `4N x 4N` (at least 2 x 2).
    pub fn for_order(order: usize) -> Result<Self> {
        let m = (4 * order).max(2);
        Self::new(m, m)
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest band limit integrated exactly.
    pub fn max_order(&self) -> usize {
        (self.n_theta - 1).min((self.n_phi - 1) / 2)
    }

    /// Quadrature weight of node `(i, k)`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i] * 2.0 * PI / self.n_phi as f64
    }

    /// Cartesian point of node `(i, k)` on the sphere of radius `r`.
    pub fn point(&self, i: usize, k: usize, r: f64) -> [f64; 3] {
        let s = self.theta[i].sin();
        [
            r * s * self.phi[k].cos(),
            r * s * self.phi[k].sin(),
            r * self.cos_theta[i],
        ]
    }
}

/// Coefficients `c_{n,m}`, `0 <= n <= N`, `|m| <= n`, stored at `n^2 + n + m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCoefficients {
    pub order: usize,
    pub values: Vec<Complex64>,
}

impl ModeCoefficients {
    pub fn zeros(order: usize) -> Self {
        ModeCoefficients {
            order,
            values: vec![Complex64::new(0.0, 0.0); (order + 1) * (order + 1)],
        }
    }

    #[inline]
    fn idx(n: usize, m: i64) -> usize {
        ((n * n + n) as i64 + m) as usize
    }

    pub fn get(&self, n: usize, m: i64) -> Complex64 {
        self.values[Self::idx(n, m)]
    }

    pub fn set(&mut self, n: usize, m: i64, v: Complex64) {
        self.values[Self::idx(n, m)] = v;
    }

    /// Largest `|c_{n,-m} - conj(c_{n,m})|`, zero for real fields.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..=self.order {
            for m in 1..=n as i64 {
                worst = worst.max((self.get(n, -m) - self.get(n, m).conj()).norm());
            }
        }
        worst
    }
}

/// Precomputed analysis/synthesis for one grid and band limit.
pub struct SphericalTransform {
    grid: SphericalGrid,
    order: usize,
    /// `bar P_n^m(cos theta_i)` packed per theta by `tri_index`.
    legendre: Vec<f64>,
    stride: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SphericalTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphericalTransform")
            .field("n_theta", &self.grid.n_theta)
            .field("n_phi", &self.grid.n_phi)
            .field("order", &self.order)
            .finish()
    }
}

impl SphericalTransform {
    pub fn new(grid: SphericalGrid, order: usize) -> Result<Self> {
        if order > grid.max_order() {
            return Err(Error::GridTooSmall(format!(
                "band limit {order} needs n_theta >= {} and n_phi >= {}, grid is {} x {}",
                order + 1,
                2 * order + 1,
                grid.n_theta,
                grid.n_phi
            )));
        }
        Ok(Self::build(grid, order))
    }

    /// No exactness check: synthesis is valid on any grid.
    fn build(grid: SphericalGrid, order: usize) -> Self {
        let stride = tri_index(order, order) + 1;
        let mut legendre = Vec::with_capacity(stride * grid.n_theta);
        let mut row = Vec::new();
        for &th in &grid.theta {
            normalized_legendre_table(order, th, &mut row);
            legendre.extend_from_slice(&row);
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n_phi);
        let inverse = planner.plan_fft_inverse(grid.n_phi);
        SphericalTransform {
            grid,
            order,
            legendre,
            stride,
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(Error::Mismatch(format!(
                "{len} samples for a grid of {} nodes",
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// `c_{nm} = sum_{i,k} w_i (2 pi / N_phi) conj(Y_n^m(theta_i, phi_k)) f_{ik}`.
    pub fn analyze(&self, samples: &[Complex64]) -> Result<ModeCoefficients> {
        self.check_len(samples.len())?;
        let (nt, np, nmax) = (self.grid.n_theta, self.grid.n_phi, self.order);
        let mut out = ModeCoefficients::zeros(nmax);
        let mut row = vec![Complex64::new(0.0, 0.0); np];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for i in 0..nt {
            row.copy_from_slice(&samples[i * np..(i + 1) * np]);
            self.forward.process_with_scratch(&mut row, &mut scratch);
            let w = self.grid.weight(i);
            let leg = &self.legendre[i * self.stride..(i + 1) * self.stride];
            for m in -(nmax as i64)..=nmax as i64 {
                let bin = row[m.rem_euclid(np as i64) as usize] * w;
                let am = m.unsigned_abs() as usize;
                for n in am..=nmax {
                    out.values[ModeCoefficients::idx(n, m)] += bin * leg[tri_index(n, am)];
                }
            }
        }
        Ok(out)
    }

    /// Analysis of a real field; only `m >= 0` is summed, `m < 0` follows
    /// by conjugation.
    pub fn analyze_real(&self, samples: &[f64]) -> Result<ModeCoefficients> {
        self.check_len(samples.len())?;
        let mut out = ModeCoefficients::zeros(self.order);
        self.analyze_real_into(samples, &mut out.values);
        Ok(out)
    }

    /// Like [`analyze_real`](Self::analyze_real), writing into a
    /// `(N+1)^2` buffer.
    pub fn analyze_real_into(&self, samples: &[f64], out: &mut [Complex64]) {
        let (nt, np, nmax) = (self.grid.n_theta, self.grid.n_phi, self.order);
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let mut row = vec![Complex64::new(0.0, 0.0); np];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for i in 0..nt {
            for (d, s) in row.iter_mut().zip(&samples[i * np..(i + 1) * np]) {
                *d = Complex64::new(*s, 0.0);
            }
            self.forward.process_with_scratch(&mut row, &mut scratch);
            let w = self.grid.weight(i);
            let leg = &self.legendre[i * self.stride..(i + 1) * self.stride];
            for m in 0..=nmax {
                let bin = row[m % np] * w;
                for n in m..=nmax {
                    out[ModeCoefficients::idx(n, m as i64)] += bin * leg[tri_index(n, m)];
                }
            }
        }
        for n in 1..=nmax {
            for m in 1..=n as i64 {
                out[ModeCoefficients::idx(n, -m)] = out[ModeCoefficients::idx(n, m)].conj();
            }
        }
    }

    /// Field values at the grid nodes.
    pub fn synthesize(&self, coeffs: &ModeCoefficients) -> Result<Vec<Complex64>> {
        if coeffs.order > self.order {
            return Err(Error::GridTooSmall(format!(
                "coefficients of order {} on a transform of order {}",
                coeffs.order, self.order
            )));
        }
        let (nt, np) = (self.grid.n_theta, self.grid.n_phi);
        let nmax = coeffs.order;
        let mut out = vec![Complex64::new(0.0, 0.0); nt * np];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        for i in 0..nt {
            let row = &mut out[i * np..(i + 1) * np];
            let leg = &self.legendre[i * self.stride..(i + 1) * self.stride];
            for m in -(nmax as i64)..=nmax as i64 {
                let am = m.unsigned_abs() as usize;
                let mut g = Complex64::new(0.0, 0.0);
                for n in am..=nmax {
                    g += coeffs.get(n, m) * leg[tri_index(n, am)];
                }
                row[m.rem_euclid(np as i64) as usize] += g;
            }
            self.inverse.process_with_scratch(row, &mut scratch);
        }
        Ok(out)
    }
}

/// One-shot analysis with a freshly planned transform.
pub fn analyze(
    grid: &SphericalGrid,
    order: usize,
    samples: &[Complex64],
) -> Result<ModeCoefficients> {
    SphericalTransform::new(grid.clone(), order)?.analyze(samples)
}

/// One-shot synthesis on a grid.
pub fn synthesize_grid(grid: &SphericalGrid, coeffs: &ModeCoefficients) -> Result<Vec<Complex64>> {
    SphericalTransform::build(grid.clone(), coeffs.order).synthesize(coeffs)
}

/// `sum_{n,m} c_{nm} Y_n^m` at arbitrary `(theta, phi)` points.
pub fn synthesize_points(coeffs: &ModeCoefficients, points: &[(f64, f64)]) -> Vec<Complex64> {
    let nmax = coeffs.order;
    let mut leg = Vec::new();
    points
        .iter()
        .map(|&(theta, phi)| {
            normalized_legendre_table(nmax, theta, &mut leg);
            let mut acc = Complex64::new(0.0, 0.0);
            for m in -(nmax as i64)..=nmax as i64 {
                let am = m.unsigned_abs() as usize;
                let mut g = Complex64::new(0.0, 0.0);
                for n in am..=nmax {
                    g += coeffs.get(n, m) * leg[tri_index(n, am)];
                }
                acc += g * Complex64::from_polar(1.0, m as f64 * phi);
            }
            acc
        })
        .collect()
}
