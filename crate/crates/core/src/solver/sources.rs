//! Gaussian-modulated point sources and their exact outgoing fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c exp(-(t - t0 - R)^2 / a) cos(k (t - R)) / R` with `R = |x - y|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub c: f64,
    pub y: [f64; 3],
    pub t0: f64,
    pub a: f64,
    pub k: f64,
}

/// Below this distance a source point counts as hit.
const SINGULAR_DISTANCE: f64 = 1e-12;

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl PointSource {
    pub fn new(c: f64, y: [f64; 3], t0: f64, a: f64, k: f64) -> Result<Self> {
        let s = PointSource { c, y, t0, a, k };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.c, self.t0, self.a, self.k]
            .iter()
            .chain(&self.y)
            .all(|v| v.is_finite());
        if !finite || self.a <= 0.0 {
            return Err(Error::InvalidProblem(format!(
                "point source needs finite parameters and width a > 0: {self:?}"
            )));
        }
        Ok(())
    }

    /// Distance of the source from the origin.
    pub fn radius(&self) -> f64 {
        norm(self.y)
    }

    pub fn distance(&self, x: [f64; 3]) -> f64 {
        norm([x[0] - self.y[0], x[1] - self.y[1], x[2] - self.y[2]])
    }

    /// Field given the distance `dist` from the source.
    #[inline]
    pub fn field_at_distance(&self, dist: f64, t: f64) -> f64 {
        let tau = t - dist;
        let g = (-(tau - self.t0).powi(2) / self.a).exp();
        if g == 0.0 {
            return 0.0;
        }
        self.c * g * (self.k * tau).cos() / dist
    }

    /// `d/dR` of the field at distance `dist`.
    #[inline]
    pub fn distance_derivative(&self, dist: f64, t: f64) -> f64 {
        let tau = t - dist;
        let g = (-(tau - self.t0).powi(2) / self.a).exp();
        if g == 0.0 {
            return 0.0;
        }
        let (s, c) = (self.k * tau).sin_cos();
        let d_profile = g * (2.0 * (tau - self.t0) / self.a * c + self.k * s);
        self.c * (d_profile / dist - g * c / (dist * dist))
    }
}

fn check_point(sources: &[PointSource], x: [f64; 3]) -> Result<()> {
    for s in sources {
        if s.distance(x) < SINGULAR_DISTANCE {
            return Err(Error::Singularity(format!(
                "evaluation point {x:?} is a source location"
            )));
        }
    }
    Ok(())
}

/// Total field of `sources` at `x`, time `t`.
pub fn exact_solution(sources: &[PointSource], x: [f64; 3], t: f64) -> Result<f64> {
    check_point(sources, x)?;
    Ok(sources
        .iter()
        .map(|s| s.field_at_distance(s.distance(x), t))
        .sum())
}

/// Radial derivative `x/|x| . grad u` of the field at `x`.
pub fn exact_radial_derivative(sources: &[PointSource], x: [f64; 3], t: f64) -> Result<f64> {
    check_point(sources, x)?;
    let rx = norm(x);
    if rx == 0.0 {
        return Err(Error::Singularity("radial derivative at the origin".into()));
    }
    Ok(sources
        .iter()
        .map(|s| {
            let d = s.distance(x);
            let cos_angle = (0..3).map(|i| x[i] * (x[i] - s.y[i])).sum::<f64>() / (rx * d);
            s.distance_derivative(d, t) * cos_angle
        })
        .sum())
}

/// The two interior sources of the manufactured test problem, with carrier
/// frequencies `k1`, `k2`.
pub fn manufactured_sources(k1: f64, k2: f64) -> Vec<PointSource> {
    vec![
        PointSource {
            c: 1.0,
            y: [0.3, -0.5, 0.6],
            t0: 1.2,
            a: 0.05,
            k: k1,
        },
        PointSource {
            c: 1.0,
            y: [-0.4, -0.5, 0.7],
            t0: 3.2,
            a: 0.28,
            k: k2,
        },
    ]
}

/// Two exterior sources on the positive z-axis, for scattering demos.
pub fn exterior_sources(k: f64) -> Vec<PointSource> {
    vec![
        PointSource {
            c: 1.0,
            y: [0.0, 0.0, 1.3],
            t0: 1.0,
            a: 0.05,
            k,
        },
        PointSource {
            c: 1.0,
            y: [0.0, 0.0, 1.7],
            t0: 1.0,
            a: 0.05,
            k,
        },
    ]
}
