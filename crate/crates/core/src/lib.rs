//! Exterior scalar wave solver on the sphere with exact nonreflecting
//! boundary kernels, evaluated by stable one-pole recursions.

pub mod boundary;
pub mod error;
pub mod kernel;
pub mod march;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod transform;
pub mod zeros;

pub use boundary::BoundaryKind;
pub use error::{Error, Result};
pub use kernel::ResidueSet;
pub use march::{MarchPlan, ModeSignal, ModeState};
pub use num_complex::Complex64;
pub use solver::{DataSource, PointSource, Probe, ScatteringProblem, SolveOutput};
pub use transform::{ModeCoefficients, SphericalGrid, SphericalTransform};
pub use zeros::{ZeroCache, ZeroTable};

/// Library version, written into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
