use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Boundary condition on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// `u = f`; poles are the zeros of `k_n`.
    Dirichlet,
    /// `(d/dr + 1) u = g`; poles are the zeros of `D_n = z k_n' + k_n`.
    Robin,
}

impl BoundaryKind {
    /// Number of poles for order `n`.
    pub fn count(self, n: usize) -> usize {
        match self {
            BoundaryKind::Dirichlet => n,
            BoundaryKind::Robin => n + 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::Dirichlet => "dirichlet",
            BoundaryKind::Robin => "robin",
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(BoundaryKind::Dirichlet),
            "robin" | "r" => Ok(BoundaryKind::Robin),
            other => Err(Error::Parse(format!(
                "unknown boundary condition '{other}'"
            ))),
        }
    }
}
