//! Special functions: modified spherical Hankel functions, the asymptotic
//! zero geometry, Legendre rules and spherical harmonics.

mod asymptotic;
mod dd;
mod hankel;
mod legendre;

pub use asymptotic::{
    airy_prime_zero_estimate, airy_zero_estimate, dirichlet_zeta, forward_zeta, invert_zeta,
    robin_xi, zeta_phase, ZeroCurvePoint, CURVE_T0,
};
pub(crate) use dd::DdComplex;
pub(crate) use hankel::ln_hankel_poly;
pub use hankel::{
    eval_dn, eval_dn_derivative, eval_dn_log_ratio, eval_kn, eval_kn_derivative, eval_kn_log_ratio,
};
pub use legendre::{
    gauss_legendre, legendre_eval, legendre_nodes, legendre_values, normalized_legendre_table,
    spherical_harmonic, tri_index, value_to_coeff_matrix, MAX_COLLOCATION_ORDER,
};
