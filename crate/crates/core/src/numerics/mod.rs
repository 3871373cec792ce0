//! Deterministic numerical kernels shared by the samplers, rate functions and
//! verification harness.

pub mod conjugate;
pub mod minimize;
pub mod quadrature;
pub mod special;

pub use conjugate::{
    conjugate_1d, conjugate_2d, double_conjugate_1d, double_conjugate_2d, legendre_fenchel_1d, legendre_fenchel_2d, Cgf1D, Cgf2D, ConjugateConfig,
    ConjugatePoint, FnCgf1D, FnCgf2D,
};
pub use minimize::{minimize_scalar, minimize_scalar_with, GridSpacing, MinimizeConfig, Minimum};
pub use quadrature::{
    integrate, integrate_breakpoints, integrate_half_line, integrate_half_line_vec, integrate_real_line,
    integrate_vec_breakpoints, Estimate, QuadratureConfig, ScalarEstimate,
};
pub use special::{
    gamma, inverse_regularized_incomplete_beta, ln_beta, ln_regularized_incomplete_beta,
    ln_regularized_incomplete_beta_complement, log_gamma, regularized_incomplete_beta,
};
