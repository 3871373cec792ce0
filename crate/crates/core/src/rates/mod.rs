//! Rate functions, speeds, the moment constant `m_p` and analytic tail bounds.

mod bounds;
mod cgf;
mod curve;
mod functions;

pub use bounds::{
    gaussian_tail_integral_bound, ln_z2_tail_probability, tail_bounds_z2, GaussianTailBracket, TailBound,
};
pub use cgf::{cgf_infty, log_normalizer, power_cgf_quadrature, ChiSquareCgf, InftyCgf, PairCgf, PowerCgf};
pub use curve::{linear_grid, RateCurve, RateCurveMeta, RateName, RateQuery, Speed};
pub use functions::{
    moment_audit, moment_m, pair_conjugate, printed_infimand, rate_g_mean, rate_projection, rate_projection_with,
    rate_u, rate_v, rate_v1, rate_w, rate_w_with, rate_z2_sum, rate_zp_mean, typical_second_moment,
    InfimandForm, MomentAudit, RateConfig,
};
