//! Verification harness: Monte Carlo interval probabilities, exact oracles,
//! two-sample tests and empirical rates.

mod bracket;
mod estimate;
mod exact;
mod ks;
mod ldp;
mod representation;

pub use bracket::{check_gaussian_bracket, check_tail_bracket, BracketKind, BracketReport, BracketRow};
pub use estimate::{
    clopper_pearson, empirical_rate, estimate_interval_probability, rate_from_ln_probability, EmpiricalRate,
    Interval, TailEstimate, DEFAULT_LEVEL,
};
pub use exact::{
    exact_v1_interval_probability, exact_v_interval_probability, ln_exact_v1_interval_probability,
    ln_exact_v_interval_probability, ln_v1_upper_tail, oracle_quadrature,
};
pub use ks::{kolmogorov_survival, ks_two_sample, KsResult};
pub use ldp::{default_rule, run_ldp_convergence, LdpConfig, LdpReport, LdpRow, Oracle};
pub use representation::{check_representation, RepresentationReport, DEFAULT_ALPHA};
