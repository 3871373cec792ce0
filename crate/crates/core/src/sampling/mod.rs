//! Random generation of p-generalized Gaussians, points in `ℓ_p^n`-balls,
//! Haar projections and the factor variables of the product representation.

mod batch;
mod pexp;
mod regime;
mod rng;
mod samplers;

pub use batch::{
    count_hits, generate_values, Quantity, QuantityConfig, QuantitySampler, SampleBatch, SampleMetadata, CHUNK_SIZE,
};
pub use pexp::PExponent;
pub use regime::{check_dimensions, Regime, ScheduleRule};
pub use rng::{RngStream, StreamRng};
pub use samplers::{
    sample_cone_measure, sample_empirical_means, sample_factor_u, sample_factor_v, sample_factor_v1,
    sample_factor_w, sample_haar_projection_norm, sample_p_gaussian, sample_scaled_projection_norm,
    sample_uniform_ball, HaarProjector, MeanKind, Method, PGaussian, WSampler,
};
