//! Samplers, large-deviation rate functions and verification tools for the
//! Euclidean norm of random projections of `ℓ_p^n`-balls.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: special functions, quadrature, scalar minimization and
//!   Legendre–Fenchel conjugates.
//! * [`sampling`]: p-generalized Gaussians, uniform points in `B_p^n`, Haar
//!   projections and the factor variables of the product representation.
//! * [`rates`]: closed-form and numerically composed rate functions.
//! * [`verify`]: tail-probability estimation, exact oracles, two-sample KS
//!   and empirical rate extraction.
//! * [`cli`]: the batch command-line surface.

pub mod cli;
pub mod error;
pub mod extended;
pub mod io;
pub mod numerics;
pub mod rates;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use extended::Extended;
