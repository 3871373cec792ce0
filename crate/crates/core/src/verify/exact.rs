//! Exact interval probabilities of the Gaussian factor `V` and of `U^{1/n} V`.
//!
//! `V²` follows Beta(k/2, (n−k)/2), so `V` is handled by the incomplete beta
//! function. `U^{1/n} V` (which is the scaled projection norm at `p = 2`)
//! needs one more quadrature over the radial factor; both are available in
//! log space so that tails far below `f64::MIN_POSITIVE` stay usable.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::numerics::{
    integrate, integrate_breakpoints, ln_regularized_incomplete_beta, ln_regularized_incomplete_beta_complement,
    QuadratureConfig,
};
use crate::sampling::check_dimensions;

fn beta_params(n: usize, k: usize) -> Result<(f64, f64)> {
    check_dimensions(n, k)?;
    Ok((k as f64 / 2.0, (n - k) as f64 / 2.0))
}

fn check_bounds(a1: f64, a2: f64, cap: f64) -> Result<()> {
    if !(0.0 <= a1 && a1 <= a2 && a2 <= cap) {
        return Err(Error::domain(format!("need 0 <= a1 <= a2 <= {cap}, got [{a1}, {a2}]")));
    }
    Ok(())
}

/// `ln(e^a − e^b)` for `a ≥ b`.
fn ln_diff(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// `ln P(V ≤ a)`.
fn ln_cdf_v(a: f64, b: f64, v: f64) -> Result<f64> {
    if v <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if v >= 1.0 {
        return Ok(0.0);
    }
    ln_regularized_incomplete_beta(v * v, a, b)
}

/// `ln P(V ≥ v)`.
fn ln_sf_v(a: f64, b: f64, v: f64) -> Result<f64> {
    if v <= 0.0 {
        return Ok(0.0);
    }
    if v >= 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    ln_regularized_incomplete_beta_complement(v * v, a, b)
}

/// `P(a₁ ≤ V ≤ a₂) = I_{a₂²}(k/2, (n−k)/2) − I_{a₁²}(k/2, (n−k)/2)`.
pub fn exact_v_interval_probability(n: usize, k: usize, a1: f64, a2: f64) -> Result<f64> {
    ln_exact_v_interval_probability(n, k, a1, a2).map(f64::exp)
}

/// `ln P(a₁ ≤ V ≤ a₂)`, differencing whichever tail is smaller.
pub fn ln_exact_v_interval_probability(n: usize, k: usize, a1: f64, a2: f64) -> Result<f64> {
    let (a, b) = beta_params(n, k)?;
    check_bounds(a1, a2, 1.0)?;
    if a2 * a2 <= a / (a + b) {
        Ok(ln_diff(ln_cdf_v(a, b, a2)?, ln_cdf_v(a, b, a1)?))
    } else {
        Ok(ln_diff(ln_sf_v(a, b, a1)?, ln_sf_v(a, b, a2)?))
    }
}

const GRID: usize = 256;

/// `ln P(U^{1/n} V ≥ x)`.
///
/// With `U^{1/n} = e^{−s}`, `s` has density `n e^{−ns}` and
/// `P(U^{1/n} V ≥ x) = ∫₀^{−ln x} n e^{−ns} P(V ≥ x e^s) ds`. The integrand is
/// evaluated relative to its largest grid value.
pub fn ln_v1_upper_tail(n: usize, k: usize, x: f64, quad: &QuadratureConfig) -> Result<f64> {
    let (a, b) = beta_params(n, k)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let nf = n as f64;
    let top = -x.ln();
    let log_integrand = |s: f64| -> Result<f64> { Ok(nf.ln() - nf * s + ln_sf_v(a, b, x * s.exp())?) };
    let points: Vec<f64> = (0..=GRID).map(|j| top * j as f64 / GRID as f64).collect();
    let mut peak = f64::NEG_INFINITY;
    for &s in &points {
        peak = peak.max(log_integrand(s)?);
    }
    if peak == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let failure = RefCell::new(None);
    let est = integrate_breakpoints(
        |s| match log_integrand(s) {
            Ok(g) => (g - peak).exp(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        &points,
        quad,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(peak + est.value.ln())
}

/// `P(a₁ ≤ U^{1/n} V ≤ a₂)` as `∫₀¹ n u^{n−1} [F_V(min(a₂/u, 1)) − F_V(min(a₁/u, 1))] du`.
pub fn exact_v1_interval_probability(n: usize, k: usize, a1: f64, a2: f64, quad: &QuadratureConfig) -> Result<f64> {
    let (a, b) = beta_params(n, k)?;
    check_bounds(a1, a2, f64::INFINITY)?;
    let nf = n as f64;
    let cdf = |v: f64| ln_cdf_v(a, b, v).map(f64::exp);
    let failure = RefCell::new(None);
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let d = cdf((a2 / u).min(1.0)).and_then(|hi| Ok(hi - cdf((a1 / u).min(1.0))?));
        match d {
            Ok(d) => nf * u.powf(nf - 1.0) * d,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    // Kinks where a/u crosses 1.
    let mut points = vec![0.0, 1.0];
    points.extend([a1, a2].into_iter().filter(|&c| c > 0.0 && c < 1.0));
    points.sort_by(f64::total_cmp);
    points.dedup();
    let est = if points.len() == 2 {
        integrate(integrand, 0.0, 1.0, quad)?
    } else {
        integrate_breakpoints(integrand, &points, quad)?
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est.value.clamp(0.0, 1.0))
}

/// `ln P(a₁ ≤ U^{1/n} V ≤ a₂)`, accurate deep into the upper tail.
pub fn ln_exact_v1_interval_probability(
    n: usize,
    k: usize,
    a1: f64,
    a2: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check_bounds(a1, a2, f64::INFINITY)?;
    Ok(ln_diff(ln_v1_upper_tail(n, k, a1, quad)?, ln_v1_upper_tail(n, k, a2, quad)?))
}

/// Quadrature settings for the oracles: absolute error below 1e-12.
pub fn oracle_quadrature() -> QuadratureConfig {
    QuadratureConfig::with_tolerances(1e-13, 1e-12)
}
