//! Analytic tail bounds together with quadrature values of the quantities
//! they bracket.

use serde::{Deserialize, Serialize};

use super::cgf::log_normalizer;
use crate::error::{Error, Result};
use crate::numerics::{integrate_half_line, QuadratureConfig};
use crate::sampling::PExponent;

/// Bracket `c₁(t) e^{−b(t) t^{p/2}} ≤ P(Z² ≥ t) ≤ 2 e^{−b(t) t^{p/2}}` for
/// `1 ≤ p < 2`, with `b(t) = 1/p + ((p−1)/2) t^{−p/2} log t` and
/// `c₁(t) = t^{p/2} / (t^{p/2} + 1)`.
///
/// Both sides are stated without the density normalizer
/// `1/(p^{1/p} Γ(1+1/p))`, which is 1 only at `p = 1`. For `1 < p < 2` the
/// lower bound therefore overshoots the true tail once `c₁(t)` nears 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub t: f64,
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    pub b: f64,
    pub c1: f64,
}

impl TailBound {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

pub fn tail_bounds_z2(p: PExponent, t: f64) -> Result<TailBound> {
    let pv = match p {
        PExponent::Finite(pv) if pv < 2.0 => pv,
        _ => return Err(Error::domain(format!("the Z² tail bracket needs 1 <= p < 2, got {p}"))),
    };
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let tp = t.powf(pv / 2.0);
    let b = 1.0 / pv + (pv - 1.0) / 2.0 / tp * t.ln();
    let c1 = tp / (tp + 1.0);
    let e = (-b * tp).exp();
    Ok(TailBound {
        t,
        p: pv,
        lower: c1 * e,
        upper: 2.0 * e,
        b,
        c1,
    })
}

fn tail_quadrature() -> QuadratureConfig {
    QuadratureConfig::with_tolerances(1e-15, 1e-13)
}

/// `ln P(Z² ≥ t) = ln(2∫_{√t}^∞ f_p)` by quadrature, accurate far into the tail.
pub fn ln_z2_tail_probability(p: PExponent, t: f64) -> Result<f64> {
    let pv = p.require_finite()?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t must be nonnegative, got {t}")));
    }
    let x0 = t.sqrt();
    let head = x0.powf(pv) / pv;
    // Decay length of e^{−x^p/p} beyond x0.
    let scale = if x0 > 1.0 { x0.powf(1.0 - pv) } else { pv.powf(1.0 / pv) };
    let est = integrate_half_line(|u| (head - (x0 + u).powf(pv) / pv).exp(), scale, &tail_quadrature())?;
    Ok(std::f64::consts::LN_2 + est.value.ln() - head - log_normalizer(pv))
}

/// `∫_t^∞ r^k e^{−r²/2} dr` with its bracket `[t^{k−1} e^{−t²/2}, 2 t^{k−1} e^{−t²/2}]`,
/// valid for `t ≥ max(√(2(k−1)), 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTailBracket {
    pub k: u32,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: f64,
}

impl GaussianTailBracket {
    pub fn contains_exact(&self) -> bool {
        self.lower <= self.exact && self.exact <= self.upper
    }
}

pub fn gaussian_tail_integral_bound(k: u32, t: f64) -> Result<GaussianTailBracket> {
    if k < 1 {
        return Err(Error::domain("k must be at least 1"));
    }
    let threshold = (2.0 * (k as f64 - 1.0)).sqrt().max(1.0);
    if !(t >= threshold) || !t.is_finite() {
        return Err(Error::precondition(format!(
            "the bracket needs t >= max(sqrt(2(k-1)), 1) = {threshold}, got {t}"
        )));
    }
    let front = (-t * t / 2.0).exp();
    let kf = k as f64;
    // ∫_t^∞ r^k e^{−r²/2} dr = e^{−t²/2} ∫_0^∞ (t+u)^k e^{−tu − u²/2} du.
    let est = integrate_half_line(
        |u| ((t + u).ln() * kf - t * u - u * u / 2.0).exp(),
        1.0 / t + kf.sqrt() / t,
        &tail_quadrature(),
    )?;
    let lower = t.powf(kf - 1.0) * front;
    Ok(GaussianTailBracket {
        k,
        t,
        lower,
        upper: 2.0 * lower,
        exact: est.value * front,
    })
}
