//! Rate functions: closed forms, numeric conjugates and the contraction
//! compositions that assemble them.

use serde::{Deserialize, Serialize};

use super::cgf::{log_normalizer, second_moment_quadrature, InftyCgf, PairCgf, PowerCgf};
use crate::error::{Error, Result};
use crate::extended::{Extended, Finite, PosInf};
use crate::numerics::special::ln_gamma_unchecked;
use crate::numerics::{
    conjugate_1d, conjugate_2d, minimize_scalar_with, ConjugateConfig, GridSpacing, MinimizeConfig,
};
use crate::sampling::PExponent;

/// Search ranges and resolutions of the nested infima.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateConfig {
    /// Log-spaced range of `x₂` on the constraint curve of the W rate.
    pub x2_range: (f64, f64),
    pub inner_grid_points: usize,
    /// The outer infimum runs over `[max(y, 1e-8), x_max_factor · max(1, √m_p)]`.
    pub x_max_factor: f64,
    pub outer_grid_points: usize,
    pub tol: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        RateConfig {
            x2_range: (1e-6, 1e6),
            inner_grid_points: 121,
            x_max_factor: 10.0,
            outer_grid_points: 201,
            tol: 1e-10,
        }
    }
}

/// `x log(x / y)` with `0 log 0 = 0`; `+inf` when `y = 0 < x`.
fn xlog_ratio(x: f64, y: f64) -> Extended {
    if x == 0.0 {
        Finite(0.0)
    } else if y <= 0.0 {
        PosInf
    } else {
        Finite(x * (x / y).ln())
    }
}

/// Rate of the radial factor `U^{1/n}`: `−log y` on `(0, 1]`.
pub fn rate_u(y: f64) -> Extended {
    if y > 0.0 && y <= 1.0 {
        Finite(-y.ln())
    } else {
        PosInf
    }
}

/// Rate of the Gaussian ratio `V` at proportion `λ`:
/// `(λ/2) log(λ/y²) + ((1−λ)/2) log((1−λ)/(1−y²))`, with `0 log 0 = 0`.
pub fn rate_v(lambda: f64, y: f64) -> Result<Extended> {
    check_lambda(lambda)?;
    if !(0.0..=1.0).contains(&y) {
        return Ok(PosInf);
    }
    let y2 = y * y;
    let a = xlog_ratio(lambda, y2);
    let b = xlog_ratio(1.0 - lambda, 1.0 - y2);
    Ok((a + b).map(|v| 0.5 * v.max(0.0)))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::domain(format!("lambda must lie in [0,1], got {lambda}")))
    }
}

/// Rate of `V₁ = U^{1/n} V` by contraction: the infimum of
/// `rate_u(x₁) + rate_v(λ, x₂)` over `x₁ x₂ = y`.
pub fn rate_v1(lambda: f64, y: f64) -> Result<Extended> {
    check_lambda(lambda)?;
    if !(0.0..=1.0).contains(&y) {
        return Ok(PosInf);
    }
    if y == 0.0 {
        // x₁ > 0 forces x₂ = 0; rate_u is smallest at x₁ = 1.
        return rate_v(lambda, 0.0);
    }
    if y == 1.0 {
        return rate_v(lambda, 1.0);
    }
    let m = minimize_scalar_with(
        |x1| rate_u(x1) + rate_v(lambda, y / x1).unwrap_or(PosInf),
        y,
        1.0,
        &MinimizeConfig::default(),
    );
    Ok(m.value)
}

/// `(y − 1)/2 − ½ log y` for `y > 0`: the rate of the mean of squared Gaussians.
pub fn rate_g_mean(y: f64) -> Extended {
    if y > 0.0 {
        Finite(((y - 1.0) / 2.0 - 0.5 * y.ln()).max(0.0))
    } else {
        PosInf
    }
}

/// Second moment `m_p = E Z²` of the p-generalized Gaussian, by quadrature.
pub fn moment_m(p: PExponent) -> Result<f64> {
    second_moment_quadrature(p.require_finite()?)
}

/// The quadrature moment next to the two closed-form candidates
/// `p^{e} Γ(1+3/p) / (3 Γ(1+1/p))` with `e = p/2` and `e = 2/p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentAudit {
    pub p: f64,
    pub m: f64,
    pub candidate_pp2: f64,
    pub candidate_p2p: f64,
}

impl MomentAudit {
    pub fn agrees_pp2(&self, tol: f64) -> bool {
        (self.m - self.candidate_pp2).abs() <= tol * self.m
    }

    pub fn agrees_p2p(&self, tol: f64) -> bool {
        (self.m - self.candidate_p2p).abs() <= tol * self.m
    }
}

pub fn moment_audit(p: PExponent) -> Result<MomentAudit> {
    let pv = p.require_finite()?;
    let ratio = (ln_gamma_unchecked(1.0 + 3.0 / pv) - ln_gamma_unchecked(1.0 + 1.0 / pv)).exp() / 3.0;
    Ok(MomentAudit {
        p: pv,
        m: moment_m(p)?,
        candidate_pp2: pv.powf(pv / 2.0) * ratio,
        candidate_p2p: pv.powf(2.0 / pv) * ratio,
    })
}

/// `d^{p/2}/p` for `d = excess ≥ 0`, treating a negative excess within
/// rounding of zero as zero.
fn stretched_rate(excess: f64, scale: f64, p: f64) -> Extended {
    if excess.abs() <= 1e-12 * scale {
        return Finite(0.0);
    }
    if excess < 0.0 {
        return PosInf;
    }
    Finite(excess.powf(p / 2.0) / p)
}

fn require_small_p(p: PExponent) -> Result<f64> {
    match p {
        PExponent::Finite(pv) if pv < 2.0 => Ok(pv),
        _ => Err(Error::domain(format!("this rate needs 1 <= p < 2, got {p}"))),
    }
}

/// `(1/p)(y − m_p)^{p/2}` for `y ≥ m_p`: the rate of `(1/n) Σ Z_i²` at speed `n^{p/2}`.
pub fn rate_z2_sum(p: PExponent, y: f64) -> Result<Extended> {
    let pv = require_small_p(p)?;
    let m = moment_m(p)?;
    Ok(stretched_rate(y - m, m, pv))
}

/// Rate of `(1/n) Σ |Z_i|^p`: the numeric conjugate of `−(1/p) log(1 − pt)`.
pub fn rate_zp_mean(p: PExponent, y: f64) -> Result<Extended> {
    let cgf = PowerCgf::new(p)?;
    if !(y > 0.0) {
        return Ok(PosInf);
    }
    Ok(conjugate_1d(&cgf, y, &ConjugateConfig::default())?.value)
}

/// `E|N|^p` for a standard normal `N`.
fn gaussian_abs_moment(p: f64) -> f64 {
    (0.5 * p * std::f64::consts::LN_2 + ln_gamma_unchecked((p + 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln())
    .exp()
}

/// Conjugate of the pair CGF, `+inf` once it provably exceeds `cap`.
///
/// For `p > 2` the domain is not steep: on the edge `t₂ = 1/p` (with `t₁ < 0`)
/// the CGF stays finite and the tilted law is Gaussian with variance
/// `1/(2|t₁|)`. Points with `x₂ ≥ E|N|^p x₁^{p/2}` have their supremum on that
/// edge, where it is explicit:
/// `x₂/p − ½ − ½ log(2π x₁) + log(2 p^{1/p} Γ(1+1/p))`.
/// Points with `x₂ ≤ x₁^{p/2}` lie outside the closed convex hull of the
/// support (Jensen) and get `+inf`.
struct PairConjugate {
    cgf: PairCgf,
    p: f64,
    edge_constant: f64,
    gaussian_moment: f64,
}

impl PairConjugate {
    fn new(p: f64) -> Result<Self> {
        Ok(PairConjugate {
            cgf: PairCgf::new(PExponent::Finite(p))?,
            p,
            edge_constant: log_normalizer(p) - 0.5 - 0.5 * (2.0 * std::f64::consts::PI).ln(),
            gaussian_moment: gaussian_abs_moment(p),
        })
    }

    /// The conjugate is scale covariant: with `r = x₂ / x₁^{p/2}`,
    /// `Λ*(x₁, x₂) = Λ*(1, r) + (x₂ − r)/p − ½ log x₁`.
    /// Solving at `(1, r)` keeps the maximizer at unit scale.
    fn eval(&self, x: [f64; 2], cap: f64, warm: &mut [f64; 2]) -> Result<Extended> {
        let [x1, x2] = x;
        if !(x1 > 0.0 && x2 > 0.0) {
            return Ok(PosInf);
        }
        let r = x2 / x1.powf(self.p / 2.0);
        let shift = (x2 - r) / self.p - 0.5 * x1.ln();
        Ok(match self.normalized(r, cap - shift, warm)? {
            Finite(v) if v + shift <= cap => Finite((v + shift).max(0.0)),
            _ => PosInf,
        })
    }

    /// `Λ*(1, r)`.
    fn normalized(&self, r: f64, cap: f64, warm: &mut [f64; 2]) -> Result<Extended> {
        // Jensen: E|Z|^p > (EZ²)^{p/2}.
        if r <= 1.0 + 1e-14 {
            return Ok(PosInf);
        }
        // From the Gaussian moment on, the supremum sits on the edge t₂ = 1/p.
        if r >= self.gaussian_moment {
            return Ok(Finite(r / self.p + self.edge_constant));
        }
        let cfg = ConjugateConfig {
            divergence_threshold: cap.max(1.0),
            ..ConjugateConfig::default()
        };
        let c = conjugate_2d(&self.cgf, [1.0, r], &cfg, *warm)?;
        if let Some(t) = c.argmax {
            *warm = t;
        }
        Ok(c.value)
    }
}

/// Conjugate of the pair CGF `Λ(t₁,t₂) = log E e^{t₁Z² + t₂|Z|^p}` at `(x₁, x₂)`.
pub fn pair_conjugate(p: PExponent, x: [f64; 2]) -> Result<Extended> {
    let pv = p.require_finite()?;
    if pv == 2.0 {
        // Both coordinates are Z², so only the diagonal is reachable and the
        // conjugate there is the chi-square one.
        if x[0].is_nan() || x[1].is_nan() {
            return Err(Error::domain("pair conjugate at a NaN point"));
        }
        return Ok(if x[0] == x[1] && x[0] > 0.0 && x[0].is_finite() {
            Finite(0.5 * (x[0] - 1.0 - x[0].ln()))
        } else {
            PosInf
        });
    }
    PairConjugate::new(pv)?.eval(x, ConjugateConfig::default().divergence_threshold, &mut [0.0, 0.0])
}

/// Rate of the factor `W` at speed `n`.
///
/// * `p = 2`: `W ≡ 1`, so the rate is the indicator of `{1}`.
/// * finite `p > 2`: the infimum of the pair conjugate along
///   `x₁ = y² x₂^{2/p}`, over log-spaced `x₂`.
/// * `p = ∞`: the conjugate of `t ↦ log E e^{tX²}` (`X` uniform on `[−1,1]`) at `y²`.
///
/// `W ≤ 1` always, so the rate is `+inf` for `y ≥ 1` (except at `p = 2`).
pub fn rate_w(p: PExponent, y: f64) -> Result<Extended> {
    rate_w_with(p, y, &RateConfig::default())
}

pub fn rate_w_with(p: PExponent, y: f64, cfg: &RateConfig) -> Result<Extended> {
    rate_w_capped(p, y, cfg, f64::INFINITY)
}

/// [`rate_w_with`], allowed to answer `+inf` for any value above `cap`.
fn rate_w_capped(p: PExponent, y: f64, cfg: &RateConfig, cap: f64) -> Result<Extended> {
    match p {
        PExponent::Finite(pv) if pv < 2.0 => Err(Error::domain(format!("the W rate needs p >= 2, got {pv}"))),
        PExponent::Finite(pv) if pv == 2.0 => Ok(if y == 1.0 { Finite(0.0) } else { PosInf }),
        _ if !(y > 0.0 && y < 1.0) => Ok(PosInf),
        PExponent::Infinity => {
            let v = conjugate_1d(&InftyCgf::centered(), y * y, &ConjugateConfig::default())?.value;
            Ok(v.map(|v| v.max(0.0)))
        }
        PExponent::Finite(pv) => {
            // Along x₁ = y² x₂^{2/p} the ratio x₂/x₁^{p/2} is fixed at y^{−p},
            // so one normalized conjugate serves the whole curve.
            let conj = PairConjugate::new(pv)?;
            let r = y.powf(-pv);
            let base = match conj.normalized(r, f64::INFINITY, &mut [0.0, 0.0])? {
                Finite(v) => v,
                _ => return Ok(PosInf),
            };
            let m = minimize_scalar_with(
                |x2| {
                    let x1 = y * y * x2.powf(2.0 / pv);
                    let v = base + (x2 - r) / pv - 0.5 * x1.ln();
                    if v > cap { PosInf } else { Finite(v.max(0.0)) }
                },
                cfg.x2_range.0,
                cfg.x2_range.1,
                &MinimizeConfig {
                    grid_points: cfg.inner_grid_points,
                    spacing: GridSpacing::Logarithmic,
                    tol: cfg.tol,
                    ..MinimizeConfig::default()
                },
            );
            Ok(m.value)
        }
    }
}

/// `λ·m_p` at the typical value of the projection: `m_p` for finite `p`,
/// `1/3` for `p = ∞`.
pub fn typical_second_moment(p: PExponent) -> Result<f64> {
    match p {
        PExponent::Infinity => Ok(1.0 / 3.0),
        PExponent::Finite(_) => moment_m(p),
    }
}

/// Rate of `n^{1/p−1/2}‖P_E X‖₂`.
///
/// * `1 ≤ p < 2` (speed `n^{p/2}`): `(1/p)(y²/λ − m_p)^{p/2}` for `y ≥ √(λ m_p)`;
///   `λ = 0` is not covered and returns [`Error::UnsupportedRegime`].
/// * `p = 2` (speed `n`): `rate_v1(λ, y)`, since `W ≡ 1`.
/// * `p > 2` and `p = ∞` (speed `n`): the infimum over `x ≥ y` of
///   `rate_v1(λ, y/x) + rate_w(p, x)`.
pub fn rate_projection(p: PExponent, lambda: f64, y: f64) -> Result<Extended> {
    rate_projection_with(p, lambda, y, &RateConfig::default())
}

pub fn rate_projection_with(p: PExponent, lambda: f64, y: f64, cfg: &RateConfig) -> Result<Extended> {
    check_lambda(lambda)?;
    match p {
        PExponent::Finite(pv) if pv < 2.0 => {
            if lambda == 0.0 {
                return Err(Error::UnsupportedRegime(format!(
                    "p = {pv} < 2 with lambda = 0 has no known rate"
                )));
            }
            if y < 0.0 {
                return Ok(PosInf);
            }
            let m = moment_m(p)?;
            Ok(stretched_rate(y * y / lambda - m, m, pv))
        }
        PExponent::Finite(pv) if pv == 2.0 => rate_v1(lambda, y),
        _ => {
            if y < 0.0 {
                return Ok(PosInf);
            }
            let x_max = cfg.x_max_factor * typical_second_moment(p)?.sqrt().max(1.0);
            if y == 0.0 {
                if lambda > 0.0 {
                    return rate_w_with(p, 0.0, cfg);
                }
                return outer_infimum(|x| rate_w_capped(p, x, cfg, f64::INFINITY), 1e-8, x_max, cfg);
            }
            let lo = y.max(1e-8);
            if lo >= x_max {
                return Ok(PosInf);
            }
            let mut best = f64::INFINITY;
            outer_infimum(
                |x| {
                    let head = rate_v1(lambda, y / x)?;
                    let Finite(h) = head else { return Ok(PosInf) };
                    // Both terms are nonnegative; a margin of 1 above the best
                    // value keeps the golden-section comparisons meaningful.
                    if h > best + 1.0 {
                        return Ok(PosInf);
                    }
                    let total = rate_w_capped(p, x, cfg, best - h + 1.0)? + h;
                    if let Finite(v) = total {
                        best = best.min(v);
                    }
                    Ok(total)
                },
                lo,
                x_max,
                cfg,
            )
        }
    }
}

fn outer_infimum<F>(mut f: F, lo: f64, hi: f64, cfg: &RateConfig) -> Result<Extended>
where
    F: FnMut(f64) -> Result<Extended>,
{
    let mut failure = None;
    let m = minimize_scalar_with(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                PosInf
            }
        },
        lo,
        hi,
        &MinimizeConfig {
            grid_points: cfg.outer_grid_points,
            tol: cfg.tol,
            ..MinimizeConfig::default()
        },
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(m.value.map(|v| v.max(0.0))),
    }
}

/// The two printed forms of the infimand of the `p ≥ 2` projection rate,
/// evaluated at the outer variable `x` with `J = rate_w(p, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfimandForm {
    /// `(λ/2) log(λx²/y²) + ((1−λ)/2) log((1−λ)/(1 − y²/x²)) + J`.
    Statement,
    /// `(λ/(2x²)) log(λ/y²) + ((1−λ)/2) log((1−λ)/(1 − y²/x²)) + J`.
    ProofDisplay,
}

pub fn printed_infimand(form: InfimandForm, lambda: f64, y: f64, x: f64, j: Extended) -> Extended {
    if !(x > 0.0 && y > 0.0 && y <= x) {
        return PosInf;
    }
    let r2 = (y / x).powi(2);
    let first = match form {
        InfimandForm::Statement => xlog_ratio(lambda, r2),
        InfimandForm::ProofDisplay => xlog_ratio(lambda, y * y).map(|v| v / (x * x)),
    };
    let second = xlog_ratio(1.0 - lambda, 1.0 - r2);
    (first + second).map(|v| 0.5 * v) + j
}
