//! Cumulant generating functions whose conjugates give the rate functions.

use crate::error::{Error, Result};
use crate::extended::{Extended, Finite, PosInf};
use crate::numerics::{
    integrate_half_line_vec, integrate_vec_breakpoints, Cgf1D, Cgf2D, QuadratureConfig,
};
use crate::numerics::special::ln_gamma_unchecked;
use crate::sampling::PExponent;

/// `log(2 p^{1/p} Γ(1+1/p))`, the log normalizer of the p-generalized Gaussian.
pub fn log_normalizer(p: f64) -> f64 {
    std::f64::consts::LN_2 + p.ln() / p + ln_gamma_unchecked(1.0 + 1.0 / p)
}

/// `Λ(t₁,t₂) = log E exp(t₁Z² + t₂|Z|^p)` for a p-generalized Gaussian `Z`, `p ≥ 2`.
///
/// The domain is `t₂ < 1/p` for `p > 2` and `t₁ + t₂ < 1/2` for `p = 2`.
/// Values, moments and the tilted covariance come from one quadrature pass
/// over `[0, ∞)` of `x ↦ (1, x², x^p, x⁴, x^{p+2}, x^{2p}) · e^{g(x) − g_max}`
/// with `g(x) = t₁x² + (t₂ − 1/p)x^p`.
#[derive(Clone, Debug)]
pub struct PairCgf {
    p: f64,
    log_norm: f64,
    quad: QuadratureConfig,
}

struct Tilt {
    shift: f64,
    scale: f64,
}

impl PairCgf {
    pub fn new(p: PExponent) -> Result<Self> {
        let pv = p.require_finite()?;
        if pv < 2.0 {
            return Err(Error::domain(format!("the pair CGF needs p >= 2, got {pv}")));
        }
        Ok(PairCgf {
            p: pv,
            log_norm: log_normalizer(pv),
            quad: QuadratureConfig::with_tolerances(1e-13, 1e-12),
        })
    }

    pub fn with_quadrature(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn exponent(&self, t: [f64; 2], x: f64) -> f64 {
        let p = self.p;
        if p == 2.0 {
            (t[0] + t[1] - 0.5) * x * x
        } else {
            t[0] * x * x + (t[1] - 1.0 / p) * x.powf(p)
        }
    }

    /// Location of the integrand maximum and a decay length scale.
    fn tilt(&self, t: [f64; 2]) -> Tilt {
        let p = self.p;
        if p == 2.0 {
            let c = 0.5 - t[0] - t[1];
            return Tilt {
                shift: 0.0,
                scale: 1.0 / c.sqrt(),
            };
        }
        let s = 1.0 / p - t[1];
        let spread = s.powf(-1.0 / p);
        if t[0] > 0.0 {
            let peak = (2.0 * t[0] / (p * s)).powf(1.0 / (p - 2.0));
            Tilt {
                shift: self.exponent(t, peak).max(0.0),
                scale: peak.max(spread),
            }
        } else if t[0] < 0.0 {
            Tilt {
                shift: 0.0,
                scale: spread.min(1.0 / (-t[0]).sqrt()),
            }
        } else {
            Tilt { shift: 0.0, scale: spread }
        }
    }

    /// Shifted integrals `∫₀^∞ (1, x², x^p, x⁴, x^{p+2}, x^{2p}) e^{g − g_max}`.
    fn moments(&self, t: [f64; 2]) -> Result<(f64, [f64; 6])> {
        let tilt = self.tilt(t);
        let p = self.p;
        let est = integrate_half_line_vec(
            |x| {
                let w = (self.exponent(t, x) - tilt.shift).exp();
                let x2 = x * x;
                let xp = if p == 2.0 { x2 } else { x.powf(p) };
                [w, w * x2, w * xp, w * x2 * x2, w * x2 * xp, w * xp * xp]
            },
            tilt.scale,
            &self.quad,
        )?;
        Ok((tilt.shift, est.value))
    }

    /// `E|Z|^2` and `E|Z|^p` under the untilted law (the mean vector).
    pub fn mean(&self) -> Result<[f64; 2]> {
        Ok(self.local_model([0.0, 0.0])?.1)
    }
}

impl Cgf2D for PairCgf {
    fn value(&self, t: [f64; 2]) -> Result<Extended> {
        if !self.in_domain(t) {
            return Ok(PosInf);
        }
        let (shift, m) = self.moments(t)?;
        Ok(Finite(shift + (2.0 * m[0]).ln() - self.log_norm))
    }

    fn in_domain(&self, t: [f64; 2]) -> bool {
        if !(t[0].is_finite() && t[1].is_finite()) {
            return false;
        }
        if self.p == 2.0 {
            t[0] + t[1] < 0.5
        } else {
            t[1] < 1.0 / self.p
        }
    }

    fn gradient(&self, t: [f64; 2]) -> Result<[f64; 2]> {
        Ok(self.local_model(t)?.1)
    }

    fn hessian(&self, t: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        Ok(self.local_model(t)?.2)
    }

    fn local_model(&self, t: [f64; 2]) -> Result<(f64, [f64; 2], [[f64; 2]; 2])> {
        if !self.in_domain(t) {
            return Err(Error::domain(format!("({}, {}) is outside the pair CGF domain", t[0], t[1])));
        }
        let (shift, m) = self.moments(t)?;
        let value = shift + (2.0 * m[0]).ln() - self.log_norm;
        let e2 = m[1] / m[0];
        let ep = m[2] / m[0];
        let c22 = m[3] / m[0] - e2 * e2;
        let c2p = m[4] / m[0] - e2 * ep;
        let cpp = m[5] / m[0] - ep * ep;
        Ok((value, [e2, ep], [[c22, c2p], [c2p, cpp]]))
    }
}

/// `log(2∫₀¹ e^{tx²} dx)`, exactly as printed; equals `log 2` at `t = 0`.
pub fn cgf_infty(t: f64) -> Result<f64> {
    Ok(InftyCgf::printed().log_integral(t)?.0 + std::f64::consts::LN_2)
}

/// The p = ∞ CGF `t ↦ log ∫₀¹ e^{tx²} dx = log E e^{tX²}` for `X` uniform on
/// `[−1, 1]`, optionally with the additive `log 2` of the printed form.
#[derive(Clone, Debug)]
pub struct InftyCgf {
    offset: f64,
    quad: QuadratureConfig,
}

impl InftyCgf {
    /// The centered form, `Λ(0) = 0`; this is the one whose conjugate is a rate.
    pub fn centered() -> Self {
        InftyCgf {
            offset: 0.0,
            quad: QuadratureConfig::with_tolerances(1e-14, 1e-13),
        }
    }

    /// The form `log(2∫₀¹ e^{tx²} dx)`.
    pub fn printed() -> Self {
        InftyCgf {
            offset: std::f64::consts::LN_2,
            ..Self::centered()
        }
    }

    /// `(log ∫₀¹ e^{tx²} dx, ∫₀¹ x² e^{tx²} dx / ∫₀¹ e^{tx²} dx)`.
    ///
    /// For `t > 0` the substitution `v = t(1 − x)` gives
    /// `∫₀¹ e^{tx²} dx = (e^t / t) ∫₀^t e^{−v(2 − v/t)} dv` and the integrand is
    /// below `e^{−v}`, so the range is cut at 60. For `t < 0`, `x = w/√|t|`
    /// and the Gaussian integrand is cut at 10.
    fn log_integral(&self, t: f64) -> Result<(f64, f64)> {
        if !t.is_finite() {
            return Err(Error::domain(format!("CGF argument must be finite, got {t}")));
        }
        if t == 0.0 {
            return Ok((0.0, 1.0 / 3.0));
        }
        if t > 0.0 {
            let top = t.min(60.0);
            let est = integrate_vec_breakpoints(
                |v| {
                    let w = (-v * (2.0 - v / t)).exp();
                    let x = 1.0 - v / t;
                    [w, w * x * x]
                },
                &breakpoints(top),
                &self.quad,
            )?;
            Ok((t + (est.value[0] / t).ln(), est.value[1] / est.value[0]))
        } else {
            let r = (-t).sqrt();
            let top = r.min(10.0);
            let est = integrate_vec_breakpoints(
                |w| {
                    let e = (-w * w).exp();
                    [e, e * w * w]
                },
                &breakpoints(top),
                &self.quad,
            )?;
            Ok(((est.value[0] / r).ln(), est.value[1] / est.value[0] / (-t)))
        }
    }
}

fn breakpoints(top: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = 0.125;
    while x < top {
        pts.push(x);
        x *= 2.0;
    }
    pts.push(top);
    pts
}

impl Cgf1D for InftyCgf {
    fn value(&self, t: f64) -> Result<Extended> {
        Ok(Finite(self.log_integral(t)?.0 + self.offset))
    }

    fn domain_upper(&self) -> f64 {
        f64::INFINITY
    }

    fn derivative(&self, t: f64) -> Result<f64> {
        Ok(self.log_integral(t)?.1)
    }
}

/// `−½ log(1 − 2t)`, the CGF of `g²` for a standard Gaussian `g`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ChiSquareCgf;

impl Cgf1D for ChiSquareCgf {
    fn value(&self, t: f64) -> Result<Extended> {
        Ok(if t < 0.5 {
            Finite(-0.5 * (-2.0 * t).ln_1p())
        } else {
            PosInf
        })
    }

    fn domain_upper(&self) -> f64 {
        0.5
    }

    fn derivative(&self, t: f64) -> Result<f64> {
        Ok(1.0 / (1.0 - 2.0 * t))
    }
}

/// `−(1/p) log(1 − pt)`, the CGF of `|Z|^p` (`|Z|^p / p` is Gamma(1/p, 1)).
#[derive(Clone, Copy, Debug)]
pub struct PowerCgf {
    p: f64,
}

impl PowerCgf {
    pub fn new(p: PExponent) -> Result<Self> {
        Ok(PowerCgf { p: p.require_finite()? })
    }
}

impl Cgf1D for PowerCgf {
    fn value(&self, t: f64) -> Result<Extended> {
        Ok(if t < 1.0 / self.p {
            Finite(-(-self.p * t).ln_1p() / self.p)
        } else {
            PosInf
        })
    }

    fn domain_upper(&self) -> f64 {
        1.0 / self.p
    }

    fn derivative(&self, t: f64) -> Result<f64> {
        Ok(1.0 / (1.0 - self.p * t))
    }
}

/// `log E e^{t|Z|^p}` by quadrature, the check on [`PowerCgf`]'s closed form.
pub fn power_cgf_quadrature(p: PExponent, t: f64) -> Result<Extended> {
    let pv = p.require_finite()?;
    if t >= 1.0 / pv {
        return Ok(PosInf);
    }
    let s = 1.0 / pv - t;
    let est = integrate_half_line_vec(
        |x| [(-s * x.powf(pv)).exp()],
        s.powf(-1.0 / pv),
        &QuadratureConfig::with_tolerances(1e-14, 1e-13),
    )?;
    Ok(Finite((2.0 * est.value[0]).ln() - log_normalizer(pv)))
}

/// Moment `E Z²` of the p-generalized Gaussian by quadrature.
pub(crate) fn second_moment_quadrature(p: f64) -> Result<f64> {
    let est = integrate_half_line_vec(
        |x| {
            let w = (-x.powf(p) / p).exp();
            [w, w * x * x]
        },
        p.powf(1.0 / p),
        &QuadratureConfig::with_tolerances(1e-15, 1e-14),
    )?;
    Ok(est.value[1] / est.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::legendre_fenchel_1d;

    #[test]
    fn pair_cgf_vanishes_at_origin() {
        for &p in &[2.0, 3.0, 4.0, 7.5] {
            let c = PairCgf::new(PExponent::Finite(p)).unwrap();
            assert!(c.value([0.0, 0.0]).unwrap().to_f64().abs() < 1e-12, "p={p}");
            let mean = c.mean().unwrap();
            assert!((mean[1] - 1.0).abs() < 1e-11, "E|Z|^p = {}", mean[1]);
        }
    }

    #[test]
    fn pair_cgf_domain() {
        let c2 = PairCgf::new(PExponent::Finite(2.0)).unwrap();
        assert_eq!(c2.value([0.3, 0.3]).unwrap(), PosInf);
        let v = c2.value([0.2, 0.1]).unwrap().to_f64();
        assert!((v + 0.5 * (1.0_f64 - 0.6).ln()).abs() < 1e-12);
        let c4 = PairCgf::new(PExponent::Finite(4.0)).unwrap();
        assert_eq!(c4.value([0.0, 0.25]).unwrap(), PosInf);
        assert!(c4.value([50.0, 0.2]).unwrap().is_finite());
        assert!(PairCgf::new(PExponent::Finite(1.5)).is_err());
    }

    #[test]
    fn pair_cgf_agrees_with_power_cgf_on_the_axis() {
        let c = PairCgf::new(PExponent::Finite(3.0)).unwrap();
        let power = PowerCgf::new(PExponent::Finite(3.0)).unwrap();
        for &t in &[-2.0, -0.1, 0.2, 0.33] {
            let a = c.value([0.0, t]).unwrap().to_f64();
            let b = power.value(t).unwrap().to_f64();
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn pair_gradient_matches_differences() {
        let c = PairCgf::new(PExponent::Finite(4.0)).unwrap();
        for &t in &[[0.0, 0.0], [0.4, 0.1], [-1.0, -0.5], [3.0, 0.2]] {
            let (_, g, h) = c.local_model(t).unwrap();
            let step = 1e-5;
            for i in 0..2 {
                let mut tp = t;
                let mut tm = t;
                tp[i] += step;
                tm[i] -= step;
                let fd = (c.value(tp).unwrap().to_f64() - c.value(tm).unwrap().to_f64()) / (2.0 * step);
                assert!((fd - g[i]).abs() < 1e-6_f64.max(1e-6 * g[i].abs()), "t={t:?} i={i}");
                let gp = c.gradient(tp).unwrap();
                let gm = c.gradient(tm).unwrap();
                for j in 0..2 {
                    let fd = (gp[j] - gm[j]) / (2.0 * step);
                    assert!((fd - h[j][i]).abs() < 1e-5 * h[j][i].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn infty_cgf_printed_values() {
        assert!((cgf_infty(0.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        // 2∫₀¹ e^{x²} dx = 2 · 1.4626517459071816.
        let v = cgf_infty(1.0).unwrap();
        assert!((v - (2.0 * 1.462_651_745_907_181_6_f64).ln()).abs() < 1e-12, "{v}");
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let t = -(i as f64) * 20.0;
            let v = cgf_infty(t).unwrap();
            assert!(v < prev);
            prev = v;
        }
        // Large positive t: 2∫₀¹ e^{tx²} dx ~ e^t / t.
        let t = 5000.0;
        assert!((cgf_infty(t).unwrap() - (t - t.ln())).abs() < 1e-3);
    }

    #[test]
    fn infty_cgf_branches_are_continuous() {
        let c = InftyCgf::centered();
        for &t in &[0.0, 60.0] {
            let (a, b) = (c.value(t - 1e-9).unwrap().to_f64(), c.value(t + 1e-9).unwrap().to_f64());
            assert!((a - b).abs() < 1e-8, "t={t}");
        }
        for &t in &[1e-9_f64, -1e-9, 59.999, 60.001] {
            let h = 1e-6 * t.abs().max(1.0);
            let fd = (c.value(t + h).unwrap().to_f64() - c.value(t - h).unwrap().to_f64()) / (2.0 * h);
            assert!((fd - c.derivative(t).unwrap()).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn chi_square_and_power_conjugates() {
        let v = legendre_fenchel_1d(&ChiSquareCgf, 2.0).unwrap().to_f64();
        assert!((v - (0.5 - 0.5 * 2.0_f64.ln())).abs() < 1e-10);
        let q = power_cgf_quadrature(PExponent::Finite(1.5), 0.4).unwrap().to_f64();
        let exact = PowerCgf::new(PExponent::Finite(1.5)).unwrap().value(0.4).unwrap().to_f64();
        assert!((q - exact).abs() < 1e-11);
    }

    #[test]
    fn second_moment_reference_values() {
        assert!((second_moment_quadrature(2.0).unwrap() - 1.0).abs() < 1e-13);
        assert!((second_moment_quadrature(1.0).unwrap() - 2.0).abs() < 1e-12);
        // p^{2/p} Γ(1+3/p) / (3 Γ(1+1/p)) at p = 3/2.
        assert!((second_moment_quadrature(1.5).unwrap() - 1.268_036_789).abs() < 1e-8);
    }
}
