//! Adaptive Gauss–Kronrod (10/21) quadrature with explicit tail truncation
//! for integrands on the half line or the real line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Tolerances and truncation policy for [`integrate`] and friends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation point of infinite ranges, in units of the caller's decay scale.
    pub tail_cutoff_multiplier: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            tail_cutoff_multiplier: 40.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        if !(self.tail_cutoff_multiplier > 0.0) {
            return Err(Error::domain("tail_cutoff_multiplier must be positive"));
        }
        Ok(())
    }

    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureConfig {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

/// Value of a (vector) integral with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub abs_error: [f64; N],
    pub panels: usize,
}

/// Scalar integral estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarEstimate {
    pub value: f64,
    pub abs_error: f64,
}

impl From<Estimate<1>> for ScalarEstimate {
    fn from(e: Estimate<1>) -> Self {
        ScalarEstimate {
            value: e.value[0],
            abs_error: e.abs_error[0],
        }
    }
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn gauss_kronrod<const N: usize, F>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];

    let fc = f(center);
    for c in 0..N {
        kronrod[c] = WGK[10] * fc[c];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            kronrod[c] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        value[c] = kronrod[c] * half;
        error[c] = ((kronrod[c] - gauss[c]) * half).abs();
    }
    (value, error)
}

fn tolerance<const N: usize>(total: &[f64; N], cfg: &QuadratureConfig) -> [f64; N] {
    let mut tol = [0.0; N];
    for c in 0..N {
        tol[c] = cfg.abs_tol.max(cfg.rel_tol * total[c].abs());
    }
    tol
}

/// Adaptive integration of a vector-valued integrand over `[points[0], points[last]]`,
/// starting from the panels delimited by `points`. Every component must meet
/// `max(abs_tol, rel_tol·|I_c|)`.
pub fn integrate_vec_breakpoints<const N: usize, F>(
    f: F,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate<N>>
where
    F: Fn(f64) -> [f64; N],
{
    cfg.validate()?;
    if points.len() < 2 {
        return Err(Error::domain("at least two breakpoints are required"));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("breakpoints must be strictly increasing"));
    }

    let mut heap = BinaryHeap::new();
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    for w in points.windows(2) {
        let (value, error) = gauss_kronrod(&f, w[0], w[1]);
        for c in 0..N {
            total[c] += value[c];
            total_err[c] += error[c];
        }
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            priority: 0.0,
        });
    }
    // Priorities need the running total, so rebuild once it is known.
    let tol = tolerance(&total, cfg);
    let mut heap: BinaryHeap<Panel<N>> = heap
        .into_iter()
        .map(|mut p| {
            p.priority = priority(&p.error, &tol);
            p
        })
        .collect();

    let mut panels = heap.len();
    loop {
        let tol = tolerance(&total, cfg);
        if (0..N).all(|c| total_err[c] <= tol[c]) {
            return Ok(Estimate {
                value: total,
                abs_error: total_err,
                panels,
            });
        }
        if panels >= cfg.max_subdivisions {
            return Err(Error::non_convergence(
                "adaptive quadrature",
                format!(
                    "{panels} panels exhausted; estimate {:?} with error {:?}",
                    total, total_err
                ),
            ));
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::non_convergence(
                "adaptive quadrature",
                format!(
                    "panel [{}, {}] cannot be split; estimate {:?} with error {:?}",
                    worst.a, worst.b, total, total_err
                ),
            ));
        }
        let (lv, le) = gauss_kronrod(&f, worst.a, mid);
        let (rv, re) = gauss_kronrod(&f, mid, worst.b);
        for c in 0..N {
            total[c] += lv[c] + rv[c] - worst.value[c];
            total_err[c] += le[c] + re[c] - worst.error[c];
        }
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
            priority: priority(&le, &tol),
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
            priority: priority(&re, &tol),
        });
        panels += 1;
    }
}

fn priority<const N: usize>(error: &[f64; N], tol: &[f64; N]) -> f64 {
    (0..N).map(|c| error[c] / tol[c]).fold(0.0, f64::max)
}

/// Adaptive integration of a scalar integrand over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<ScalarEstimate>
where
    F: Fn(f64) -> f64,
{
    integrate_breakpoints(f, &[a, b], cfg)
}

/// Scalar integration starting from the panels delimited by `points`.
pub fn integrate_breakpoints<F>(f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<ScalarEstimate>
where
    F: Fn(f64) -> f64,
{
    integrate_vec_breakpoints(|x| [f(x)], points, cfg).map(ScalarEstimate::from)
}

/// Breakpoints `0, s/8, s/4, ..., cutoff` concentrating panels near the origin
/// where the exponential-tail integrands of this crate carry their mass.
fn half_line_points(scale: f64, cutoff: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = scale / 8.0;
    while x < cutoff {
        pts.push(x);
        x *= 2.0;
    }
    pts.push(cutoff);
    pts
}

/// Integral over `[0, ∞)` of an integrand with super-polynomial decay on the
/// length scale `decay_scale`.
///
/// The range is truncated at `tail_cutoff_multiplier · decay_scale`. The
/// discarded tail is bounded by the majorant `|f(L)|·decay_scale`, which is
/// added to the reported error; the cutoff doubles until the majorant fits
/// into a tenth of the absolute budget.
pub fn integrate_half_line_vec<const N: usize, F>(
    f: F,
    decay_scale: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if !(decay_scale > 0.0) || !decay_scale.is_finite() {
        return Err(Error::domain(format!("decay scale must be positive, got {decay_scale}")));
    }
    let mut cutoff = cfg.tail_cutoff_multiplier * decay_scale;
    for _ in 0..8 {
        let edge = f(cutoff);
        let majorant: f64 = edge.iter().map(|v| v.abs()).fold(0.0, f64::max) * decay_scale;
        if majorant <= 0.1 * cfg.abs_tol {
            let mut est = integrate_vec_breakpoints(&f, &half_line_points(decay_scale, cutoff), cfg)?;
            for c in 0..N {
                est.abs_error[c] += edge[c].abs() * decay_scale;
            }
            return Ok(est);
        }
        cutoff *= 2.0;
    }
    Err(Error::non_convergence(
        "half-line truncation",
        format!("integrand not negligible at {cutoff} (decay scale {decay_scale})"),
    ))
}

/// Scalar version of [`integrate_half_line_vec`].
pub fn integrate_half_line<F>(f: F, decay_scale: f64, cfg: &QuadratureConfig) -> Result<ScalarEstimate>
where
    F: Fn(f64) -> f64,
{
    integrate_half_line_vec(|x| [f(x)], decay_scale, cfg).map(ScalarEstimate::from)
}

/// Integral over the whole real line, split at the origin into two half-line
/// integrals with the same truncation policy.
pub fn integrate_real_line<F>(f: F, decay_scale: f64, cfg: &QuadratureConfig) -> Result<ScalarEstimate>
where
    F: Fn(f64) -> f64,
{
    let right = integrate_half_line(&f, decay_scale, cfg)?;
    let left = integrate_half_line(|x| f(-x), decay_scale, cfg)?;
    Ok(ScalarEstimate {
        value: right.value + left.value,
        abs_error: right.abs_error + left.abs_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, &QuadratureConfig::default()).unwrap();
        assert!((est.value - (9.0 - 1.5 + 6.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_normalization_on_real_line() {
        let cfg = QuadratureConfig::default();
        let norm = (2.0 * PI).sqrt();
        let est = integrate_real_line(|x| (-0.5 * x * x).exp() / norm, 1.0, &cfg).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        let var = integrate_real_line(|x| x * x * (-0.5 * x * x).exp() / norm, 1.0, &cfg).unwrap();
        assert!((var.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn peaked_integrand_refines() {
        // ∫_0^1 n e^{-n x} dx = 1 - e^{-n}
        let n = 1.0e4;
        let est = integrate(|x| n * (-n * x).exp(), 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-10);
        assert!(est.abs_error < 1e-9);
    }

    #[test]
    fn exhausting_subdivisions_reports_non_convergence() {
        let cfg = QuadratureConfig {
            max_subdivisions: 2,
            ..QuadratureConfig::default()
        };
        let err = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn vector_components_share_panels() {
        let est = integrate_vec_breakpoints(|x| [x.exp(), x.cos()], &[0.0, 1.0, 3.0], &QuadratureConfig::default())
            .unwrap();
        assert!((est.value[0] - (3.0_f64.exp() - 1.0)).abs() < 1e-10);
        assert!((est.value[1] - 3.0_f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let bad = QuadratureConfig {
            abs_tol: 0.0,
            ..QuadratureConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(integrate(|x| x, 0.0, 1.0, &bad).is_err());
    }
}
