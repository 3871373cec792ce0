//! Legendre–Fenchel conjugates of one- and two-dimensional cumulant
//! generating functions.
//!
//! Both transforms maximize the concave objective `⟨t,x⟩ − Λ(t)`. In one
//! dimension the maximizer is bracketed on the monotone derivative and then
//! bisected. In two dimensions a damped Newton ascent is run from the origin,
//! with the Hessian of `Λ` (a covariance under the tilted law) as the metric.
//! A conjugate is declared `+inf` when the objective passes
//! [`ConjugateConfig::divergence_threshold`] or the maximizer escapes to the
//! boundary of the effective domain.

use crate::error::{Error, Result};
use super::minimize::minimize_scalar;
use crate::extended::{Extended, Finite, PosInf};

/// A convex function `Λ: ℝ → (-∞, +∞]` with effective domain `(-∞, domain_upper)`.
pub trait Cgf1D {
    /// `Λ(t)`, `PosInf` outside the domain.
    fn value(&self, t: f64) -> Result<Extended>;

    /// Supremum of the effective domain; `f64::INFINITY` for entire functions.
    fn domain_upper(&self) -> f64;

    /// `Λ'(t)` for `t` in the domain. Defaults to a central difference.
    fn derivative(&self, t: f64) -> Result<f64> {
        let h = 1e-6 * t.abs().max(1.0);
        let (lo, hi) = if t + h < self.domain_upper() {
            (t - h, t + h)
        } else {
            (t - 2.0 * h, t)
        };
        let f = |s: f64| -> Result<f64> {
            self.value(s)?
                .finite()
                .ok_or_else(|| Error::domain(format!("Λ is infinite at {s}")))
        };
        Ok((f(hi)? - f(lo)?) / (hi - lo))
    }
}

/// A convex function `Λ: ℝ² → (-∞, +∞]` whose domain contains the origin in
/// its interior.
pub trait Cgf2D {
    fn value(&self, t: [f64; 2]) -> Result<Extended>;

    fn in_domain(&self, t: [f64; 2]) -> bool;

    /// `∇Λ(t)`. Defaults to central differences.
    fn gradient(&self, t: [f64; 2]) -> Result<[f64; 2]> {
        let mut g = [0.0; 2];
        for i in 0..2 {
            let h = 1e-6 * t[i].abs().max(1.0);
            let mut tp = t;
            let mut tm = t;
            tp[i] += h;
            tm[i] -= h;
            let fp = finite_or_domain(self.value(tp)?, tp)?;
            let fm = finite_or_domain(self.value(tm)?, tm)?;
            g[i] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }

    /// `∇²Λ(t)`. Defaults to central differences of [`Cgf2D::gradient`].
    fn hessian(&self, t: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        let mut hess = [[0.0; 2]; 2];
        for i in 0..2 {
            let h = 1e-4 * t[i].abs().max(1.0);
            let mut tp = t;
            let mut tm = t;
            tp[i] += h;
            tm[i] -= h;
            let gp = self.gradient(tp)?;
            let gm = self.gradient(tm)?;
            for j in 0..2 {
                hess[j][i] = (gp[j] - gm[j]) / (2.0 * h);
            }
        }
        let off = 0.5 * (hess[0][1] + hess[1][0]);
        hess[0][1] = off;
        hess[1][0] = off;
        Ok(hess)
    }

    /// Value, gradient and Hessian in one call; implementors backed by
    /// quadrature override this to share a single pass.
    fn local_model(&self, t: [f64; 2]) -> Result<(f64, [f64; 2], [[f64; 2]; 2])> {
        let v = finite_or_domain(self.value(t)?, t)?;
        Ok((v, self.gradient(t)?, self.hessian(t)?))
    }
}

fn finite_or_domain<T: std::fmt::Debug>(v: Extended, at: T) -> Result<f64> {
    v.finite()
        .ok_or_else(|| Error::domain(format!("Λ is infinite at {at:?}")))
}

/// A [`Cgf1D`] assembled from closures.
pub struct FnCgf1D<F, D = fn(f64) -> Result<f64>> {
    value: F,
    derivative: Option<D>,
    upper: f64,
}

impl<F> FnCgf1D<F>
where
    F: Fn(f64) -> Extended,
{
    pub fn new(value: F, domain_upper: f64) -> Self {
        FnCgf1D {
            value,
            derivative: None,
            upper: domain_upper,
        }
    }
}

impl<F, D> FnCgf1D<F, D>
where
    F: Fn(f64) -> Extended,
    D: Fn(f64) -> Result<f64>,
{
    pub fn with_derivative(value: F, derivative: D, domain_upper: f64) -> Self {
        FnCgf1D {
            value,
            derivative: Some(derivative),
            upper: domain_upper,
        }
    }
}

impl<F, D> Cgf1D for FnCgf1D<F, D>
where
    F: Fn(f64) -> Extended,
    D: Fn(f64) -> Result<f64>,
{
    fn value(&self, t: f64) -> Result<Extended> {
        if t >= self.upper {
            return Ok(PosInf);
        }
        Ok((self.value)(t))
    }

    fn domain_upper(&self) -> f64 {
        self.upper
    }

    fn derivative(&self, t: f64) -> Result<f64> {
        match &self.derivative {
            Some(d) => d(t),
            None => {
                let h = 1e-6 * t.abs().max(1.0);
                let (lo, hi) = if t + h < self.upper { (t - h, t + h) } else { (t - 2.0 * h, t) };
                let f = |s: f64| finite_or_domain((self.value)(s), s);
                Ok((f(hi)? - f(lo)?) / (hi - lo))
            }
        }
    }
}

/// A [`Cgf2D`] assembled from closures (finite-difference derivatives).
pub struct FnCgf2D<F, P> {
    value: F,
    domain: P,
}

impl<F, P> FnCgf2D<F, P>
where
    F: Fn([f64; 2]) -> f64,
    P: Fn([f64; 2]) -> bool,
{
    pub fn new(value: F, domain: P) -> Self {
        FnCgf2D { value, domain }
    }
}

impl<F, P> Cgf2D for FnCgf2D<F, P>
where
    F: Fn([f64; 2]) -> f64,
    P: Fn([f64; 2]) -> bool,
{
    fn value(&self, t: [f64; 2]) -> Result<Extended> {
        if (self.domain)(t) {
            Ok(Finite((self.value)(t)))
        } else {
            Ok(PosInf)
        }
    }

    fn in_domain(&self, t: [f64; 2]) -> bool {
        (self.domain)(t)
    }
}

/// Stopping rules shared by both conjugate routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugateConfig {
    /// Objective level beyond which the supremum is declared infinite.
    pub divergence_threshold: f64,
    /// Gradient-norm tolerance of the 2-D ascent.
    pub gradient_tol: f64,
    pub max_iterations: usize,
}

impl Default for ConjugateConfig {
    fn default() -> Self {
        ConjugateConfig {
            divergence_threshold: 1e8,
            gradient_tol: 1e-9,
            max_iterations: 200,
        }
    }
}

/// A conjugate value together with its maximizer, when finite. The maximizer
/// is the gradient of the conjugate at the evaluation point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugatePoint<T> {
    pub value: Extended,
    pub argmax: Option<T>,
}

/// `Λ*(x) = sup_t [t·x − Λ(t)]`.
pub fn legendre_fenchel_1d<C: Cgf1D + ?Sized>(cgf: &C, x: f64) -> Result<Extended> {
    conjugate_1d(cgf, x, &ConjugateConfig::default()).map(|c| c.value)
}

/// [`legendre_fenchel_1d`] with explicit configuration and the maximizer.
pub fn conjugate_1d<C: Cgf1D + ?Sized>(
    cgf: &C,
    x: f64,
    cfg: &ConjugateConfig,
) -> Result<ConjugatePoint<f64>> {
    let upper = cgf.domain_upper();
    if !(upper > 0.0) {
        return Err(Error::domain("the origin must be interior to the CGF domain"));
    }
    let objective = |t: f64| -> Result<f64> {
        let v = cgf.value(t)?;
        finite_or_domain(v, t).map(|v| t * x - v)
    };
    let slope0 = cgf.derivative(0.0)?;
    if x == slope0 {
        return Ok(ConjugatePoint {
            value: Finite(-finite_or_domain(cgf.value(0.0)?, 0.0)?),
            argmax: Some(0.0),
        });
    }

    // Expand away from the origin until Λ' crosses x.
    let ascending = x > slope0;
    let mut inner = 0.0;
    let mut outer = None;
    for j in 0..1100 {
        let t = if ascending {
            if upper.is_finite() {
                upper * (1.0 - 0.5_f64.powi(j + 1))
            } else {
                2.0_f64.powi(j)
            }
        } else {
            -(2.0_f64.powi(j))
        };
        if !t.is_finite() || (ascending && t >= upper) || (upper.is_finite() && t == inner && j > 0) {
            break;
        }
        let phi = objective(t)?;
        if phi > cfg.divergence_threshold {
            return Ok(ConjugatePoint {
                value: PosInf,
                argmax: None,
            });
        }
        let slope = cgf.derivative(t)?;
        let crossed = if ascending { slope >= x } else { slope <= x };
        if crossed {
            outer = Some(t);
            break;
        }
        inner = t;
    }
    let Some(outer) = outer else {
        // Λ' never reaches x: the objective keeps increasing to the boundary.
        return Ok(ConjugatePoint {
            value: PosInf,
            argmax: None,
        });
    };

    // Bisection on the monotone derivative.
    let (mut lo, mut hi) = if ascending { (inner, outer) } else { (outer, inner) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cgf.derivative(mid)? < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let value = objective(t)?;
    Ok(ConjugatePoint {
        value: if value > cfg.divergence_threshold {
            PosInf
        } else {
            Finite(value)
        },
        argmax: Some(t),
    })
}

/// `Λ*(x) = sup_t [⟨t,x⟩ − Λ(t)]` in two dimensions.
pub fn legendre_fenchel_2d<C: Cgf2D + ?Sized>(cgf: &C, x: [f64; 2]) -> Result<Extended> {
    conjugate_2d(cgf, x, &ConjugateConfig::default(), [0.0, 0.0]).map(|c| c.value)
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Unit eigenvectors of a symmetric 2×2 matrix for its larger and smaller
/// eigenvalue.
fn principal_axes(h: [[f64; 2]; 2]) -> ([f64; 2], [f64; 2]) {
    let angle = 0.5 * (2.0 * h[0][1]).atan2(h[0][0] - h[1][1]);
    let (s, c) = angle.sin_cos();
    ([c, s], [-s, c])
}

/// Damped Newton ascent for the 2-D conjugate, started at `start` (must lie
/// in the domain).
pub fn conjugate_2d<C: Cgf2D + ?Sized>(
    cgf: &C,
    x: [f64; 2],
    cfg: &ConjugateConfig,
    start: [f64; 2],
) -> Result<ConjugatePoint<[f64; 2]>> {
    let mut t = if cgf.in_domain(start) { start } else { [0.0, 0.0] };
    if !cgf.in_domain(t) {
        return Err(Error::domain("the origin must be interior to the CGF domain"));
    }
    let diverged = ConjugatePoint {
        value: PosInf,
        argmax: None,
    };

    let (mut lam, mut grad, mut hess) = cgf.local_model(t)?;
    let mut phi = dot(t, x) - lam;
    for _ in 0..cfg.max_iterations {
        let ascent = [x[0] - grad[0], x[1] - grad[1]];
        let gnorm = ascent[0].hypot(ascent[1]);
        if gnorm <= cfg.gradient_tol {
            return Ok(ConjugatePoint {
                value: Finite(phi),
                argmax: Some(t),
            });
        }
        if phi > cfg.divergence_threshold {
            return Ok(diverged);
        }

        let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
        let trace = hess[0][0] + hess[1][1];
        let mut newton = det > 1e-12 * hess[0][0] * hess[1][1] && hess[0][0] > 0.0;
        let mut dir = if newton {
            [
                (hess[1][1] * ascent[0] - hess[0][1] * ascent[1]) / det,
                (hess[0][0] * ascent[1] - hess[1][0] * ascent[0]) / det,
            ]
        } else if trace > 0.0 {
            // Rank-one covariance: Λ is affine along the null direction, so any
            // ascent component there makes the supremum infinite.
            let (top, null) = principal_axes(hess);
            if dot(null, ascent).abs() > cfg.gradient_tol.sqrt() * (1.0 + x[0].abs() + x[1].abs()) {
                return Ok(diverged);
            }
            let c = dot(top, ascent) / trace;
            [c * top[0], c * top[1]]
        } else {
            ascent
        };
        if !(dot(dir, ascent) > 0.0) || !dir[0].is_finite() || !dir[1].is_finite() {
            dir = if trace > 0.0 {
                [ascent[0] / trace, ascent[1] / trace]
            } else {
                ascent
            };
            newton = false;
        }

        let slope = dot(dir, ascent);
        // Newton decrement at the rounding level of the objective: a noisy
        // gradient (e.g. from a nested ascent) can stall above gradient_tol.
        if newton && slope <= 1e-14 * (1.0 + phi.abs()) {
            return Ok(ConjugatePoint {
                value: Finite(phi),
                argmax: Some(t),
            });
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        // Close to the optimum the predicted gain drops below the rounding
        // level of the objective, so the Armijo test turns into noise.
        let full = [t[0] + dir[0], t[1] + dir[1]];
        if newton && slope < 1e-10 * (1.0 + phi.abs()) && cgf.in_domain(full) {
            accepted = Some(full);
        }
        for _ in 0..if accepted.is_some() { 0 } else { 80 } {
            let cand = [t[0] + alpha * dir[0], t[1] + alpha * dir[1]];
            if cgf.in_domain(cand) {
                if let Finite(v) = cgf.value(cand)? {
                    let phi_c = dot(cand, x) - v;
                    if phi_c >= phi + 1e-4 * alpha * slope {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        // Gradient steps on a (nearly) affine objective grow geometrically so
        // that an unbounded supremum reaches the divergence threshold quickly.
        if let (Some(mut best), false, true) = (accepted, newton, alpha == 1.0) {
            let mut best_phi = dot(best, x) - finite_or_domain(cgf.value(best)?, best)?;
            loop {
                alpha *= 2.0;
                let cand = [t[0] + alpha * dir[0], t[1] + alpha * dir[1]];
                if !cgf.in_domain(cand) || !(alpha < 1e300) {
                    break;
                }
                let Finite(v) = cgf.value(cand)? else { break };
                let phi_c = dot(cand, x) - v;
                if phi_c < best_phi + 1e-4 * alpha * slope {
                    break;
                }
                best = cand;
                best_phi = phi_c;
                if best_phi > cfg.divergence_threshold {
                    return Ok(diverged);
                }
            }
            accepted = Some(best);
        }
        let Some(next) = accepted else {
            // No ascent possible: either at the optimum to working precision
            // or pinned against the domain boundary by an unbounded objective.
            if gnorm <= 1e3 * cfg.gradient_tol * (1.0 + x[0].abs() + x[1].abs()) {
                return Ok(ConjugatePoint {
                    value: Finite(phi),
                    argmax: Some(t),
                });
            }
            let boundary = !cgf.in_domain([t[0] + 1e-9 * dir[0], t[1] + 1e-9 * dir[1]]);
            if boundary || t[0].abs().max(t[1].abs()) > cfg.divergence_threshold {
                return Ok(diverged);
            }
            return Err(Error::non_convergence(
                "legendre_fenchel_2d",
                format!("line search failed at t={t:?}, objective {phi}, gradient norm {gnorm}"),
            ));
        };
        t = next;
        (lam, grad, hess) = cgf.local_model(t)?;
        phi = dot(t, x) - lam;
    }
    if phi > 0.1 * cfg.divergence_threshold || t[0].abs().max(t[1].abs()) > cfg.divergence_threshold {
        return Ok(diverged);
    }
    Err(Error::non_convergence(
        "legendre_fenchel_2d",
        format!("iteration limit at t={t:?}, objective {phi}"),
    ))
}

/// `Λ**(t) = sup_x [t·x − Λ*(x)]` with `x` restricted to `[x_lo, x_hi]`.
///
/// For a closed convex `Λ` this reproduces `Λ(t)` whenever the maximizer
/// `Λ'(t)` lies inside the search range.
pub fn double_conjugate_1d<C: Cgf1D + ?Sized>(cgf: &C, t: f64, x_lo: f64, x_hi: f64) -> Result<Extended> {
    let mut failure = None;
    let m = minimize_scalar(
        |x| match legendre_fenchel_1d(cgf, x) {
            Ok(v) => v + (-t * x),
            Err(e) => {
                failure.get_or_insert(e);
                PosInf
            }
        },
        x_lo,
        x_hi,
        1e-12,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(match m.value {
        Finite(v) => Finite(-v),
        PosInf => PosInf,
    })
}

/// The conjugate `Λ*` of a steep 2-D CGF, viewed as a convex function in its
/// own right: its gradient is the maximizer `t*(x)` and its Hessian is
/// `∇²Λ(t*)^{-1}`.
struct Conjugated<'a, C: ?Sized> {
    cgf: &'a C,
    cfg: ConjugateConfig,
    warm: std::cell::Cell<[f64; 2]>,
}

impl<C: Cgf2D + ?Sized> Conjugated<'_, C> {
    fn point(&self, x: [f64; 2]) -> Result<ConjugatePoint<[f64; 2]>> {
        let c = conjugate_2d(self.cgf, x, &self.cfg, self.warm.get())?;
        if let Some(t) = c.argmax {
            self.warm.set(t);
        }
        Ok(c)
    }
}

impl<C: Cgf2D + ?Sized> Cgf2D for Conjugated<'_, C> {
    fn value(&self, x: [f64; 2]) -> Result<Extended> {
        Ok(self.point(x)?.value)
    }

    fn in_domain(&self, x: [f64; 2]) -> bool {
        matches!(self.point(x), Ok(c) if c.value.is_finite())
    }

    fn local_model(&self, x: [f64; 2]) -> Result<(f64, [f64; 2], [[f64; 2]; 2])> {
        let c = self.point(x)?;
        let (Finite(v), Some(t)) = (c.value, c.argmax) else {
            return Err(Error::domain(format!("conjugate is infinite at {x:?}")));
        };
        let (_, _, h) = self.cgf.local_model(t)?;
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let inv = [[h[1][1] / det, -h[0][1] / det], [-h[1][0] / det, h[0][0] / det]];
        Ok((v, t, inv))
    }
}

/// `Λ**(t) = sup_x [⟨t,x⟩ − Λ*(x)]` for a steep 2-D CGF, by Newton ascent in
/// `x` started from the mean `∇Λ(0)`.
pub fn double_conjugate_2d<C: Cgf2D + ?Sized>(cgf: &C, t: [f64; 2]) -> Result<Extended> {
    let (_, mean, _) = cgf.local_model([0.0, 0.0])?;
    let dual = Conjugated {
        cgf,
        cfg: ConjugateConfig::default(),
        warm: std::cell::Cell::new([0.0, 0.0]),
    };
    conjugate_2d(&dual, t, &ConjugateConfig::default(), mean).map(|c| c.value)
}
