//! Bracketing scalar minimization: grid scan followed by golden-section
//! refinement.

use crate::extended::{Extended, PosInf};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// How the initial scan places its grid points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridSpacing {
    Linear,
    /// Geometric spacing; requires `0 < lo < hi`.
    Logarithmic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeConfig {
    pub grid_points: usize,
    pub spacing: GridSpacing,
    pub tol: f64,
    pub max_golden_iterations: usize,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            grid_points: 201,
            spacing: GridSpacing::Linear,
            tol: 1e-10,
            max_golden_iterations: 200,
        }
    }
}

/// Result of a scalar minimization. `value` is `PosInf` when the function is
/// `+inf` on every grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub value: Extended,
}

/// Minimizes `f` on `[lo, hi]` with the default configuration and tolerance `tol`.
pub fn minimize_scalar<F>(f: F, lo: f64, hi: f64, tol: f64) -> Minimum
where
    F: FnMut(f64) -> Extended,
{
    minimize_scalar_with(
        f,
        lo,
        hi,
        &MinimizeConfig {
            tol,
            ..MinimizeConfig::default()
        },
    )
}

fn grid(lo: f64, hi: f64, cfg: &MinimizeConfig) -> Vec<f64> {
    let m = cfg.grid_points.max(3);
    let mut pts: Vec<f64> = match cfg.spacing {
        GridSpacing::Linear => (0..m)
            .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
            .collect(),
        GridSpacing::Logarithmic => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..m)
                .map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp())
                .collect()
        }
    };
    pts[0] = lo;
    pts[m - 1] = hi;
    pts
}

/// Grid scan then golden-section search inside the bracket around the best
/// grid point. Ties resolve to the smallest argument. The returned value is
/// the best of every evaluated point, so a minimum sitting on an endpoint is
/// reported exactly.
pub fn minimize_scalar_with<F>(mut f: F, lo: f64, hi: f64, cfg: &MinimizeConfig) -> Minimum
where
    F: FnMut(f64) -> Extended,
{
    assert!(lo < hi, "minimize_scalar requires lo < hi (got {lo}, {hi})");
    if cfg.spacing == GridSpacing::Logarithmic {
        assert!(lo > 0.0, "logarithmic grid requires lo > 0");
    }
    let xs = grid(lo, hi, cfg);
    let values: Vec<Extended> = xs.iter().map(|&x| f(x)).collect();

    let mut best_i = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best_i] {
            best_i = i;
        }
    }
    if values[best_i].is_inf() {
        return Minimum {
            argmin: lo,
            value: PosInf,
        };
    }

    let mut best = Minimum {
        argmin: xs[best_i],
        value: values[best_i],
    };
    let consider = |x: f64, v: Extended, best: &mut Minimum| {
        if v < best.value || (v == best.value && x < best.argmin) {
            *best = Minimum { argmin: x, value: v };
        }
    };

    let mut a = xs[best_i.saturating_sub(1)];
    let mut b = xs[(best_i + 1).min(xs.len() - 1)];
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..cfg.max_golden_iterations {
        if (b - a).abs() <= cfg.tol * (1.0 + c.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    consider(c, fc, &mut best);
    consider(d, fd, &mut best);
    best
}
