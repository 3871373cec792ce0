//! Checks of the analytic tail brackets against quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{gaussian_tail_integral_bound, ln_z2_tail_probability, tail_bounds_z2};
use crate::sampling::PExponent;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketKind {
    /// `c₁(t) e^{−b(t) t^{p/2}} ≤ P(Z² ≥ t) ≤ 2 e^{−b(t) t^{p/2}}`.
    Z2Tail,
    /// `t^{k−1} e^{−t²/2} ≤ ∫_t^∞ r^k e^{−r²/2} dr ≤ 2 t^{k−1} e^{−t²/2}`.
    GaussianIntegral,
}

impl std::str::FromStr for BracketKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z2_tail" => Ok(BracketKind::Z2Tail),
            "gaussian_integral" => Ok(BracketKind::GaussianIntegral),
            other => Err(Error::domain(format!("unknown bracket {other:?} (z2_tail|gaussian_integral)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketRow {
    /// `p` for [`BracketKind::Z2Tail`], `k` for [`BracketKind::GaussianIntegral`].
    pub parameter: f64,
    pub t: f64,
    pub lower: f64,
    pub exact: f64,
    pub upper: f64,
    pub inside: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub kind: BracketKind,
    pub rows: Vec<BracketRow>,
    pub violations: usize,
}

impl BracketReport {
    fn from_rows(kind: BracketKind, rows: Vec<BracketRow>) -> Self {
        let violations = rows.iter().filter(|r| !r.inside).count();
        BracketReport { kind, rows, violations }
    }

    pub fn all_inside(&self) -> bool {
        self.violations == 0
    }
}

/// The `Z²` tail bracket for `1 ≤ p < 2` at every `t` of the grid.
pub fn check_tail_bracket(p: PExponent, t_grid: &[f64]) -> Result<BracketReport> {
    let rows = t_grid
        .iter()
        .map(|&t| {
            let b = tail_bounds_z2(p, t)?;
            let exact = ln_z2_tail_probability(p, t)?.exp();
            Ok(BracketRow {
                parameter: b.p,
                t,
                lower: b.lower,
                exact,
                upper: b.upper,
                inside: b.contains(exact),
            })
        })
        .collect::<Result<_>>()?;
    Ok(BracketReport::from_rows(BracketKind::Z2Tail, rows))
}

/// The Gaussian-integral bracket at each `(k, t)`.
pub fn check_gaussian_bracket(points: &[(u32, f64)]) -> Result<BracketReport> {
    let rows = points
        .iter()
        .map(|&(k, t)| {
            let b = gaussian_tail_integral_bound(k, t)?;
            Ok(BracketRow {
                parameter: k as f64,
                t,
                lower: b.lower,
                exact: b.exact,
                upper: b.upper,
                inside: b.contains_exact(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(BracketReport::from_rows(BracketKind::GaussianIntegral, rows))
}
