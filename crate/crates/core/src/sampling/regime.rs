use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the subspace dimension `k` follows the ambient dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleRule {
    /// `k = max(1, min(n−1, ⌊λn⌋))`.
    ProportionalFloor { lambda: f64 },
    /// Fixed `k` (clamped into `[1, n−1]`); limit proportion 0.
    Constant { k: usize },
    /// `k = ⌈n^exponent⌉` with `exponent < 1`; limit proportion 0.
    Power { exponent: f64 },
    /// `k = n − ⌈n^exponent⌉` with `exponent < 1`; limit proportion 1.
    ComplementPower { exponent: f64 },
}

impl ScheduleRule {
    /// The limit `λ = lim k_n / n` implied by the rule.
    pub fn lambda(&self) -> f64 {
        match *self {
            ScheduleRule::ProportionalFloor { lambda } => lambda,
            ScheduleRule::Constant { .. } | ScheduleRule::Power { .. } => 0.0,
            ScheduleRule::ComplementPower { .. } => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ScheduleRule::ProportionalFloor { lambda } if !(0.0..=1.0).contains(&lambda) => {
                Err(Error::domain(format!("lambda must lie in [0,1], got {lambda}")))
            }
            ScheduleRule::Power { exponent } | ScheduleRule::ComplementPower { exponent }
                if !(0.0..1.0).contains(&exponent) =>
            {
                Err(Error::domain(format!("power exponent must lie in [0,1), got {exponent}")))
            }
            ScheduleRule::Constant { k } if k == 0 => Err(Error::domain("constant k must be >= 1")),
            _ => Ok(()),
        }
    }

    /// `k_n` for ambient dimension `n ≥ 2`.
    pub fn k_for(&self, n: usize) -> Result<usize> {
        self.validate()?;
        if n < 2 {
            return Err(Error::domain(format!("ambient dimension must be >= 2, got {n}")));
        }
        let raw = match *self {
            ScheduleRule::ProportionalFloor { lambda } => (lambda * n as f64).floor() as usize,
            ScheduleRule::Constant { k } => k,
            ScheduleRule::Power { exponent } => (n as f64).powf(exponent).ceil() as usize,
            ScheduleRule::ComplementPower { exponent } => {
                n.saturating_sub((n as f64).powf(exponent).ceil() as usize)
            }
        };
        Ok(raw.clamp(1, n - 1))
    }
}

/// A dimension pair `(n, k)` with its limit proportion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub rule: ScheduleRule,
}

impl Regime {
    pub fn from_rule(n: usize, rule: ScheduleRule) -> Result<Self> {
        let k = rule.k_for(n)?;
        Ok(Regime {
            n,
            k,
            lambda: rule.lambda(),
            rule,
        })
    }
}

/// Checks `1 ≤ k ≤ n−1`.
pub fn check_dimensions(n: usize, k: usize) -> Result<()> {
    if n < 2 || k < 1 || k > n - 1 {
        return Err(Error::precondition(format!("need 1 <= k <= n-1, got n={n}, k={k}")));
    }
    Ok(())
}
