//! Monte Carlo interval probabilities with exact binomial confidence bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::{Extended, Finite, PosInf};
use crate::numerics::inverse_regularized_incomplete_beta;
use crate::sampling::{count_hits, PExponent, QuantityConfig};

/// Default confidence level of all interval estimates.
pub const DEFAULT_LEVEL: f64 = 0.99;

/// A closed interval `[lo, hi]`; `hi` may be `+inf`. Serializes as `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval(pub f64, pub Extended);

impl Interval {
    pub fn new(lo: f64, hi: Extended) -> Result<Self> {
        let i = Interval(lo, hi);
        i.validate()?;
        Ok(i)
    }

    pub fn lo(&self) -> f64 {
        self.0
    }

    pub fn hi(&self) -> Extended {
        self.1
    }

    /// `hi` as an `f64` (`+inf` for an unbounded ray).
    pub fn hi_f64(&self) -> f64 {
        self.1.to_f64()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.0.is_finite()
            && match self.1 {
                Finite(b) => b.is_finite() && self.0 < b,
                PosInf => true,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("interval [{}, {}] is degenerate", self.0, self.1)))
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.0 && Finite(v) <= self.1
    }
}

/// Parses `a:b` with `b` possibly `inf`.
impl std::str::FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::domain(format!("interval {s:?} is not of the form a:b")))?;
        let a = a
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::domain(format!("interval start {a:?}: {e}")))?;
        let b = b
            .trim()
            .parse::<Extended>()
            .map_err(|e| Error::domain(format!("interval end {b:?}: {e}")))?;
        Interval::new(a, b)
    }
}

/// Clopper–Pearson bounds for `hits` successes in `trials` at `level`.
///
/// At `hits = 0` the lower bound is 0 and the upper one is the one-sided
/// `1 − (α/2)^{1/trials}`; symmetrically at `hits = trials`.
pub fn clopper_pearson(hits: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || hits > trials {
        return Err(Error::domain(format!("need 0 <= hits <= trials, trials >= 1; got {hits}/{trials}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("confidence level must lie in (0,1), got {level}")));
    }
    let half = 0.5 * (1.0 - level);
    let (h, n) = (hits as f64, trials as f64);
    let lo = match hits {
        0 => 0.0,
        _ if hits == trials => half.powf(1.0 / n),
        _ => inverse_regularized_incomplete_beta(half, h, n - h + 1.0)?,
    };
    let hi = match hits {
        _ if hits == trials => 1.0,
        0 => -(half.ln() / n).exp_m1(),
        _ => inverse_regularized_incomplete_beta(1.0 - half, h + 1.0, n - h)?,
    };
    Ok((lo, hi))
}

/// A Monte Carlo estimate of `P(quantity ∈ interval)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailEstimate {
    pub interval: Interval,
    pub n: usize,
    pub k: Option<usize>,
    pub p: PExponent,
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
}

impl TailEstimate {
    pub fn from_counts(
        interval: Interval,
        n: usize,
        k: Option<usize>,
        p: PExponent,
        hits: u64,
        trials: u64,
        level: f64,
    ) -> Result<Self> {
        let (ci_low, ci_high) = clopper_pearson(hits, trials, level)?;
        let p_hat = hits as f64 / trials as f64;
        Ok(TailEstimate {
            interval,
            n,
            k,
            p,
            hits,
            trials,
            p_hat,
            // Quantile bisection can land a hair inside p_hat.
            ci_low: ci_low.min(p_hat),
            ci_high: ci_high.max(p_hat),
            level,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.hits <= self.trials
            && self.trials > 0
            && self.p_hat == self.hits as f64 / self.trials as f64
            && self.ci_low <= self.p_hat
            && self.p_hat <= self.ci_high;
        if ok {
            Ok(())
        } else {
            Err(Error::format("inconsistent tail estimate"))
        }
    }
}

/// Draws `trials` realizations of `cfg` and counts those in `interval`.
pub fn estimate_interval_probability(
    cfg: &QuantityConfig,
    interval: Interval,
    trials: usize,
    seed: u64,
    workers: usize,
    level: f64,
) -> Result<TailEstimate> {
    interval.validate()?;
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let hits = count_hits(cfg, seed, trials, interval.lo(), interval.hi_f64(), workers)?;
    let k = cfg.quantity.needs_k().then_some(cfg.k);
    TailEstimate::from_counts(interval, cfg.n, k, cfg.p, hits, trials as u64, level)
}

/// `−log(p̂)/s` together with the rate interval implied by the confidence
/// bounds. `rate` is absent when nothing was hit; `lower` is always finite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRate {
    pub rate: Option<f64>,
    pub lower: f64,
    pub upper: Extended,
}

pub fn empirical_rate(est: &TailEstimate, speed_value: f64) -> Result<EmpiricalRate> {
    if !(speed_value > 0.0) {
        return Err(Error::domain(format!("speed must be positive, got {speed_value}")));
    }
    let rate_of = |q: f64| (-q.ln() / speed_value).max(0.0);
    Ok(EmpiricalRate {
        rate: (est.hits > 0).then(|| rate_of(est.p_hat)),
        lower: rate_of(est.ci_high),
        upper: if est.ci_low > 0.0 { Finite(rate_of(est.ci_low)) } else { PosInf },
    })
}

/// Rate from an exactly known `ln P`.
pub fn rate_from_ln_probability(ln_p: f64, speed_value: f64) -> Option<f64> {
    (ln_p > f64::NEG_INFINITY).then(|| (-ln_p / speed_value).max(0.0))
}
