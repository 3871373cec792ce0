//! Empirical large-deviation rates along a dimension schedule, compared with
//! the theoretical infimum over the event.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::estimate::{empirical_rate, estimate_interval_probability, Interval, DEFAULT_LEVEL};
use super::exact::{ln_exact_v1_interval_probability, ln_exact_v_interval_probability, oracle_quadrature};
use crate::error::{Error, Result};
use crate::extended::{Extended, Finite, PosInf};
use crate::io::write_atomic;
use crate::numerics::{minimize_scalar_with, MinimizeConfig};
use crate::rates::{RateConfig, RateName, RateQuery};
use crate::sampling::{Method, PExponent, Quantity, QuantityConfig, ScheduleRule};

/// Where the probabilities of a report come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    MonteCarlo,
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdpConfig {
    pub rate_name: RateName,
    pub p: Option<PExponent>,
    pub lambda: Option<f64>,
    pub interval: Interval,
    pub n_schedule: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
    pub use_exact_oracle: bool,
    /// Relative tolerance of the final-n verdict (absolute when the
    /// theoretical rate is 0).
    pub tolerance: f64,
    /// How `k` follows `n`; `None` picks [`default_rule`].
    pub rule: Option<ScheduleRule>,
    pub method: Method,
    pub level: f64,
}

impl LdpConfig {
    pub fn new(rate_name: RateName, p: Option<PExponent>, lambda: Option<f64>, interval: Interval) -> Self {
        LdpConfig {
            rate_name,
            p,
            lambda,
            interval,
            n_schedule: vec![100, 1000, 10_000],
            trials: 1_000_000,
            seed: 0,
            workers: 1,
            use_exact_oracle: false,
            tolerance: 0.05,
            rule: None,
            method: Method::Product,
            level: DEFAULT_LEVEL,
        }
    }

    fn validate(&self) -> Result<()> {
        RateQuery {
            name: self.rate_name,
            p: self.p,
            lambda: self.lambda,
            y: 0.0,
        }
        .validate()?;
        self.interval.validate()?;
        if self.n_schedule.is_empty() || self.n_schedule.iter().any(|&n| n < 2) {
            return Err(Error::domain("the n schedule needs at least one n >= 2"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !self.use_exact_oracle && self.trials == 0 {
            return Err(Error::domain("trials must be >= 1"));
        }
        Ok(())
    }
}

/// Proportional `k = ⌊λn⌋` inside `(0, 1)`; `⌈√n⌉` at `λ = 0` and
/// `n − ⌈√n⌉` at `λ = 1`.
pub fn default_rule(lambda: f64) -> ScheduleRule {
    if lambda <= 0.0 {
        ScheduleRule::Power { exponent: 0.5 }
    } else if lambda >= 1.0 {
        ScheduleRule::ComplementPower { exponent: 0.5 }
    } else {
        ScheduleRule::ProportionalFloor { lambda }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpRow {
    pub n: usize,
    pub k: Option<usize>,
    pub p_hat: f64,
    /// `ln P`; absent when the estimate is 0.
    pub ln_p: Option<f64>,
    pub ci: [f64; 2],
    pub hits: Option<u64>,
    pub trials: Option<u64>,
    pub speed_value: f64,
    pub empirical_rate: Option<f64>,
    /// Rates implied by the confidence bounds; the lower one is always finite.
    pub empirical_rate_bounds: (f64, Extended),
    pub theoretical_rate: Extended,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpReport {
    pub rate_name: RateName,
    pub p: Option<PExponent>,
    pub lambda: Option<f64>,
    pub interval: Interval,
    pub oracle: Oracle,
    pub rows: Vec<LdpRow>,
    pub verdict: bool,
    pub tolerance: f64,
    pub final_error: Option<f64>,
    pub warnings: Vec<String>,
}

impl LdpReport {
    pub fn validate(&self) -> Result<()> {
        self.interval.validate()?;
        for r in &self.rows {
            let consistent = r.ci[0] <= r.p_hat
                && r.p_hat <= r.ci[1]
                && (r.hits.is_some() == r.trials.is_some())
                && r.speed_value > 0.0
                && r.empirical_rate.is_some() == r.ln_p.is_some();
            if !consistent {
                return Err(Error::format(format!("inconsistent report row at n = {}", r.n)));
            }
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.validate()?;
        write_atomic(path, (serde_json::to_string_pretty(self)? + "\n").as_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let r: LdpReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        r.validate()?;
        Ok(r)
    }
}

/// The sampled quantity behind a rate, and whether it depends on `k`.
fn quantity_for(name: RateName) -> Quantity {
    match name {
        RateName::U => Quantity::FactorU,
        RateName::V => Quantity::FactorV,
        RateName::V1 => Quantity::FactorV1,
        RateName::W => Quantity::FactorW,
        RateName::Projection => Quantity::ScaledNorm,
        RateName::Z2Sum => Quantity::MeanZ2,
        RateName::GMean => Quantity::MeanG2,
        RateName::ZpMean => Quantity::MeanZp,
    }
}

/// Largest value the quantity can take, when bounded.
fn natural_upper(name: RateName, p: Option<PExponent>) -> Option<f64> {
    match name {
        RateName::U | RateName::V | RateName::V1 | RateName::W => Some(1.0),
        RateName::Projection if p.is_some_and(|p| p.as_f64() >= 2.0) => Some(1.0),
        _ => None,
    }
}

/// Infima of the rate over the closed interval and over its interior.
fn rate_infima(cfg: &LdpConfig) -> Result<(Extended, Extended)> {
    let rate_cfg = RateConfig::default();
    let eval = |y: f64| -> Result<Extended> {
        RateQuery {
            name: cfg.rate_name,
            p: cfg.p,
            lambda: cfg.lambda,
            y,
        }
        .evaluate_with(&rate_cfg)
    };
    let lo = cfg.interval.lo();
    // Rays are searched up to a finite point: every rate here grows past
    // its typical value.
    let top = match (cfg.interval.hi(), natural_upper(cfg.rate_name, cfg.p)) {
        (Finite(b), Some(u)) => b.min(u.max(lo)),
        (Finite(b), None) => b,
        (PosInf, Some(u)) => u.max(lo),
        (PosInf, None) => (2.0 * lo.abs()).max(lo + 10.0),
    };
    let search = |a: f64, b: f64| -> Result<Extended> {
        let mut failure = None;
        let mut f = |y: f64| match eval(y) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                PosInf
            }
        };
        let mut best = f(a).min(f(b));
        if a < b {
            best = best.min(minimize_scalar_with(&mut f, a, b, &MinimizeConfig::default()).value);
        }
        match failure {
            Some(e) => Err(e),
            None => Ok(best),
        }
    };
    let closure = search(lo, top)?;
    let shrink = 1e-6 * (top - lo).max(1e-12);
    let inner_top = if cfg.interval.hi().is_inf() && natural_upper(cfg.rate_name, cfg.p).is_none() {
        top
    } else {
        top - shrink
    };
    let interior = if lo + shrink < inner_top { search(lo + shrink, inner_top)? } else { closure };
    Ok((closure, interior))
}

/// `ln P` of the event from the exact oracles, when one applies.
fn exact_ln_probability(cfg: &LdpConfig, n: usize, k: usize) -> Result<f64> {
    let (a, b) = (cfg.interval.lo().max(0.0), cfg.interval.hi_f64());
    let q = oracle_quadrature();
    match cfg.rate_name {
        RateName::V => {
            if a >= 1.0 {
                return Ok(f64::NEG_INFINITY);
            }
            ln_exact_v_interval_probability(n, k, a, b.min(1.0))
        }
        RateName::V1 => ln_exact_v1_interval_probability(n, k, a, b, &q),
        RateName::Projection if cfg.p == Some(PExponent::Finite(2.0)) => {
            ln_exact_v1_interval_probability(n, k, a, b, &q)
        }
        _ => Err(Error::precondition(format!(
            "no exact oracle for {} (available for rate_V, rate_V1 and rate_projection at p = 2)",
            cfg.rate_name
        ))),
    }
}

/// Empirical rates for each `n` of the schedule and the convergence verdict.
pub fn run_ldp_convergence(cfg: &LdpConfig) -> Result<LdpReport> {
    cfg.validate()?;
    let lambda = cfg.lambda.unwrap_or(0.0);
    let rule = cfg.rule.unwrap_or_else(|| default_rule(lambda));
    let (theoretical, interior) = rate_infima(cfg)?;
    let mut warnings = Vec::new();
    if let (Finite(c), i) = (theoretical, interior) {
        if i > Finite(c + 1e-6 + 1e-3 * c) {
            warnings.push(format!(
                "the rate infimum over the interior ({i}) exceeds the one over the closure ({c}); \
                 the interval may not be a continuity set"
            ));
        }
    }
    let quantity = quantity_for(cfg.rate_name);
    let speed = cfg.rate_name.speed(cfg.p);
    let oracle = if cfg.use_exact_oracle { Oracle::Exact } else { Oracle::MonteCarlo };

    let mut rows = Vec::with_capacity(cfg.n_schedule.len());
    for &n in &cfg.n_schedule {
        let k = rule.k_for(n)?;
        let uses_k = quantity.needs_k() || cfg.rate_name == RateName::GMean;
        // The Gaussian mean is taken over k terms.
        let draw_n = if cfg.rate_name == RateName::GMean { k } else { n };
        let speed_value = speed.value(n, k);
        let row = match oracle {
            Oracle::Exact => {
                let ln_p = exact_ln_probability(cfg, n, k)?;
                let p_hat = ln_p.exp();
                let rate = (ln_p > f64::NEG_INFINITY).then(|| (-ln_p / speed_value).max(0.0));
                LdpRow {
                    n,
                    k: uses_k.then_some(k),
                    p_hat,
                    ln_p: rate.map(|_| ln_p),
                    ci: [p_hat, p_hat],
                    hits: None,
                    trials: None,
                    speed_value,
                    empirical_rate: rate,
                    empirical_rate_bounds: match rate {
                        Some(r) => (r, Finite(r)),
                        None => (f64::MAX, PosInf),
                    },
                    theoretical_rate: theoretical,
                }
            }
            Oracle::MonteCarlo => {
                let qcfg = QuantityConfig {
                    quantity,
                    n: draw_n,
                    k,
                    p: cfg.p.unwrap_or(PExponent::Finite(2.0)),
                    method: cfg.method,
                };
                let est = estimate_interval_probability(&qcfg, cfg.interval, cfg.trials, cfg.seed, cfg.workers, cfg.level)?;
                let er = empirical_rate(&est, speed_value)?;
                LdpRow {
                    n,
                    k: uses_k.then_some(k),
                    p_hat: est.p_hat,
                    ln_p: (est.hits > 0).then(|| est.p_hat.ln()),
                    ci: [est.ci_low, est.ci_high],
                    hits: Some(est.hits),
                    trials: Some(est.trials),
                    speed_value,
                    empirical_rate: er.rate,
                    empirical_rate_bounds: (er.lower, er.upper),
                    theoretical_rate: theoretical,
                }
            }
        };
        rows.push(row);
    }

    let (verdict, final_error) = judge(&rows, theoretical, cfg.tolerance);
    Ok(LdpReport {
        rate_name: cfg.rate_name,
        p: cfg.p,
        lambda: cfg.lambda,
        interval: cfg.interval,
        oracle,
        rows,
        verdict,
        tolerance: cfg.tolerance,
        final_error,
        warnings,
    })
}

/// Final-n error within tolerance, and `|empirical − theoretical|`
/// nonincreasing over the last three rows. The error is relative unless the
/// theoretical rate is 0.
fn judge(rows: &[LdpRow], theoretical: Extended, tolerance: f64) -> (bool, Option<f64>) {
    let Finite(theo) = theoretical else { return (false, None) };
    let gaps: Option<Vec<f64>> = rows.iter().map(|r| r.empirical_rate.map(|e| (e - theo).abs())).collect();
    let Some(gaps) = gaps else { return (false, None) };
    let last = *gaps.last().expect("schedule is non-empty");
    let error = if theo > 0.0 { last / theo } else { last };
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    let trending = tail.windows(2).all(|w| w[1] <= w[0]);
    (error <= tolerance && trending, Some(error))
}
