//! Direct versus product sampling of the scaled projection norm.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ks::{ks_two_sample, KsResult};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::sampling::{check_dimensions, generate_values, Method, PExponent, QuantityConfig};

/// Default significance level of the representation test.
pub const DEFAULT_ALPHA: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationReport {
    pub n: usize,
    pub k: usize,
    pub p: PExponent,
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
    pub ks: KsResult,
    pub passed: bool,
}

impl RepresentationReport {
    pub fn validate(&self) -> Result<()> {
        let ks = &self.ks;
        let ok = (0.0..=1.0).contains(&ks.statistic)
            && (0.0..=1.0).contains(&ks.p_value)
            && ks.n1 == self.trials
            && ks.n2 == self.trials
            && self.passed == ks.passes(self.alpha);
        if ok {
            Ok(())
        } else {
            Err(Error::format("inconsistent representation report"))
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.validate()?;
        write_atomic(path, (serde_json::to_string_pretty(self)? + "\n").as_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let r: RepresentationReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        r.validate()?;
        Ok(r)
    }
}

/// Two-sample KS test between `trials` direct and `trials` product draws.
///
/// Both batches use `seed`: the direct sampler reads the main chunk streams
/// and the product sampler only tagged substreams, so they never share
/// random numbers.
pub fn check_representation(
    n: usize,
    k: usize,
    p: PExponent,
    trials: usize,
    seed: u64,
    workers: usize,
    alpha: f64,
) -> Result<RepresentationReport> {
    check_dimensions(n, k)?;
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let direct = generate_values(&QuantityConfig::scaled_norm(n, k, p, Method::Direct), seed, trials, workers)?;
    let product = generate_values(&QuantityConfig::scaled_norm(n, k, p, Method::Product), seed, trials, workers)?;
    let ks = ks_two_sample(&direct, &product)?;
    Ok(RepresentationReport {
        n,
        k,
        p,
        trials,
        seed,
        alpha,
        ks,
        passed: ks.passes(alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cell_passes_and_round_trips() {
        let r = check_representation(8, 3, PExponent::Finite(1.5), 20_000, 5, 1, DEFAULT_ALPHA).unwrap();
        assert!(r.passed, "{r:?}");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ks.json");
        r.write(&path).unwrap();
        assert_eq!(RepresentationReport::read(&path).unwrap(), r);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(check_representation(8, 8, PExponent::Finite(2.0), 10, 0, 1, 0.01).is_err());
        assert!(check_representation(8, 3, PExponent::Finite(2.0), 0, 0, 1, 0.01).is_err());
        assert!(check_representation(8, 3, PExponent::Finite(2.0), 10, 0, 1, 0.0).is_err());
    }
}
