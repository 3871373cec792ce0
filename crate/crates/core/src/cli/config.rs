//! Command parameters as parsed from flags and JSON config files.
//!
//! Every parameter struct doubles as a clap argument group and as the
//! `parameters` object of a config file. Flags given on the command line
//! replace the file's values key by key.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{linear_grid, RateConfig, RateName};
use crate::sampling::{Method, PExponent, Quantity, ScheduleRule};
use crate::verify::{BracketKind, Interval};

/// `lo:hi:count`, both ends included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn linear(&self) -> Result<Vec<f64>> {
        linear_grid(self.lo, self.hi, self.count)
    }

    /// Geometric spacing; needs `0 < lo`.
    pub fn logarithmic(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0) {
            return Err(Error::Domain(format!("a log grid needs lo > 0, got {}", self.lo)));
        }
        let mut g: Vec<f64> = linear_grid(self.lo.ln(), self.hi.ln(), self.count)?
            .into_iter()
            .map(f64::exp)
            .collect();
        g[0] = self.lo;
        *g.last_mut().expect("non-empty grid") = self.hi;
        Ok(g)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("grid {s:?} is not of the form lo:hi:count"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [lo, hi, count] = parts[..] else {
            return Err(bad());
        };
        Ok(GridSpec {
            lo: lo.parse().map_err(|_| bad())?,
            hi: hi.parse().map_err(|_| bad())?,
            count: count.parse().map_err(|_| bad())?,
        })
    }
}

impl TryFrom<String> for GridSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> String {
        format!("{}:{}:{}", g.lo, g.hi, g.count)
    }
}

/// A `(k, t)` point of the Gaussian-integral bracket, written `k:t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BracketPoint {
    pub k: u32,
    pub t: f64,
}

impl FromStr for BracketPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("bracket point {s:?} is not of the form k:t"));
        let (k, t) = s.split_once(':').ok_or_else(bad)?;
        Ok(BracketPoint {
            k: k.trim().parse().map_err(|_| bad())?,
            t: t.trim().parse().map_err(|_| bad())?,
        })
    }
}

impl TryFrom<String> for BracketPoint {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BracketPoint> for String {
    fn from(p: BracketPoint) -> String {
        format!("{}:{}", p.k, p.t)
    }
}

/// What the `oracle` command evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleWhat {
    /// `m_p` next to its two closed-form candidates.
    #[serde(rename = "m_p")]
    MomentM,
    /// `P(V ∈ [a, b])` from the Beta law.
    #[serde(rename = "v")]
    V,
    /// `P(U^{1/n} V ∈ [a, b])` by quadrature.
    #[serde(rename = "v1")]
    V1,
}

impl FromStr for OracleWhat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m_p" => Ok(OracleWhat::MomentM),
            "v" => Ok(OracleWhat::V),
            "v1" => Ok(OracleWhat::V1),
            other => Err(Error::Domain(format!("unknown oracle {other:?} (m_p|v|v1)"))),
        }
    }
}

impl fmt::Display for OracleWhat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleWhat::MomentM => "m_p",
            OracleWhat::V => "v",
            OracleWhat::V1 => "v1",
        })
    }
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleParams {
    /// Ambient dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Subspace dimension (for scaled_norm, factor_V and factor_V1).
    #[arg(long)]
    pub k: Option<usize>,
    /// Exponent p >= 1 or "inf".
    #[arg(long)]
    pub p: Option<PExponent>,
    /// direct or product (scaled_norm only).
    #[arg(long)]
    pub method: Option<Method>,
    /// scaled_norm (default), factor_U, factor_V, factor_V1, factor_W, mean_Z2, mean_Zp or mean_G2.
    #[arg(long)]
    pub quantity: Option<Quantity>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV; metadata goes to `<out>.json`. Prints to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateParams {
    /// rate_U, rate_V, rate_V1, rate_W, rate_projection, rate_Z2_sum, rate_G_mean or rate_Zp_mean.
    #[arg(long)]
    pub name: Option<RateName>,
    #[arg(long)]
    pub p: Option<PExponent>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Evaluation points as lo:hi:count.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Search settings of the nested infima (config file only).
    #[arg(skip)]
    pub rate_config: Option<RateConfig>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyLdpParams {
    #[arg(long)]
    pub rate: Option<RateName>,
    #[arg(long)]
    pub p: Option<PExponent>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Event as a:b, with b possibly "inf".
    #[arg(long)]
    pub interval: Option<Interval>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    pub n_schedule: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Use the exact oracle instead of Monte Carlo.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exact: Option<bool>,
    /// Relative tolerance of the final-n verdict.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub method: Option<Method>,
    /// Confidence level of the Clopper–Pearson bounds.
    #[arg(long)]
    pub level: Option<f64>,
    /// How k follows n (config file only).
    #[arg(skip)]
    pub rule: Option<ScheduleRule>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyRepresentationParams {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<PExponent>,
    /// Draws per method.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Significance level of the KS test.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleParams {
    /// m_p, v or v1.
    #[arg(long)]
    pub what: Option<OracleWhat>,
    #[arg(long)]
    pub p: Option<PExponent>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub interval: Option<Interval>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckBoundsParams {
    /// z2_tail (default) or gaussian_integral.
    #[arg(long)]
    pub kind: Option<BracketKind>,
    #[arg(long)]
    pub p: Option<PExponent>,
    /// Tail thresholds as lo:hi:count.
    #[arg(long)]
    pub t_grid: Option<GridSpec>,
    /// Space the thresholds geometrically.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log_grid: Option<bool>,
    /// Comma-separated k:t pairs.
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<BracketPoint>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A command with its parameters. In a config file:
/// `{"command": "rate", "parameters": {"name": "rate_U", "grid": "0.1:1:10"}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RunConfig {
    Sample(SampleParams),
    Rate(RateParams),
    VerifyLdp(VerifyLdpParams),
    VerifyRepresentation(VerifyRepresentationParams),
    Oracle(OracleParams),
    CheckBounds(CheckBoundsParams),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::Sample(_) => "sample",
            RunConfig::Rate(_) => "rate",
            RunConfig::VerifyLdp(_) => "verify-ldp",
            RunConfig::VerifyRepresentation(_) => "verify-representation",
            RunConfig::Oracle(_) => "oracle",
            RunConfig::CheckBounds(_) => "check-bounds",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        let g: GridSpec = "0.01:0.99:99".parse().unwrap();
        assert_eq!(g.linear().unwrap().len(), 99);
        let l: GridSpec = "1:1000:4".parse().unwrap();
        let pts = l.logarithmic().unwrap();
        assert_eq!(pts[0], 1.0);
        assert_eq!(pts[3], 1000.0);
        assert!((pts[1] - 10.0).abs() < 1e-12);
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("0:1:3".parse::<GridSpec>().unwrap().logarithmic().is_err());
    }

    #[test]
    fn config_json_shape() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"command": "verify-ldp", "parameters": {"rate": "rate_V", "interval": [0.6, 1.0], "n_schedule": [100, 1000]}}"#,
        )
        .unwrap();
        let RunConfig::VerifyLdp(p) = cfg else { panic!() };
        assert_eq!(p.n_schedule, Some(vec![100, 1000]));
        let err = serde_json::from_str::<RunConfig>(r#"{"command": "rate", "parameters": {"nmae": "rate_U"}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("nmae"), "{err}");
    }
}
