//! Named rate queries and tabulated rate curves.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functions::{
    rate_g_mean, rate_projection_with, rate_u, rate_v, rate_v1, rate_w_with, rate_z2_sum, rate_zp_mean,
    RateConfig,
};
use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::io::{sidecar_path, write_atomic};
use crate::sampling::PExponent;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RateName {
    #[serde(rename = "rate_U")]
    U,
    #[serde(rename = "rate_V")]
    V,
    #[serde(rename = "rate_V1")]
    V1,
    #[serde(rename = "rate_W")]
    W,
    #[serde(rename = "rate_projection")]
    Projection,
    #[serde(rename = "rate_Z2_sum")]
    Z2Sum,
    #[serde(rename = "rate_G_mean")]
    GMean,
    #[serde(rename = "rate_Zp_mean")]
    ZpMean,
}

impl RateName {
    pub const ALL: [RateName; 8] = [
        RateName::U,
        RateName::V,
        RateName::V1,
        RateName::W,
        RateName::Projection,
        RateName::Z2Sum,
        RateName::GMean,
        RateName::ZpMean,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RateName::U => "rate_U",
            RateName::V => "rate_V",
            RateName::V1 => "rate_V1",
            RateName::W => "rate_W",
            RateName::Projection => "rate_projection",
            RateName::Z2Sum => "rate_Z2_sum",
            RateName::GMean => "rate_G_mean",
            RateName::ZpMean => "rate_Zp_mean",
        }
    }

    pub fn needs_p(self) -> bool {
        matches!(self, RateName::W | RateName::Projection | RateName::Z2Sum | RateName::ZpMean)
    }

    pub fn needs_lambda(self) -> bool {
        matches!(self, RateName::V | RateName::V1 | RateName::Projection)
    }

    /// The speed at which the rate governs its sequence.
    pub fn speed(self, p: Option<PExponent>) -> Speed {
        let small_p = matches!(p, Some(PExponent::Finite(pv)) if pv < 2.0);
        match self {
            RateName::Projection | RateName::Z2Sum if small_p => Speed::NPowPHalf {
                exponent: p.map(|p| p.as_f64() / 2.0).unwrap_or(1.0),
            },
            RateName::GMean => Speed::KN,
            _ => Speed::N,
        }
    }
}

impl fmt::Display for RateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RateName::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown rate {s:?}")))
    }
}

/// Speed `s(n)` of a large deviation principle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Speed {
    N,
    #[serde(rename = "n_pow_p_half")]
    NPowPHalf { exponent: f64 },
    #[serde(rename = "k_n")]
    KN,
}

impl Speed {
    pub fn value(self, n: usize, k: usize) -> f64 {
        match self {
            Speed::N => n as f64,
            Speed::NPowPHalf { exponent } => (n as f64).powf(exponent),
            Speed::KN => k as f64,
        }
    }
}

/// A single rate evaluation request.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateQuery {
    pub name: RateName,
    pub p: Option<PExponent>,
    pub lambda: Option<f64>,
    pub y: f64,
}

impl RateQuery {
    pub fn validate(&self) -> Result<()> {
        if self.name.needs_p() != self.p.is_some() {
            return Err(Error::domain(format!(
                "{} {} p",
                self.name,
                if self.name.needs_p() { "requires" } else { "takes no" }
            )));
        }
        if self.name.needs_lambda() != self.lambda.is_some() {
            return Err(Error::domain(format!(
                "{} {} lambda",
                self.name,
                if self.name.needs_lambda() { "requires" } else { "takes no" }
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self) -> Result<Extended> {
        self.evaluate_with(&RateConfig::default())
    }

    pub fn evaluate_with(&self, cfg: &RateConfig) -> Result<Extended> {
        self.validate()?;
        let y = self.y;
        let p = self.p.unwrap_or(PExponent::Finite(2.0));
        let lambda = self.lambda.unwrap_or(0.0);
        match self.name {
            RateName::U => Ok(rate_u(y)),
            RateName::V => rate_v(lambda, y),
            RateName::V1 => rate_v1(lambda, y),
            RateName::W => rate_w_with(p, y, cfg),
            RateName::Projection => rate_projection_with(p, lambda, y, cfg),
            RateName::Z2Sum => rate_z2_sum(p, y),
            RateName::GMean => Ok(rate_g_mean(y)),
            RateName::ZpMean => rate_zp_mean(p, y),
        }
    }
}

/// Parameters and speed of a [`RateCurve`]; also its sidecar JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCurveMeta {
    pub name: RateName,
    pub p: Option<PExponent>,
    pub lambda: Option<f64>,
    pub speed: Speed,
}

/// A rate function tabulated on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCurve {
    pub meta: RateCurveMeta,
    pub grid: Vec<(f64, Extended)>,
}

/// `count` equally spaced points from `lo` to `hi`, both included.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("grid needs finite bounds and at least one point"));
    }
    if count == 1 {
        return if lo == hi {
            Ok(vec![lo])
        } else {
            Err(Error::domain("a one-point grid needs lo == hi"))
        };
    }
    if !(lo < hi) {
        return Err(Error::domain(format!("grid needs lo < hi, got {lo}:{hi}")));
    }
    let step = (hi - lo) / (count - 1) as f64;
    let mut g: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    g[count - 1] = hi;
    Ok(g)
}

impl RateCurve {
    /// Evaluates the rate on `ys` (in parallel on the current rayon pool).
    pub fn compute(
        name: RateName,
        p: Option<PExponent>,
        lambda: Option<f64>,
        ys: &[f64],
        cfg: &RateConfig,
    ) -> Result<Self> {
        if ys.is_empty() || ys.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("rate grid must be non-empty and strictly increasing"));
        }
        let values: Vec<Extended> = ys
            .par_iter()
            .map(|&y| RateQuery { name, p, lambda, y }.evaluate_with(cfg))
            .collect::<Result<_>>()?;
        Ok(RateCurve {
            meta: RateCurveMeta {
                name,
                p,
                lambda,
                speed: name.speed(p),
            },
            grid: ys.iter().copied().zip(values).collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::format("rate curve is empty"));
        }
        if self.grid.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::format("rate curve grid is not strictly increasing"));
        }
        if self.grid.iter().any(|(_, v)| matches!(v, Extended::Finite(x) if !(*x >= 0.0))) {
            return Err(Error::format("rate values must be nonnegative or inf"));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,value\n");
        for (y, v) in &self.grid {
            s.push_str(&format!("{y},{v}\n"));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Vec<(f64, Extended)>> {
        let mut lines = text.lines();
        if lines.next() != Some("y,value") {
            return Err(Error::format("expected header `y,value`"));
        }
        lines
            .enumerate()
            .map(|(i, line)| {
                let (y, v) = line
                    .split_once(',')
                    .ok_or_else(|| Error::format(format!("line {}: expected two columns", i + 2)))?;
                let y = y
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::format(format!("line {}: {e}", i + 2)))?;
                let v = v
                    .trim()
                    .parse::<Extended>()
                    .map_err(|e| Error::format(format!("line {}: {e}", i + 2)))?;
                Ok((y, v))
            })
            .collect()
    }

    /// Writes `y,value` CSV to `path` and the metadata to `<path>.json`.
    pub fn write(&self, path: &Path) -> Result<()> {
        self.validate()?;
        write_atomic(path, self.to_csv().as_bytes())?;
        let meta = serde_json::to_string_pretty(&self.meta)? + "\n";
        write_atomic(&sidecar_path(path), meta.as_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let grid = Self::parse_csv(&std::fs::read_to_string(path)?)?;
        let meta = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
        let curve = RateCurve { meta, grid };
        curve.validate()?;
        Ok(curve)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended::{Finite, PosInf};

    #[test]
    fn grid_syntax() {
        let g = linear_grid(0.01, 0.99, 99).unwrap();
        assert_eq!(g.len(), 99);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[98], 0.99);
        assert!((g[49] - 0.5).abs() < 1e-15);
        assert!(linear_grid(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn query_validation() {
        let q = RateQuery {
            name: RateName::V,
            p: None,
            lambda: None,
            y: 0.5,
        };
        assert!(q.evaluate().is_err());
        let q = RateQuery { lambda: Some(1.0), ..q };
        assert!((q.evaluate().unwrap().to_f64() - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn speeds() {
        assert_eq!(RateName::Projection.speed(Some(PExponent::Finite(3.0))), Speed::N);
        assert_eq!(
            RateName::Projection.speed(Some(PExponent::Finite(1.0))),
            Speed::NPowPHalf { exponent: 0.5 }
        );
        assert_eq!(Speed::NPowPHalf { exponent: 0.5 }.value(100, 50), 10.0);
    }

    #[test]
    fn euclidean_w_curve_round_trip() {
        let ys = linear_grid(0.5, 1.5, 11).unwrap();
        let curve = RateCurve::compute(RateName::W, Some(PExponent::Finite(2.0)), None, &ys, &RateConfig::default())
            .unwrap();
        for (y, v) in &curve.grid {
            if (*y - 1.0).abs() < 1e-12 {
                assert_eq!(*v, Finite(0.0));
            } else {
                assert_eq!(*v, PosInf);
            }
        }
        let csv = curve.to_csv();
        assert!(csv.contains("1,0\n") && csv.contains(",inf\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        curve.write(&path).unwrap();
        assert_eq!(RateCurve::read(&path).unwrap(), curve);
    }
}
