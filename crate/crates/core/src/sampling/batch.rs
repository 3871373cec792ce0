//! Chunked, reproducible batch generation and the `SampleBatch` artifact.
//!
//! A batch of `count` draws is split into chunks of [`CHUNK_SIZE`]; chunk `i`
//! draws from `RngStream { seed, stream_index: i }` and chunks are
//! concatenated in index order, so the output does not depend on how many
//! worker threads ran them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pexp::PExponent;
use super::regime::check_dimensions;
use super::rng::RngStream;
use super::samplers::{
    factor_v_fast, sample_factor_u, sample_uniform_ball, HaarProjector, Method, PGaussian, WSampler,
};
use crate::error::{Error, Result};
use crate::io::{sidecar_path, write_atomic};

/// Draws per chunk (and per RNG stream).
pub const CHUNK_SIZE: usize = 8192;

/// The scalar being sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "scaled_norm")]
    ScaledNorm,
    #[serde(rename = "factor_U")]
    FactorU,
    #[serde(rename = "factor_V")]
    FactorV,
    #[serde(rename = "factor_V1")]
    FactorV1,
    #[serde(rename = "factor_W")]
    FactorW,
    #[serde(rename = "mean_Z2")]
    MeanZ2,
    #[serde(rename = "mean_Zp")]
    MeanZp,
    #[serde(rename = "mean_G2")]
    MeanG2,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::ScaledNorm,
        Quantity::FactorU,
        Quantity::FactorV,
        Quantity::FactorV1,
        Quantity::FactorW,
        Quantity::MeanZ2,
        Quantity::MeanZp,
        Quantity::MeanG2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::ScaledNorm => "scaled_norm",
            Quantity::FactorU => "factor_U",
            Quantity::FactorV => "factor_V",
            Quantity::FactorV1 => "factor_V1",
            Quantity::FactorW => "factor_W",
            Quantity::MeanZ2 => "mean_Z2",
            Quantity::MeanZp => "mean_Zp",
            Quantity::MeanG2 => "mean_G2",
        }
    }

    /// Whether the quantity depends on the subspace dimension `k`.
    pub fn needs_k(self) -> bool {
        matches!(self, Quantity::ScaledNorm | Quantity::FactorV | Quantity::FactorV1)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown quantity {s:?}")))
    }
}

/// Everything needed to draw one realization of a quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantityConfig {
    pub quantity: Quantity,
    pub n: usize,
    pub k: usize,
    pub p: PExponent,
    pub method: Method,
}

impl QuantityConfig {
    pub fn scaled_norm(n: usize, k: usize, p: PExponent, method: Method) -> Self {
        QuantityConfig {
            quantity: Quantity::ScaledNorm,
            n,
            k,
            p,
            method,
        }
    }

    /// A quantity with no `p` or method dependence (e.g. `factor_V`).
    pub fn gaussian(quantity: Quantity, n: usize, k: usize) -> Self {
        QuantityConfig {
            quantity,
            n,
            k,
            p: PExponent::Finite(2.0),
            method: Method::Product,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::precondition("n must be >= 1"));
        }
        if self.quantity.needs_k() {
            check_dimensions(self.n, self.k)?;
        }
        if matches!(self.quantity, Quantity::MeanZ2 | Quantity::MeanZp) {
            self.p.require_finite()?;
        }
        Ok(())
    }
}

/// Per-worker sampler state for one [`QuantityConfig`].
///
/// Product-form quantities draw each factor from its own substream so the
/// factors are independent by construction.
pub struct QuantitySampler {
    cfg: QuantityConfig,
    p_gauss: Option<PGaussian>,
    w: Option<WSampler>,
    haar: Option<HaarProjector>,
}

impl QuantitySampler {
    pub fn new(cfg: QuantityConfig) -> Result<Self> {
        cfg.validate()?;
        let p_gauss = match cfg.p {
            PExponent::Finite(p) => Some(PGaussian::new(p)?),
            PExponent::Infinity => None,
        };
        let w = if matches!(cfg.quantity, Quantity::FactorW | Quantity::ScaledNorm) {
            Some(WSampler::new(cfg.n, cfg.p)?)
        } else {
            None
        };
        let haar = if cfg.quantity == Quantity::ScaledNorm && cfg.method == Method::Direct {
            Some(HaarProjector::new(cfg.n, cfg.k)?)
        } else {
            None
        };
        Ok(QuantitySampler {
            cfg,
            p_gauss,
            w,
            haar,
        })
    }

    pub fn config(&self) -> &QuantityConfig {
        &self.cfg
    }

    /// Fills `out` with draws from `stream`.
    pub fn fill(&mut self, stream: RngStream, out: &mut [f64]) -> Result<()> {
        let QuantityConfig { quantity, n, k, p, method } = self.cfg;
        let mut main = stream.rng();
        match quantity {
            Quantity::FactorU => out.iter_mut().for_each(|v| *v = sample_factor_u(n, &mut main)),
            Quantity::FactorV => out.iter_mut().for_each(|v| *v = factor_v_fast(n, k, &mut main)),
            Quantity::FactorW => {
                let w = self.w.as_ref().expect("W sampler");
                out.iter_mut().for_each(|v| *v = w.sample(&mut main));
            }
            Quantity::FactorV1 => {
                let mut ru = stream.substream(0).rng();
                let mut rv = stream.substream(2).rng();
                for v in out.iter_mut() {
                    *v = sample_factor_u(n, &mut ru) * factor_v_fast(n, k, &mut rv);
                }
            }
            Quantity::ScaledNorm => match method {
                Method::Product => {
                    let w = self.w.as_ref().expect("W sampler");
                    let mut ru = stream.substream(0).rng();
                    let mut rw = stream.substream(1).rng();
                    let mut rv = stream.substream(2).rng();
                    for v in out.iter_mut() {
                        let wv = w.sample(&mut rw) * factor_v_fast(n, k, &mut rv);
                        *v = match p {
                            PExponent::Finite(_) => sample_factor_u(n, &mut ru) * wv,
                            PExponent::Infinity => wv,
                        };
                    }
                }
                Method::Direct => {
                    let haar = self.haar.as_mut().expect("Haar projector");
                    let scale = p.scale(n);
                    for v in out.iter_mut() {
                        let x = sample_uniform_ball(n, p, &mut main)?;
                        *v = scale * haar.project_norm(&x, &mut main)?;
                    }
                }
            },
            Quantity::MeanG2 => {
                for v in out.iter_mut() {
                    *v = mean_of(n, &mut main, |r| {
                        let g: f64 = r.sample(rand_distr::StandardNormal);
                        g * g
                    });
                }
            }
            Quantity::MeanZ2 | Quantity::MeanZp => {
                let dist = self.p_gauss.as_ref().expect("finite p");
                let exponent = if quantity == Quantity::MeanZ2 { 2.0 } else { dist.p() };
                for v in out.iter_mut() {
                    *v = mean_of(n, &mut main, |r| {
                        super::samplers::abs_pow(dist.sample_abs(r), exponent)
                    });
                }
            }
        }
        Ok(())
    }
}

fn mean_of<R: Rng, F: FnMut(&mut R) -> f64>(n: usize, rng: &mut R, mut f: F) -> f64 {
    let mut s = 0.0;
    for _ in 0..n {
        s += f(rng);
    }
    s / n as f64
}

fn chunk_lengths(count: usize) -> Vec<usize> {
    let full = count / CHUNK_SIZE;
    let mut lens = vec![CHUNK_SIZE; full];
    if count % CHUNK_SIZE != 0 {
        lens.push(count % CHUNK_SIZE);
    }
    lens
}

/// Runs `job` over chunk indices on a pool of `workers` threads, returning
/// results in chunk order.
fn run_chunks<T, F>(chunks: usize, workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if workers <= 1 || chunks <= 1 {
        return (0..chunks).map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::precondition(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..chunks).into_par_iter().map(job).collect())
}

/// `count` draws of the configured quantity.
pub fn generate_values(cfg: &QuantityConfig, seed: u64, count: usize, workers: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    let lens = chunk_lengths(count);
    let chunks = run_chunks(lens.len(), workers, |i| {
        let mut sampler = QuantitySampler::new(*cfg)?;
        let mut buf = vec![0.0; lens[i]];
        sampler.fill(RngStream::new(seed, i as u64), &mut buf)?;
        Ok(buf)
    })?;
    Ok(chunks.concat())
}

/// Number of the `trials` draws falling in `[lo, hi]`, without storing them.
///
/// Uses the same chunk streams as [`generate_values`], so it counts exactly
/// the hits of the batch that call would produce.
pub fn count_hits(cfg: &QuantityConfig, seed: u64, trials: usize, lo: f64, hi: f64, workers: usize) -> Result<u64> {
    cfg.validate()?;
    let lens = chunk_lengths(trials);
    let counts = run_chunks(lens.len(), workers, |i| {
        let mut sampler = QuantitySampler::new(*cfg)?;
        let mut buf = vec![0.0; lens[i]];
        sampler.fill(RngStream::new(seed, i as u64), &mut buf)?;
        Ok(buf.iter().filter(|&&v| v >= lo && v <= hi).count() as u64)
    })?;
    Ok(counts.into_iter().sum())
}

/// Sidecar metadata of a [`SampleBatch`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleMetadata {
    pub n: usize,
    pub k: Option<usize>,
    pub p: PExponent,
    pub method: Option<Method>,
    pub quantity: Quantity,
    pub seed: u64,
    pub count: usize,
}

/// Realizations of a quantity together with how they were produced.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub meta: SampleMetadata,
}

impl SampleBatch {
    /// Generates `count` draws.
    pub fn generate(cfg: &QuantityConfig, seed: u64, count: usize, workers: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::precondition("a batch needs at least one draw"));
        }
        let values = generate_values(cfg, seed, count, workers)?;
        let method = match cfg.quantity {
            Quantity::ScaledNorm => Some(cfg.method),
            _ => None,
        };
        let k = cfg.quantity.needs_k().then_some(cfg.k);
        Ok(SampleBatch {
            values,
            meta: SampleMetadata {
                n: cfg.n,
                k,
                p: cfg.p,
                method,
                quantity: cfg.quantity,
                seed,
                count,
            },
        })
    }

    /// Checks the batch invariants.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::format("batch has no values"));
        }
        if self.values.len() != self.meta.count {
            return Err(Error::format(format!(
                "metadata count {} but {} values",
                self.meta.count,
                self.values.len()
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::format(format!("non-finite value {v}")));
        }
        if self.meta.quantity.needs_k() != self.meta.k.is_some() {
            return Err(Error::format("k must be present exactly for k-dependent quantities"));
        }
        if (self.meta.quantity == Quantity::ScaledNorm) != self.meta.method.is_some() {
            return Err(Error::format("method must be present exactly for scaled_norm"));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(8 + 20 * self.values.len());
        s.push_str("value\n");
        for v in &self.values {
            s.push_str(&format!("{v}\n"));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Vec<f64>> {
        let mut lines = text.lines();
        match lines.next() {
            Some("value") => {}
            other => return Err(Error::format(format!("expected header `value`, got {other:?}"))),
        }
        lines
            .enumerate()
            .map(|(i, l)| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::format(format!("line {}: {e}", i + 2)))
            })
            .collect()
    }

    /// Writes the CSV to `path` and the metadata to `<path>.json`, both atomically.
    pub fn write(&self, path: &Path) -> Result<()> {
        self.validate()?;
        write_atomic(path, self.to_csv().as_bytes())?;
        let meta = serde_json::to_string_pretty(&self.meta)? + "\n";
        write_atomic(&sidecar_path(path), meta.as_bytes())?;
        Ok(())
    }

    /// Reads and validates a batch written by [`SampleBatch::write`].
    pub fn read(path: &Path) -> Result<Self> {
        let values = Self::parse_csv(&std::fs::read_to_string(path)?)?;
        let meta: SampleMetadata = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
        let batch = SampleBatch { values, meta };
        batch.validate()?;
        Ok(batch)
    }
}
