//! Draws of the random objects behind `n^{1/p−1/2}‖P_E X‖₂`.
//!
//! The *direct* construction samples `X` uniformly in `B_p^n`, a Haar
//! subspace `E`, and projects. The *product* construction multiplies the
//! independent factors `U^{1/n}`, `W` (depending on `p` only) and `V`
//! (depending on `k` only). The two are equal in law; the direct sampler
//! shares no code path with the factor samplers so that comparing them is a
//! meaningful check.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::pexp::PExponent;
use super::regime::check_dimensions;
use crate::error::{Error, Result};

/// The p-generalized Gaussian law with density
/// `e^{−|x|^p/p} / (2 p^{1/p} Γ(1+1/p))`.
///
/// Sampled as `±(p·G)^{1/p}` with `G ~ Gamma(1/p, 1)` and an independent
/// fair sign.
#[derive(Clone, Debug)]
pub struct PGaussian {
    p: f64,
    inv_p: f64,
    gamma: Option<Gamma<f64>>,
}

impl PGaussian {
    pub fn new(p: f64) -> Result<Self> {
        PExponent::new(p)?.require_finite()?;
        let gamma = if p == 1.0 {
            None
        } else {
            Some(Gamma::new(1.0 / p, 1.0).map_err(|e| Error::domain(e.to_string()))?)
        };
        Ok(PGaussian {
            p,
            inv_p: 1.0 / p,
            gamma,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `|Z|` only, skipping the sign draw.
    #[inline]
    pub fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.gamma {
            // Gamma(1, 1) is the unit exponential.
            None => Exp1.sample(rng),
            Some(g) => {
                let v: f64 = g.sample(rng);
                (self.p * v).powf(self.inv_p)
            }
        }
    }
}

impl Distribution<f64> for PGaussian {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.sample_abs(rng);
        if rng.random::<bool>() {
            a
        } else {
            -a
        }
    }
}

/// `|x|^p` with exact fast paths for `p ∈ {1, 2}`.
#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x.abs()
    } else if p == 2.0 {
        x * x
    } else {
        x.abs().powf(p)
    }
}

/// One draw from the p-generalized Gaussian law.
pub fn sample_p_gaussian<R: Rng + ?Sized>(p: PExponent, rng: &mut R) -> Result<f64> {
    Ok(PGaussian::new(p.require_finite()?)?.sample(rng))
}

/// A uniform draw on `(0, 1]`.
#[inline]
fn uniform_open0<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// A point `Z/‖Z‖_p` of the cone measure on the unit `ℓ_p` sphere.
pub fn sample_cone_measure<R: Rng + ?Sized>(n: usize, p: PExponent, rng: &mut R) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::precondition("cone measure needs n >= 1"));
    }
    let dist = PGaussian::new(p.require_finite()?)?;
    let mut z = vec![0.0; n];
    loop {
        for v in z.iter_mut() {
            *v = dist.sample(rng);
        }
        let norm = p.norm(&z);
        if norm > 0.0 {
            z.iter_mut().for_each(|v| *v /= norm);
            return Ok(z);
        }
    }
}

/// A uniform point in `B_p^n`: `U^{1/n}` times a cone-measure point for
/// finite `p`, independent uniform coordinates on `[−1, 1]` for `p = ∞`.
pub fn sample_uniform_ball<R: Rng + ?Sized>(n: usize, p: PExponent, rng: &mut R) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::precondition("uniform ball needs n >= 1"));
    }
    match p {
        PExponent::Infinity => Ok((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()),
        PExponent::Finite(_) => {
            let mut x = sample_cone_measure(n, p, rng)?;
            let radius = uniform_open0(rng).powf(1.0 / n as f64);
            x.iter_mut().for_each(|v| *v *= radius);
            Ok(x)
        }
    }
}

/// Projects onto Haar-random `k`-dimensional subspaces of `ℝ^n`.
///
/// A subspace is the row span of a Gaussian matrix orthonormalized by
/// modified Gram–Schmidt, with a second pass whenever a row keeps an overlap
/// above `1e-10` with its predecessors. When `k > n/2` the complement, itself
/// Haar of dimension `n − k`, is sampled instead and
/// `‖P_E x‖² = ‖x‖² − ‖P_{E⊥} x‖²`.
#[derive(Clone, Debug)]
pub struct HaarProjector {
    n: usize,
    dim: usize,
    complement: bool,
    basis: Vec<f64>,
}

const REORTHOGONALIZE_ABOVE: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl HaarProjector {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        check_dimensions(n, k)?;
        let complement = 2 * k > n;
        let dim = if complement { n - k } else { k };
        Ok(HaarProjector {
            n,
            dim,
            complement,
            basis: vec![0.0; dim * n],
        })
    }

    /// Draws a fresh orthonormal frame into `self.basis`.
    fn draw_frame<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.n;
        'retry: loop {
            for v in self.basis.iter_mut() {
                *v = StandardNormal.sample(rng);
            }
            for i in 0..self.dim {
                let (done, rest) = self.basis.split_at_mut(i * n);
                let row = &mut rest[..n];
                let raw_norm = dot(row, row).sqrt();
                for j in 0..i {
                    let q = &done[j * n..(j + 1) * n];
                    let r = dot(q, row);
                    row.iter_mut().zip(q).for_each(|(v, qv)| *v -= r * qv);
                }
                let mut norm = dot(row, row).sqrt();
                if i > 0 {
                    let overlap = (0..i)
                        .map(|j| dot(&done[j * n..(j + 1) * n], row).abs())
                        .fold(0.0, f64::max)
                        / norm;
                    if overlap > REORTHOGONALIZE_ABOVE {
                        for j in 0..i {
                            let q = &done[j * n..(j + 1) * n];
                            let r = dot(q, row);
                            row.iter_mut().zip(q).for_each(|(v, qv)| *v -= r * qv);
                        }
                        norm = dot(row, row).sqrt();
                    }
                }
                if !(norm > 1e-12 * raw_norm) {
                    // Rank deficiency, a probability-zero event.
                    continue 'retry;
                }
                row.iter_mut().for_each(|v| *v /= norm);
            }
            return;
        }
    }

    /// `‖P_E x‖₂` for a freshly drawn Haar subspace `E`.
    pub fn project_norm<R: Rng + ?Sized>(&mut self, x: &[f64], rng: &mut R) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::precondition(format!(
                "vector has {} coordinates, expected {}",
                x.len(),
                self.n
            )));
        }
        self.draw_frame(rng);
        let captured: f64 = self
            .basis
            .chunks_exact(self.n)
            .map(|q| {
                let c = dot(q, x);
                c * c
            })
            .sum();
        let sq = if self.complement {
            (dot(x, x) - captured).max(0.0)
        } else {
            captured
        };
        Ok(sq.sqrt())
    }

    /// The current orthonormal frame (rows of length `n`).
    pub fn frame(&self) -> impl Iterator<Item = &[f64]> {
        self.basis.chunks_exact(self.n)
    }
}

/// `‖P_E x‖₂` for `E` Haar-distributed on the `k`-dimensional subspaces.
pub fn sample_haar_projection_norm<R: Rng + ?Sized>(n: usize, k: usize, x: &[f64], rng: &mut R) -> Result<f64> {
    HaarProjector::new(n, k)?.project_norm(x, rng)
}

/// `U^{1/n}` for `U` uniform on `[0, 1]`.
pub fn sample_factor_u<R: Rng + ?Sized>(n: usize, rng: &mut R) -> f64 {
    uniform_open0(rng).powf(1.0 / n as f64)
}

/// `(Σ_{i≤k} g_i²)^{1/2} / (Σ_{i≤n} g_i²)^{1/2}` from `n` standard Gaussians.
pub fn sample_factor_v<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<f64> {
    check_dimensions(n, k)?;
    Ok(factor_v_unchecked(n, k, rng))
}

#[inline]
fn factor_v_unchecked<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> f64 {
    loop {
        let mut head = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            let g: f64 = StandardNormal.sample(rng);
            let g2 = g * g;
            if i < k {
                head += g2;
            }
            total += g2;
        }
        if total > 0.0 {
            return (head / total).sqrt();
        }
    }
}

/// `U^{1/n} · V`.
pub fn sample_factor_v1<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<f64> {
    let v = sample_factor_v(n, k, rng)?;
    Ok(sample_factor_u(n, rng) * v)
}

/// `W = n^{1/p−1/2} ‖Z‖₂ / ‖Z‖_p` for finite `p`; `√((1/n) Σ X_i²)` with
/// `X_i` uniform on `[−1,1]` for `p = ∞`.
pub fn sample_factor_w<R: Rng + ?Sized>(n: usize, p: PExponent, rng: &mut R) -> Result<f64> {
    if n < 1 {
        return Err(Error::precondition("W needs n >= 1"));
    }
    let w = WSampler::new(n, p)?;
    Ok(w.sample(rng))
}

/// Reusable sampler for the `W` factor.
#[derive(Clone, Debug)]
pub struct WSampler {
    n: usize,
    p: PExponent,
    scale: f64,
    dist: Option<PGaussian>,
}

impl WSampler {
    pub fn new(n: usize, p: PExponent) -> Result<Self> {
        let dist = match p {
            PExponent::Finite(pv) => Some(PGaussian::new(pv)?),
            PExponent::Infinity => None,
        };
        Ok(WSampler {
            n,
            p,
            scale: p.scale(n),
            dist,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match (&self.dist, self.p) {
            (Some(dist), PExponent::Finite(p)) => loop {
                let mut sum2 = 0.0;
                let mut sump = 0.0;
                for _ in 0..self.n {
                    let z = dist.sample_abs(rng);
                    sum2 += z * z;
                    sump += abs_pow(z, p);
                }
                if sump > 0.0 {
                    return self.scale * sum2.sqrt() / sump.powf(1.0 / p);
                }
            },
            _ => {
                let s: f64 = (0..self.n)
                    .map(|_| {
                        let x: f64 = rng.random_range(-1.0..=1.0);
                        x * x
                    })
                    .sum();
                (s / self.n as f64).sqrt()
            }
        }
    }
}

/// Which of the two equal-in-law constructions to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Product,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "product" => Ok(Method::Product),
            other => Err(Error::domain(format!("unknown method {other:?} (direct|product)"))),
        }
    }
}

/// Draws `n^{1/p−1/2}‖P_E X‖₂` (or `n^{−1/2}‖P_E X‖₂` for `p = ∞`) by either construction.
///
/// Convenience entry point for single draws; batch generation goes through
/// [`crate::sampling::QuantitySampler`], which keeps the product factors on
/// disjoint substreams.
pub fn sample_scaled_projection_norm<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    p: PExponent,
    method: Method,
    rng: &mut R,
) -> Result<f64> {
    check_dimensions(n, k)?;
    match method {
        Method::Direct => {
            let x = sample_uniform_ball(n, p, rng)?;
            Ok(p.scale(n) * sample_haar_projection_norm(n, k, &x, rng)?)
        }
        Method::Product => {
            let w = sample_factor_w(n, p, rng)?;
            let v = sample_factor_v(n, k, rng)?;
            Ok(match p {
                PExponent::Finite(_) => sample_factor_u(n, rng) * w * v,
                PExponent::Infinity => w * v,
            })
        }
    }
}

/// Empirical means appearing in the auxiliary large deviation results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeanKind {
    /// `(1/n) Σ Z_i²`.
    Z2,
    /// `(1/n) Σ |Z_i|^p`.
    Zp,
    /// `(1/n) Σ g_i²`.
    G2,
}

/// One realization of the chosen empirical mean from `n` fresh draws.
pub fn sample_empirical_means<R: Rng + ?Sized>(n: usize, p: PExponent, which: MeanKind, rng: &mut R) -> Result<f64> {
    if n < 1 {
        return Err(Error::precondition("empirical mean needs n >= 1"));
    }
    let total: f64 = match which {
        MeanKind::G2 => (0..n)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                g * g
            })
            .sum(),
        MeanKind::Z2 | MeanKind::Zp => {
            let pv = p.require_finite()?;
            let dist = PGaussian::new(pv)?;
            let exponent = if which == MeanKind::Z2 { 2.0 } else { pv };
            (0..n).map(|_| abs_pow(dist.sample_abs(rng), exponent)).sum()
        }
    };
    Ok(total / n as f64)
}

pub(crate) fn factor_v_fast<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> f64 {
    factor_v_unchecked(n, k, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng::RngStream;

    fn stats(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn p_gaussian_moments() {
        let mut rng = RngStream::new(11, 0).rng();
        for &p in &[1.0, 1.5, 2.0, 3.0, 4.0] {
            let d = PGaussian::new(p).unwrap();
            let xs: Vec<f64> = (0..1_000_000).map(|_| d.sample(&mut rng)).collect();
            let (mean, se) = stats(&xs);
            assert!(mean.abs() < 5.0 * se, "p={p} mean={mean}");
            let abs_p: Vec<f64> = xs.iter().map(|x| x.abs().powf(p)).collect();
            let (m, se) = stats(&abs_p);
            assert!((m - 1.0).abs() < 5.0 * se, "p={p} E|Z|^p={m}");
            if p == 2.0 {
                let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
                let (v, se) = stats(&sq);
                assert!((v - 1.0).abs() < 5.0 * se);
            }
        }
    }

    #[test]
    fn cone_points_lie_on_sphere() {
        let mut rng = RngStream::new(3, 1).rng();
        for &p in &[1.0, 1.5, 2.0, 5.0] {
            let pe = PExponent::Finite(p);
            for _ in 0..200 {
                let x = sample_cone_measure(17, pe, &mut rng).unwrap();
                assert!((pe.norm(&x) - 1.0).abs() < 1e-12);
            }
        }
        let mut plus = 0;
        for _ in 0..20_000 {
            let x = sample_cone_measure(1, PExponent::Finite(1.5), &mut rng).unwrap();
            assert!((x[0].abs() - 1.0).abs() < 1e-12);
            plus += (x[0] > 0.0) as usize;
        }
        assert!((plus as f64 - 10_000.0).abs() < 5.0 * 70.8);
    }

    #[test]
    fn euclidean_cone_is_centered() {
        let mut rng = RngStream::new(5, 0).rng();
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_cone_measure(4, PExponent::Finite(2.0), &mut rng).unwrap()[2])
            .collect();
        let (m, se) = stats(&xs);
        assert!(m.abs() < 5.0 * se);
    }

    #[test]
    fn ball_volume_scaling() {
        let mut rng = RngStream::new(8, 0).rng();
        let n = 3;
        for &p in &[PExponent::Finite(1.0), PExponent::Finite(3.0), PExponent::Infinity] {
            let norms: Vec<f64> = (0..200_000)
                .map(|_| {
                    let y = sample_uniform_ball(n, p, &mut rng).unwrap();
                    p.norm(&y)
                })
                .collect();
            assert!(norms.iter().all(|&r| r <= 1.0 + 1e-15));
            for &t in &[0.5_f64, 0.9] {
                let frac = norms.iter().filter(|&&r| r <= t).count() as f64 / norms.len() as f64;
                let expect = t.powi(n as i32);
                let se = (expect * (1.0 - expect) / norms.len() as f64).sqrt();
                assert!((frac - expect).abs() < 5.0 * se, "p={p} t={t} frac={frac}");
            }
        }
    }

    #[test]
    fn one_dimensional_ball_is_uniform() {
        let mut rng = RngStream::new(9, 0).rng();
        for &p in &[PExponent::Finite(1.0), PExponent::Finite(2.5), PExponent::Infinity] {
            let below = (0..100_000)
                .filter(|_| sample_uniform_ball(1, p, &mut rng).unwrap()[0] <= 0.0)
                .count() as f64
                / 100_000.0;
            assert!((below - 0.5).abs() < 5.0 * 0.5 / (100_000f64).sqrt());
        }
    }

    #[test]
    fn haar_frame_is_orthonormal() {
        let mut rng = RngStream::new(1, 0).rng();
        let mut proj = HaarProjector::new(30, 12).unwrap();
        let x = vec![1.0; 30];
        proj.project_norm(&x, &mut rng).unwrap();
        let rows: Vec<&[f64]> = proj.frame().collect();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                let d = dot(rows[i], rows[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_projection_contracts_and_has_mean_k_over_n() {
        let mut rng = RngStream::new(2, 0).rng();
        let n = 6;
        let k = n - 1;
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let mut proj = HaarProjector::new(n, k).unwrap();
        let sq: Vec<f64> = (0..1_000_000)
            .map(|_| proj.project_norm(&e1, &mut rng).unwrap().powi(2))
            .collect();
        assert!(sq.iter().all(|&s| s <= 1.0 + 1e-12));
        let (m, se) = stats(&sq);
        assert!((m - k as f64 / n as f64).abs() < 5.0 * se, "mean {m}");

        let mut small = HaarProjector::new(n, 2).unwrap();
        let sq: Vec<f64> = (0..200_000)
            .map(|_| small.project_norm(&e1, &mut rng).unwrap().powi(2))
            .collect();
        let (m, se) = stats(&sq);
        assert!((m - 2.0 / n as f64).abs() < 5.0 * se);
        assert_eq!(small.project_norm(&vec![0.0; n], &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn haar_projection_rejects_bad_dimensions() {
        let mut rng = RngStream::new(2, 0).rng();
        assert!(sample_haar_projection_norm(5, 5, &[0.0; 5], &mut rng).is_err());
        assert!(sample_haar_projection_norm(5, 2, &[0.0; 4], &mut rng).is_err());
    }

    #[test]
    fn factor_v_range_and_mean() {
        let mut rng = RngStream::new(4, 0).rng();
        let (n, k) = (12, 5);
        let v2: Vec<f64> = (0..1_000_000)
            .map(|_| sample_factor_v(n, k, &mut rng).unwrap().powi(2))
            .collect();
        assert!(v2.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let (m, se) = stats(&v2);
        assert!((m - k as f64 / n as f64).abs() < 5.0 * se);
    }

    #[test]
    fn w_is_one_for_euclidean_ball() {
        let mut rng = RngStream::new(6, 0).rng();
        for _ in 0..1000 {
            let w = sample_factor_w(37, PExponent::Finite(2.0), &mut rng).unwrap();
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn w_concentrates_at_root_moment() {
        let mut rng = RngStream::new(12, 0).rng();
        let n = 10_000;
        let w = WSampler::new(n, PExponent::Infinity).unwrap();
        let mean = (0..200).map(|_| w.sample(&mut rng)).sum::<f64>() / 200.0;
        assert!((mean - (1.0_f64 / 3.0).sqrt()).abs() < 0.01 * (1.0_f64 / 3.0).sqrt());
        // p = 4: E Z² from the Gamma moment identity 4^{1/2} Γ(3/4) / Γ(1/4).
        let m4 = 2.0 * crate::numerics::gamma(0.75).unwrap() / crate::numerics::gamma(0.25).unwrap();
        let w = WSampler::new(n, PExponent::Finite(4.0)).unwrap();
        let mean = (0..200).map(|_| w.sample(&mut rng)).sum::<f64>() / 200.0;
        assert!((mean - m4.sqrt()).abs() < 0.01 * m4.sqrt(), "{mean} vs {}", m4.sqrt());
    }

    #[test]
    fn euclidean_product_is_radial_times_v() {
        let stream = RngStream::new(10, 0);
        let mut a = stream.rng();
        let got = sample_scaled_projection_norm(20, 7, PExponent::Finite(2.0), Method::Product, &mut a).unwrap();
        let mut b = stream.rng();
        let w = sample_factor_w(20, PExponent::Finite(2.0), &mut b).unwrap();
        let v = sample_factor_v(20, 7, &mut b).unwrap();
        let u = sample_factor_u(20, &mut b);
        assert!((w - 1.0).abs() < 1e-12);
        assert!((got - u * v).abs() < 1e-12);
    }

    #[test]
    fn empirical_means_center_on_one() {
        let mut rng = RngStream::new(13, 0).rng();
        let n = 1_000_000;
        let g2 = sample_empirical_means(n, PExponent::Finite(2.0), MeanKind::G2, &mut rng).unwrap();
        let se = (2.0 / n as f64).sqrt();
        assert!((g2 - 1.0).abs() < 5.0 * se);
        let z2 = sample_empirical_means(n, PExponent::Finite(2.0), MeanKind::Z2, &mut rng).unwrap();
        assert!((z2 - 1.0).abs() < 5.0 * se);
        for &p in &[1.0, 1.5, 3.0] {
            // Var |Z|^p = p for the p-generalized Gaussian (|Z|^p/p ~ Gamma(1/p)).
            let zp = sample_empirical_means(n, PExponent::Finite(p), MeanKind::Zp, &mut rng).unwrap();
            assert!((zp - 1.0).abs() < 5.0 * (p / n as f64).sqrt(), "p={p} {zp}");
        }
    }
}
