use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The exponent `p` of an `ℓ_p` norm: a real `p ≥ 1` or `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(PExponent::Infinity);
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("p must be >= 1 or \"inf\", got {p}")));
        }
        Ok(PExponent::Finite(p))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            PExponent::Finite(p) => Some(p),
            PExponent::Infinity => None,
        }
    }

    /// `p` for finite exponents, an error for `∞`.
    pub fn require_finite(self) -> Result<f64> {
        self.finite()
            .ok_or_else(|| Error::domain("this operation requires a finite p"))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PExponent::Infinity)
    }

    /// `1/p` with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            PExponent::Finite(p) => 1.0 / p,
            PExponent::Infinity => 0.0,
        }
    }

    /// Exponent of the normalization `n^{1/p − 1/2}`.
    pub fn scaling_exponent(self) -> f64 {
        self.reciprocal() - 0.5
    }

    /// `n^{1/p − 1/2}`.
    pub fn scale(self, n: usize) -> f64 {
        (n as f64).powf(self.scaling_exponent())
    }

    /// `‖x‖_p`.
    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            PExponent::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            PExponent::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
            PExponent::Finite(p) if p == 2.0 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            PExponent::Finite(p) => x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            PExponent::Finite(p) => p,
            PExponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for PExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" => Ok(PExponent::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::domain(format!("p must be >= 1 or \"inf\", got {other:?}")))?;
                PExponent::new(p)
            }
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PExponent::Finite(p) => s.serialize_f64(*p),
            PExponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PVisitor;

        impl Visitor<'_> for PVisitor {
            type Value = PExponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<PExponent, E> {
                PExponent::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<PExponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<PExponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<PExponent, E> {
                v.parse().map_err(E::custom)
            }
        }

        d.deserialize_any(PVisitor)
    }
}
