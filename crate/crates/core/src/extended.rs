//! Extended reals restricted to `(-inf, +inf]`, the codomain of every rate
//! function and convex conjugate in this crate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A real number or `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInf,
}

pub use Extended::{Finite, PosInf};

impl Extended {
    pub const ZERO: Extended = Finite(0.0);

    /// Maps `f64::INFINITY` to [`PosInf`]; every other value stays finite.
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            PosInf
        } else {
            Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn is_inf(self) -> bool {
        matches!(self, PosInf)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(x) => Some(x),
            PosInf => None,
        }
    }

    /// Lossy view as an `f64` (`PosInf` becomes `f64::INFINITY`).
    pub fn to_f64(self) -> f64 {
        match self {
            Finite(x) => x,
            PosInf => f64::INFINITY,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Applies `f` to a finite value and leaves `PosInf` untouched.
    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            Finite(x) => Extended::from_f64(f(x)),
            PosInf => PosInf,
        }
    }
}

impl From<f64> for Extended {
    fn from(x: f64) -> Self {
        Extended::from_f64(x)
    }
}

impl Add for Extended {
    type Output = Extended;

    fn add(self, rhs: Extended) -> Extended {
        match (self, rhs) {
            (Finite(a), Finite(b)) => Extended::from_f64(a + b),
            _ => PosInf,
        }
    }
}

impl Add<f64> for Extended {
    type Output = Extended;

    fn add(self, rhs: f64) -> Extended {
        self + Extended::from_f64(rhs)
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), PosInf) => Some(Ordering::Less),
            (PosInf, Finite(_)) => Some(Ordering::Greater),
            (PosInf, PosInf) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(x) => write!(f, "{x}"),
            PosInf => f.write_str("inf"),
        }
    }
}

impl FromStr for Extended {
    type Err = std::num::ParseFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" => Ok(PosInf),
            other => other.parse::<f64>().map(Extended::from_f64),
        }
    }
}

/// JSON form: a number, or the string `"inf"`.
impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Finite(x) => s.serialize_f64(*x),
            PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Extended::from_f64(x)),
            Raw::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(PosInf),
                other => Err(de::Error::custom(format!("expected a number or \"inf\", got {other:?}"))),
            },
        }
    }
}
