use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent `r` of an `l_r` ball, `1 <= r <= inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(r: f64) -> Result<Self> {
        if r.is_infinite() && r > 0.0 {
            return Ok(Exponent::Infinity);
        }
        if !(r >= 1.0) {
            return Err(Error::Parameter(format!(
                "r must satisfy 1 <= r <= inf, got {r}"
            )));
        }
        Ok(Exponent::Finite(r))
    }

    /// `1/r`, zero at infinity.
    pub fn recip(&self) -> f64 {
        match *self {
            Exponent::Finite(r) => 1.0 / r,
            Exponent::Infinity => 0.0,
        }
    }

    /// The conjugate exponent `r'` with `1/r + 1/r' = 1`.
    pub fn conjugate(&self) -> Exponent {
        match *self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(r) if r == 1.0 => Exponent::Infinity,
            Exponent::Finite(r) => Exponent::Finite(r / (r - 1.0)),
        }
    }

    /// `sigma = 1 - 1/min(r,2)`.
    pub fn sigma(&self) -> f64 {
        match *self {
            Exponent::Finite(r) if r < 2.0 => 1.0 - 1.0 / r,
            _ => 0.5,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// `r <= 2`.
    pub fn at_most_two(&self) -> bool {
        matches!(*self, Exponent::Finite(r) if r <= 2.0)
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Exponent::Finite(r) => r,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `||v||_r` of the moduli.
    pub fn norm<I: IntoIterator<Item = f64>>(&self, moduli: I) -> f64 {
        match *self {
            Exponent::Infinity => moduli.into_iter().fold(0.0, |a, b| a.max(b.abs())),
            Exponent::Finite(r) if r == 1.0 => moduli.into_iter().map(f64::abs).sum(),
            Exponent::Finite(r) => {
                let mut scale = 0.0f64;
                let v: Vec<f64> = moduli.into_iter().map(f64::abs).collect();
                for &x in &v {
                    scale = scale.max(x);
                }
                if scale == 0.0 {
                    return 0.0;
                }
                let s: f64 = v.iter().map(|x| (x / scale).powf(r)).sum();
                scale * s.powf(1.0 / r)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) => write!(f, "{r}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Infinity" | "∞" => Ok(Exponent::Infinity),
            t => {
                let r: f64 = t
                    .parse()
                    .map_err(|_| Error::Parameter(format!("cannot parse r = `{s}`")))?;
                Exponent::finite(r)
            }
        }
    }
}

impl From<Exponent> for String {
    fn from(r: Exponent) -> Self {
        r.to_string()
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Closed unit ball of `l_r^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub r: Exponent,
    pub n: usize,
}

impl BallSpec {
    pub fn new(r: Exponent, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        Ok(BallSpec { r, n })
    }

    pub fn sigma(&self) -> f64 {
        self.r.sigma()
    }

    pub fn conjugate(&self) -> Exponent {
        self.r.conjugate()
    }

    pub fn norm(&self, u: &[Complex64]) -> f64 {
        self.r.norm(u.iter().map(|z| z.norm()))
    }
}
