use std::borrow::Borrow;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::polynomial::SparsePolynomial;
use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::primes;
use crate::sum::NeumaierSum;

/// A point `u` of a sequence space, truncated to `dim` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SequencePoint {
    Explicit {
        u: Vec<Complex64>,
    },
    /// `u_n = n^{-a} (log(n+2))^{-b}`
    Power {
        a: f64,
        b: f64,
        dim: usize,
    },
    /// `u_n = p_n^{-s} (log p_n)^{-eps} v_n`, with `v_n = 1` past the end of `v`
    /// when `v` is empty
    PrimePower {
        s: f64,
        eps: f64,
        v: Vec<f64>,
        dim: usize,
    },
}

impl SequencePoint {
    pub fn explicit(u: Vec<Complex64>) -> Self {
        SequencePoint::Explicit { u }
    }

    pub fn dim(&self) -> usize {
        match self {
            SequencePoint::Explicit { u } => u.len(),
            SequencePoint::Power { dim, .. } | SequencePoint::PrimePower { dim, .. } => *dim,
        }
    }

    pub fn with_dim(mut self, n: usize) -> Self {
        match &mut self {
            SequencePoint::Explicit { .. } => {}
            SequencePoint::Power { dim, .. } | SequencePoint::PrimePower { dim, .. } => *dim = n,
        }
        self
    }

    /// `|u_n|` for `n >= 1`.
    pub fn modulus(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.dim() {
            return Err(Error::Dimension {
                have: self.dim(),
                need: n,
            });
        }
        Ok(match self {
            SequencePoint::Explicit { u } => u[n - 1].norm(),
            SequencePoint::Power { a, b, .. } => {
                let x = n as f64;
                x.powf(-a) * (x + 2.0).ln().powf(-b)
            }
            SequencePoint::PrimePower { s, eps, v, .. } => {
                let p = primes::table().nth(n) as f64;
                let scale = if v.is_empty() {
                    1.0
                } else {
                    v.get(n - 1).copied().unwrap_or(0.0)
                };
                p.powf(-s) * p.ln().powf(-eps) * scale.abs()
            }
        })
    }

    /// `|u_j| = prod |u_{j_i}|`.
    pub fn index_modulus(&self, j: &MultiIndex) -> Result<f64> {
        j.entries()
            .iter()
            .try_fold(1.0, |acc, &e| Ok(acc * self.modulus(e as usize)?))
    }

    /// Moduli of the first `dim` coordinates as a complex vector.
    pub fn to_vector(&self) -> Result<Vec<Complex64>> {
        if let SequencePoint::Explicit { u } = self {
            return Ok(u.clone());
        }
        (1..=self.dim())
            .map(|n| Ok(Complex64::new(self.modulus(n)?, 0.0)))
            .collect()
    }
}

impl FromStr for SequencePoint {
    type Err = Error;

    /// `n:<e>[:b=<b>]` is `n^e (log(n+2))^{-b}`, `p:<e>[:eps=<eps>]` is
    /// `p_n^e (log p_n)^{-eps}`, and `v:<x1>,<x2>,...` an explicit real point.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("cannot parse sequence point `{s}`"));
        let mut parts = s.split(':');
        let head = parts.next().ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        match head {
            "v" => {
                let body = parts.next().ok_or_else(bad)?;
                let u = body
                    .split(',')
                    .map(|t| num(t).map(|x| Complex64::new(x, 0.0)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SequencePoint::Explicit { u })
            }
            "n" | "p" => {
                let exponent = num(parts.next().ok_or_else(bad)?)?;
                let mut log_power = 0.0;
                for extra in parts {
                    let (key, value) = extra.split_once('=').ok_or_else(bad)?;
                    match (head, key) {
                        ("n", "b") | ("p", "eps") => log_power = num(value)?,
                        _ => return Err(bad()),
                    }
                }
                Ok(if head == "n" {
                    SequencePoint::Power {
                        a: -exponent,
                        b: log_power,
                        dim: usize::MAX,
                    }
                } else {
                    SequencePoint::PrimePower {
                        s: -exponent,
                        eps: log_power,
                        v: Vec::new(),
                        dim: usize::MAX,
                    }
                })
            }
            _ => Err(bad()),
        }
    }
}

/// Source of coefficient moduli `|c_j|`.
pub trait CoefficientSource: Sync {
    fn abs_coefficient(&self, j: &MultiIndex) -> f64;
}

impl CoefficientSource for SparsePolynomial {
    fn abs_coefficient(&self, j: &MultiIndex) -> f64 {
        self.coefficient(j).norm()
    }
}

/// `c_j = 1`, optionally only in one degree.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitCoefficients {
    pub degree: Option<usize>,
}

impl CoefficientSource for UnitCoefficients {
    fn abs_coefficient(&self, j: &MultiIndex) -> f64 {
        match self.degree {
            Some(d) if d != j.len() => 0.0,
            _ => 1.0,
        }
    }
}

impl<F: Fn(&MultiIndex) -> f64 + Sync> CoefficientSource for F {
    fn abs_coefficient(&self, j: &MultiIndex) -> f64 {
        self(j)
    }
}

/// `sum_{j in J} |c_j| |u_j|`, consuming the index stream lazily.
pub fn weighted_sum<C, I, J>(coeffs: &C, u: &SequencePoint, set: I) -> Result<f64>
where
    C: CoefficientSource + ?Sized,
    I: IntoIterator<Item = J>,
    J: Borrow<MultiIndex>,
{
    let mut acc = NeumaierSum::new();
    for j in set {
        let j = j.borrow();
        let c = coeffs.abs_coefficient(j);
        if c != 0.0 {
            acc.add(c * u.index_modulus(j)?);
        }
    }
    Ok(acc.value())
}
