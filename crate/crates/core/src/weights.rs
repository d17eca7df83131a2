//! Weight sequences `q = (q_k)` and the induced index weights
//! `q_j = q_{j_1} ... q_{j_m}`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::primes;
use crate::sum::NeumaierSum;

/// Default bit cap for exact prime weights.
pub const DEFAULT_WEIGHT_BITS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightKind {
    /// `q_k = p_k`, the k-th prime.
    Primes,
    /// `q_k = k (log(k+2))^theta` with `0 < theta <= 1`.
    Klog { theta: f64 },
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Primes => write!(f, "primes"),
            WeightKind::Klog { theta } => write!(f, "klog:{theta}"),
        }
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "primes" {
            return Ok(WeightKind::Primes);
        }
        if let Some(t) = s.strip_prefix("klog:") {
            let theta: f64 = t
                .parse()
                .map_err(|_| Error::Parameter(format!("bad theta in `{s}`")))?;
            return Ok(WeightKind::Klog { theta });
        }
        Err(Error::Parameter(format!(
            "unknown weight sequence `{s}` (expected `primes` or `klog:<theta>`)"
        )))
    }
}

/// Upper limit for index weights, `q_j <= limit`.
///
/// Prime weights are integers, so their limit is the exact integer floor and
/// membership is an integer comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Integer(u128),
    Real(f64),
}

impl Threshold {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Threshold::Integer(n) => n as f64,
            Threshold::Real(x) => x,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightSequence {
    kind: WeightKind,
    /// memoized klog terms, `cache[k-1] = q_k`
    klog_cache: Arc<RwLock<Arc<Vec<f64>>>>,
}

impl WeightSequence {
    pub fn primes() -> Self {
        WeightSequence {
            kind: WeightKind::Primes,
            klog_cache: Arc::default(),
        }
    }

    pub fn klog(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Parameter(format!(
                "theta must lie in (0, 1], got {theta}"
            )));
        }
        Ok(WeightSequence {
            kind: WeightKind::Klog { theta },
            klog_cache: Arc::default(),
        })
    }

    pub fn from_kind(kind: WeightKind) -> Result<Self> {
        match kind {
            WeightKind::Primes => Ok(Self::primes()),
            WeightKind::Klog { theta } => Self::klog(theta),
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn is_primes(&self) -> bool {
        matches!(self.kind, WeightKind::Primes)
    }

    /// `theta` of the klog family; the primes behave like `theta = 1`.
    pub fn theta(&self) -> f64 {
        match self.kind {
            WeightKind::Primes => 1.0,
            WeightKind::Klog { theta } => theta,
        }
    }

    /// `q_k` for `k >= 1`.
    pub fn term(&self, k: usize) -> f64 {
        assert!(k >= 1, "weights are indexed from 1");
        match self.kind {
            WeightKind::Primes => primes::table().nth(k) as f64,
            WeightKind::Klog { theta } => klog_term(k, theta),
        }
    }

    /// The k-th prime; panics for the klog family.
    pub fn prime(&self, k: usize) -> u64 {
        assert!(self.is_primes());
        primes::table().nth(k)
    }

    /// Snapshot of `q_1, q_2, ...` covering every term `<= limit` plus the
    /// first term beyond it.
    pub fn terms_through(&self, limit: f64) -> Arc<Vec<f64>> {
        match self.kind {
            WeightKind::Primes => {
                let lim = limit.max(2.0).min(u64::MAX as f64 / 4.0) as u64;
                // Bertrand: a prime lies in (lim, 2 lim]
                let snap = primes::table().up_to(2 * lim + 2);
                let count = snap.partition_point(|&p| p <= lim) + 1;
                Arc::new(snap[..count].iter().map(|&p| p as f64).collect())
            }
            WeightKind::Klog { theta } => {
                {
                    let guard = self.klog_cache.read();
                    if guard.last().is_some_and(|&q| q > limit) {
                        return Arc::clone(&guard);
                    }
                }
                let mut guard = self.klog_cache.write();
                if !guard.last().is_some_and(|&q| q > limit) {
                    let mut terms = Vec::clone(&guard);
                    loop {
                        let q = klog_term(terms.len() + 1, theta);
                        terms.push(q);
                        if q > limit {
                            break;
                        }
                    }
                    *guard = Arc::new(terms);
                }
                Arc::clone(&guard)
            }
        }
    }

    /// Prime snapshot as integers, covering every prime `<= limit` and one beyond.
    pub fn prime_terms_through(&self, limit: u128) -> Arc<Vec<u64>> {
        let lim = limit.min(u64::MAX as u128 / 4) as u64;
        primes::table().up_to(2 * lim.max(2) + 2)
    }

    /// `q_j` in double precision; `q_() = 1`.
    pub fn index_weight(&self, j: &MultiIndex) -> f64 {
        j.entries().iter().map(|&e| self.term(e as usize)).product()
    }

    /// Exact prime weight `p_j`, refusing results wider than `bit_cap` bits.
    pub fn exact_index_weight(&self, j: &MultiIndex, bit_cap: u64) -> Result<BigUint> {
        if !self.is_primes() {
            return Err(Error::UnsupportedSequence(
                "exact weights exist only for the primes",
            ));
        }
        let mut acc = BigUint::one();
        for &e in j.entries() {
            acc *= self.prime(e as usize);
            if acc.bits() > bit_cap {
                return Err(Error::WeightOverflow { bits: bit_cap });
            }
        }
        Ok(acc)
    }

    /// `q_j <= x` with the exact integer comparison for primes.
    pub fn weight_at_most(&self, j: &MultiIndex, x: f64) -> bool {
        match self.kind {
            WeightKind::Primes => match self.exact_index_weight(j, DEFAULT_WEIGHT_BITS) {
                Ok(w) => w <= floor_biguint(x),
                Err(_) => false,
            },
            WeightKind::Klog { .. } => self.index_weight(j) <= x,
        }
    }

    /// The rank `l` with `q_l <= y < q_{l+1}` (0 when `y < q_1`).
    pub fn cutoff_rank(&self, y: f64) -> u32 {
        match self.kind {
            WeightKind::Primes => {
                let snap = self.prime_terms_through(y.max(0.0) as u128);
                let lim = y.floor();
                snap.partition_point(|&p| (p as f64) <= lim) as u32
            }
            WeightKind::Klog { .. } => {
                let snap = self.terms_through(y);
                snap.partition_point(|&q| q <= y) as u32
            }
        }
    }

    /// Limit object for `q_j <= x`. `margin` inflates real limits
    /// multiplicatively; prime limits are exact and ignore it.
    pub fn threshold(&self, x: f64, margin: f64) -> Threshold {
        match self.kind {
            WeightKind::Primes => Threshold::Integer(floor_u128(x)),
            WeightKind::Klog { .. } => Threshold::Real(x * (1.0 + margin)),
        }
    }

    /// Limit object for `q_j <= x^(num/den)`, exact for primes and integral `x`.
    pub fn threshold_root(&self, x: f64, num: u32, den: u32, margin: f64) -> Threshold {
        assert!(den >= 1);
        match self.kind {
            WeightKind::Primes => {
                if x.fract() == 0.0 && x >= 1.0 && x < 2f64.powi(100) {
                    Threshold::Integer(floor_rational_power(x as u128, num, den))
                } else {
                    Threshold::Integer(floor_u128(x.powf(num as f64 / den as f64)))
                }
            }
            WeightKind::Klog { .. } => {
                Threshold::Real(x.powf(num as f64 / den as f64) * (1.0 + margin))
            }
        }
    }

    /// `c = 1/q_1 + 1/q_2 + 1/q_3`.
    pub fn head_reciprocal_constant(&self) -> f64 {
        (1..=3).map(|k| 1.0 / self.term(k)).sum()
    }

    /// Exact partial sum `sum_{k <= x} 1/q_k` together with the analytic
    /// majorant `g_theta(x) + c`.
    pub fn reciprocal_sum_bound(&self, x: f64) -> Result<ReciprocalSum> {
        let theta = match self.kind {
            WeightKind::Primes => {
                return Err(Error::UnsupportedSequence(
                    "the reciprocal-sum majorant is specific to the klog family",
                ))
            }
            WeightKind::Klog { theta } => theta,
        };
        if !(x > 3.0) {
            return Err(Error::Parameter(format!("need x > 3, got {x}")));
        }
        let top = x.floor() as usize;
        let mut acc = NeumaierSum::new();
        for k in 1..=top {
            acc.add(1.0 / klog_term(k, theta));
        }
        let c = self.head_reciprocal_constant();
        let g = g_theta(x, theta);
        Ok(ReciprocalSum {
            sum: acc.value(),
            g,
            c,
            bound: g + c,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalSum {
    pub sum: f64,
    pub g: f64,
    pub c: f64,
    pub bound: f64,
}

pub fn klog_term(k: usize, theta: f64) -> f64 {
    let k = k as f64;
    k * (k + 2.0).ln().powf(theta)
}

/// `g_theta(x) = (log x)^(1-theta) / (1-theta)` for `theta < 1`, `log log x`
/// for `theta = 1`.
pub fn g_theta(x: f64, theta: f64) -> f64 {
    if theta >= 1.0 {
        x.ln().ln()
    } else {
        x.ln().powf(1.0 - theta) / (1.0 - theta)
    }
}

fn floor_u128(x: f64) -> u128 {
    if x < 0.0 {
        0
    } else {
        x.floor().min(u128::MAX as f64) as u128
    }
}

fn floor_biguint(x: f64) -> BigUint {
    BigUint::from(floor_u128(x))
}

/// `floor(x^(num/den))` for a nonnegative integer `x`, exact.
pub fn floor_rational_power(x: u128, num: u32, den: u32) -> u128 {
    let guess = (x as f64).powf(num as f64 / den as f64).floor().max(0.0);
    let target = BigUint::from(x).pow(num);
    let fits = |n: u128| BigUint::from(n).pow(den) <= target;
    let mut n = guess.min(u128::MAX as f64) as u128;
    while n > 0 && !fits(n) {
        n -= 1;
    }
    while fits(n + 1) {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn term_examples() {
        let p = WeightSequence::primes();
        assert_eq!(p.term(4), 7.0);
        assert_eq!(p.term(1), 2.0);
        let k = WeightSequence::klog(1.0).unwrap();
        assert!((k.term(1) - 3f64.ln()).abs() < 1e-15);
        assert!((k.term(1) - 1.0986).abs() < 1e-4);
    }

    #[test]
    fn index_weight_examples() {
        let p = WeightSequence::primes();
        assert_eq!(p.index_weight(&idx(&[1, 2])), 6.0);
        assert_eq!(p.index_weight(&MultiIndex::empty()), 1.0);
        assert_eq!(p.index_weight(&idx(&[1, 1, 3])), 20.0);
        assert_eq!(
            p.exact_index_weight(&idx(&[1, 1, 3]), 64).unwrap(),
            BigUint::from(20u32)
        );
        let big = MultiIndex::new(vec![1; 70]).unwrap();
        assert_eq!(
            p.exact_index_weight(&big, 64).unwrap_err(),
            Error::WeightOverflow { bits: 64 }
        );
    }

    #[test]
    fn cutoff_rank_examples() {
        let p = WeightSequence::primes();
        assert_eq!(p.cutoff_rank(4.0), 2);
        assert_eq!(p.cutoff_rank(5.0), 3);
        assert_eq!(p.cutoff_rank(1.5), 0);
        let k = WeightSequence::klog(1.0).unwrap();
        assert_eq!(k.cutoff_rank(1.0), 0);
        // q_1 = 1.0986, q_2 = 2.7726, q_3 = 4.8283
        assert_eq!(k.cutoff_rank(3.0), 2);
    }

    #[test]
    fn reciprocal_sum_examples() {
        let k = WeightSequence::klog(1.0).unwrap();
        let r = k.reciprocal_sum_bound(10.0).unwrap();
        let direct: f64 = (1..=10)
            .map(|k| 1.0 / (k as f64 * (k as f64 + 2.0).ln()))
            .sum();
        assert!((r.sum - direct).abs() < 1e-13);
        let c = 1.0 / 3f64.ln() + 1.0 / (2.0 * 4f64.ln()) + 1.0 / (3.0 * 5f64.ln());
        assert!((r.bound - (10f64.ln().ln() + c)).abs() < 1e-14);
        assert!(r.sum <= r.bound);
        assert!(WeightSequence::primes().reciprocal_sum_bound(10.0).is_err());
        let r100 = k.reciprocal_sum_bound(100.0).unwrap();
        let direct: f64 = (1..=100)
            .map(|k| 1.0 / (k as f64 * (k as f64 + 2.0).ln()))
            .sum();
        assert!((r100.sum - direct).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_sum_below_majorant_on_grid() {
        for theta in [0.6, 0.75, 1.0] {
            let k = WeightSequence::klog(theta).unwrap();
            for x in [10.0, 1e3, 1e6] {
                let r = k.reciprocal_sum_bound(x).unwrap();
                assert!(r.sum <= r.bound, "theta={theta} x={x}: {r:?}");
            }
        }
    }

    #[test]
    fn klog_superadditive_gaps() {
        for theta in [0.6, 1.0] {
            let q = |k: usize| klog_term(k, theta);
            for l in 1..=1000 {
                for k in 1..=1000 {
                    assert!(q(l + k) - q(l) >= q(k), "theta={theta} l={l} k={k}");
                }
            }
        }
    }

    #[test]
    fn strictly_increasing() {
        let k = WeightSequence::klog(0.6).unwrap();
        let terms = k.terms_through(1e5);
        assert!(terms.windows(2).all(|w| w[0] < w[1]));
        assert!(terms[0] > 1.0);
        let p = WeightSequence::primes().prime_terms_through(100_000);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rational_power_floor_is_exact() {
        assert_eq!(floor_rational_power(100, 1, 2), 10);
        assert_eq!(floor_rational_power(99, 1, 2), 9);
        assert_eq!(floor_rational_power(1000, 2, 3), 100);
        assert_eq!(floor_rational_power(999, 2, 3), 99);
        assert_eq!(floor_rational_power(10, 1, 2), 3);
    }

    #[test]
    fn parse_kind() {
        assert_eq!("primes".parse::<WeightKind>().unwrap(), WeightKind::Primes);
        assert_eq!(
            "klog:0.75".parse::<WeightKind>().unwrap(),
            WeightKind::Klog { theta: 0.75 }
        );
        assert!("klog:x".parse::<WeightKind>().is_err());
        assert!(WeightSequence::klog(0.0).is_err());
    }

    #[test]
    fn membership_is_exact_for_primes() {
        let p = WeightSequence::primes();
        assert!(p.weight_at_most(&idx(&[1, 2]), 6.0));
        assert!(!p.weight_at_most(&idx(&[1, 2]), 5.999));
        assert_eq!(p.threshold_root(1000.0, 2, 3, 0.0), Threshold::Integer(100));
    }
}
