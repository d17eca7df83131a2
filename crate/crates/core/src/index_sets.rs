//! Weighted index families `J(x)`, `J(x,m)`, `J-(x;y)` and `J+(x,m;y)`.
//!
//! All families are produced by one depth-first walker over nondecreasing
//! tuples that carries the running weight and cuts a branch as soon as no
//! completion can stay below the limit. The work is linear in the output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};
use crate::index::{self, MultiIndex, DEFAULT_CAP};
use crate::weights::{g_theta, Threshold, WeightSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `J(x)`, every index of weight `<= x`, including the empty one.
    Jx,
    /// `J(x,m)`, the degree-`m` part of `J(x)`.
    Jxm,
    /// `J-(x;y)`, indices of `J(x)` with all entries `<= l`.
    Jminus,
    /// `J+(x,m;y)`, indices of `J(x,m)` with all entries `> l`.
    Jplus,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Jx => "jx",
            Family::Jxm => "jxm",
            Family::Jminus => "jminus",
            Family::Jplus => "jplus",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jx" => Ok(Family::Jx),
            "jxm" => Ok(Family::Jxm),
            "jminus" => Ok(Family::Jminus),
            "jplus" => Ok(Family::Jplus),
            _ => Err(Error::Parameter(format!(
                "unknown family `{s}` (expected jx, jxm, jminus or jplus)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightedFamilySpec {
    pub seq: WeightSequence,
    pub family: Family,
    pub x: f64,
    pub y: Option<f64>,
    pub m: Option<usize>,
    /// Multiplicative slack on real-valued limits (klog only).
    pub margin: f64,
    pub cap: u64,
    /// Constant entering the size bound of the family, when it has one.
    pub constant: Option<f64>,
}

impl WeightedFamilySpec {
    pub fn new(seq: WeightSequence, family: Family, x: f64) -> Self {
        WeightedFamilySpec {
            seq,
            family,
            x,
            y: None,
            m: None,
            margin: 0.0,
            cap: DEFAULT_CAP,
            constant: None,
        }
    }

    pub fn with_y(mut self, y: f64) -> Self {
        self.y = Some(y);
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x > 2.0) || !self.x.is_finite() {
            return Err(Error::Parameter(format!(
                "x must be finite and > 2, got {}",
                self.x
            )));
        }
        match self.family {
            Family::Jminus | Family::Jplus => {
                let y = self
                    .y
                    .ok_or_else(|| Error::Parameter(format!("family {} needs y", self.family)))?;
                if !(y > 2.0 && y < self.x) {
                    return Err(Error::Parameter(format!("need 2 < y < x, got y = {y}")));
                }
            }
            _ => {}
        }
        if matches!(self.family, Family::Jxm | Family::Jplus) && self.m.is_none() {
            return Err(Error::Parameter(format!("family {} needs m", self.family)));
        }
        Ok(())
    }

    /// The cutoff rank `l` of `y`, 0 when no `y` is set.
    pub fn rank(&self) -> u32 {
        self.y.map_or(0, |y| self.seq.cutoff_rank(y))
    }

    fn walk_params(&self) -> (u32, u32, Length) {
        let l = self.rank();
        match self.family {
            Family::Jx => (1, u32::MAX, Length::Any),
            Family::Jxm => (1, u32::MAX, Length::Exact(self.m.unwrap_or(0))),
            Family::Jminus => (1, l, Length::Any),
            Family::Jplus => (l + 1, u32::MAX, Length::Exact(self.m.unwrap_or(0))),
        }
    }
}

/// Length constraint of a walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Length {
    Any,
    Exact(usize),
}

trait Arith: Copy + PartialOrd {
    fn times(self, other: Self) -> Option<Self>;
}

impl Arith for u128 {
    fn times(self, other: Self) -> Option<Self> {
        self.checked_mul(other)
    }
}

impl Arith for f64 {
    fn times(self, other: Self) -> Option<Self> {
        Some(self * other)
    }
}

#[derive(Debug)]
struct Walker<W: Arith> {
    terms: Arc<Vec<W>>,
    limit: W,
    base: W,
    lo: u32,
    hi: u32,
    length: Length,
    entries: Vec<u32>,
    weights: Vec<W>,
    started: bool,
    done: bool,
}

impl<W: Arith> Walker<W> {
    fn top_weight(&self) -> W {
        *self.weights.last().unwrap_or(&self.base)
    }

    fn term(&self, e: u32) -> Option<W> {
        if e > self.hi || e == 0 {
            return None;
        }
        self.terms.get(e as usize - 1).copied()
    }

    /// Weight after appending `e` to a node of weight `w` at `depth`, if the
    /// child can still be completed below the limit.
    fn child(&self, w: W, depth: usize, e: u32) -> Option<W> {
        let q = self.term(e)?;
        let next = w.times(q)?;
        if next > self.limit {
            return None;
        }
        if let Length::Exact(m) = self.length {
            // remaining entries are all >= e
            let mut reach = next;
            for _ in depth + 1..m {
                reach = reach.times(q)?;
                if reach > self.limit {
                    return None;
                }
            }
        }
        Some(next)
    }

    fn max_depth(&self) -> usize {
        match self.length {
            Length::Any => usize::MAX,
            Length::Exact(m) => m,
        }
    }

    fn emits(&self) -> bool {
        match self.length {
            Length::Any => true,
            Length::Exact(m) => self.entries.len() == m,
        }
    }

    fn descend(&mut self) -> bool {
        let depth = self.entries.len();
        if depth >= self.max_depth() {
            return false;
        }
        let e = self.entries.last().copied().unwrap_or(self.lo).max(self.lo);
        match self.child(self.top_weight(), depth, e) {
            Some(w) => {
                self.entries.push(e);
                self.weights.push(w);
                true
            }
            None => false,
        }
    }

    fn advance(&mut self) -> bool {
        let Some(&e) = self.entries.last() else {
            return false;
        };
        let depth = self.entries.len() - 1;
        let parent = if depth == 0 {
            self.base
        } else {
            self.weights[depth - 1]
        };
        match self.child(parent, depth, e + 1) {
            Some(w) => {
                *self.entries.last_mut().unwrap() = e + 1;
                *self.weights.last_mut().unwrap() = w;
                true
            }
            None => false,
        }
    }

    fn current(&self) -> MultiIndex {
        MultiIndex::from_sorted_unchecked(self.entries.clone())
    }

    fn next_index(&mut self) -> Option<MultiIndex> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !(self.base <= self.limit) {
                self.done = true;
                return None;
            }
            if self.emits() {
                return Some(self.current());
            }
        }
        loop {
            if self.descend() {
                if self.emits() {
                    return Some(self.current());
                }
                continue;
            }
            loop {
                if self.entries.is_empty() {
                    self.done = true;
                    return None;
                }
                if self.advance() {
                    break;
                }
                self.entries.pop();
                self.weights.pop();
            }
            if self.emits() {
                return Some(self.current());
            }
        }
    }
}

#[derive(Debug)]
enum WalkerKind {
    Int(Walker<u128>),
    Real(Walker<f64>),
}

/// Stream of indices of a weighted family in lexicographic order (prefixes
/// before their extensions). Yields an error once if the cap is hit.
#[derive(Debug)]
pub struct FamilyIter {
    walker: WalkerKind,
    emitted: u64,
    cap: u64,
    failed: bool,
}

impl Iterator for FamilyIter {
    type Item = Result<MultiIndex>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let next = match &mut self.walker {
            WalkerKind::Int(w) => w.next_index(),
            WalkerKind::Real(w) => w.next_index(),
        }?;
        self.emitted += 1;
        if self.emitted > self.cap {
            self.failed = true;
            return Some(Err(Error::CapExceeded { cap: self.cap }));
        }
        Some(Ok(next))
    }
}

/// Low-level walk: indices with entries in `lo..=hi`, the given length rule,
/// and `q_base * q_j <= limit`, where `base` is multiplied in front.
pub fn walk(
    seq: &WeightSequence,
    limit: Threshold,
    base: &MultiIndex,
    lo: u32,
    hi: u32,
    length: Length,
    cap: u64,
) -> FamilyIter {
    let walker = match limit {
        Threshold::Integer(lim) => {
            let primes = seq.prime_terms_through(lim);
            let terms: Arc<Vec<u128>> = Arc::new(primes.iter().map(|&p| p as u128).collect());
            let mut b: Option<u128> = Some(1);
            for &e in base.entries() {
                b = b.and_then(|w| w.checked_mul(seq.prime(e as usize) as u128));
            }
            WalkerKind::Int(Walker {
                terms,
                limit: lim,
                base: b.unwrap_or(u128::MAX),
                lo: lo.max(1),
                hi,
                length,
                entries: Vec::new(),
                weights: Vec::new(),
                started: false,
                done: b.is_none(),
            })
        }
        Threshold::Real(lim) => {
            let terms = seq.terms_through(lim);
            let mut b = 1.0f64;
            for &e in base.entries() {
                b *= seq.term(e as usize);
            }
            WalkerKind::Real(Walker {
                terms,
                limit: lim,
                base: b,
                lo: lo.max(1),
                hi,
                length,
                entries: Vec::new(),
                weights: Vec::new(),
                started: false,
                done: false,
            })
        }
    };
    FamilyIter {
        walker,
        emitted: 0,
        cap,
        failed: false,
    }
}

/// Streams the members of a family.
pub fn enumerate_family(spec: &WeightedFamilySpec) -> Result<FamilyIter> {
    spec.validate()?;
    let (lo, hi, length) = spec.walk_params();
    let limit = spec.seq.threshold(spec.x, spec.margin);
    Ok(walk(
        &spec.seq,
        limit,
        &MultiIndex::empty(),
        lo,
        hi,
        length,
        spec.cap,
    ))
}

/// Collects a family into its canonical set form.
pub fn family_set(spec: &WeightedFamilySpec) -> Result<BTreeSet<MultiIndex>> {
    enumerate_family(spec)?.collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCensus {
    pub family: Family,
    pub weights: String,
    pub x: f64,
    pub y: Option<f64>,
    pub m: Option<usize>,
    pub l: Option<u32>,
    pub cardinality: u64,
    pub by_degree: BTreeMap<usize, u64>,
    pub bound_name: Option<String>,
    pub constant: Option<f64>,
    pub analytic_bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
}

/// Exact size of a family together with the size bound that applies to it.
pub fn census(spec: &WeightedFamilySpec) -> Result<FamilyCensus> {
    let mut by_degree = BTreeMap::new();
    let mut cardinality = 0u64;
    for j in enumerate_family(spec)? {
        let j = j?;
        *by_degree.entry(j.len()).or_insert(0u64) += 1;
        cardinality += 1;
    }
    let (bound_name, constant, analytic_bound) = family_bound(spec);
    let bound_satisfied = analytic_bound.map(|b| (cardinality as f64) <= b);
    Ok(FamilyCensus {
        family: spec.family,
        weights: spec.seq.kind().to_string(),
        x: spec.x,
        y: spec.y,
        m: spec.m,
        l: spec.y.map(|_| spec.rank()),
        cardinality,
        by_degree,
        bound_name: bound_name.map(str::to_string),
        constant,
        analytic_bound,
        bound_satisfied,
    })
}

/// `(1 + log x / log q_1)^l`.
pub fn jminus_size_bound(seq: &WeightSequence, x: f64, l: u32) -> f64 {
    (1.0 + x.ln() / seq.term(1).ln()).powi(l as i32)
}

/// `x y^{-m} exp(y (g(x) + c))` with `g = g_theta` (klog) or `log log`
/// (primes).
pub fn jplus_size_bound(seq: &WeightSequence, x: f64, y: f64, m: usize, c: f64) -> f64 {
    let g = g_theta(x, seq.theta());
    (x.ln() - m as f64 * y.ln() + y * (g + c)).exp()
}

/// `C_m x / log x (log log x)^{m-1}`.
pub fn landau_shape(x: f64, m: usize) -> f64 {
    x / x.ln() * x.ln().ln().powi(m as i32 - 1)
}

fn family_bound(spec: &WeightedFamilySpec) -> (Option<&'static str>, Option<f64>, Option<f64>) {
    let seq = &spec.seq;
    let max_degree = spec.x.ln() / seq.term(1).ln();
    match spec.family {
        Family::Jx => (None, None, None),
        Family::Jminus => (
            Some("jminus-size"),
            None,
            Some(jminus_size_bound(seq, spec.x, spec.rank())),
        ),
        Family::Jxm => {
            let m = spec.m.unwrap_or(0);
            if m as f64 > max_degree {
                return (Some("degree-cutoff"), None, Some(0.0));
            }
            if seq.is_primes() && m >= 1 && spec.x >= 3.0 {
                let c = spec
                    .constant
                    .unwrap_or_else(|| constants::landau_constant(m));
                (
                    Some("landau-size"),
                    Some(c),
                    Some(c * landau_shape(spec.x, m)),
                )
            } else {
                (None, None, None)
            }
        }
        Family::Jplus => {
            let m = spec.m.unwrap_or(0);
            if m as f64 > max_degree {
                return (Some("degree-cutoff"), None, Some(0.0));
            }
            let y = spec.y.unwrap_or(f64::NAN);
            if seq.is_primes() {
                let c = spec.constant.unwrap_or(constants::PRIME_JPLUS_C);
                (
                    Some("jplus-size-primes"),
                    Some(c),
                    Some(jplus_size_bound(seq, spec.x, y, m, c)),
                )
            } else {
                let c = spec
                    .constant
                    .unwrap_or_else(|| seq.head_reciprocal_constant());
                (
                    Some("jplus-size"),
                    Some(c),
                    Some(jplus_size_bound(seq, spec.x, y, m, c)),
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KqSplit {
    pub i: MultiIndex,
    pub m: usize,
    pub j: MultiIndex,
}

/// Splits `k in J(x)` as `k = (i, j)` with `i in J-(x;y)` and `j in J+(x,m;y)`.
pub fn kq_decompose(seq: &WeightSequence, x: f64, y: f64, k: &MultiIndex) -> Result<KqSplit> {
    if !(y > 2.0 && y < x) {
        return Err(Error::Parameter(format!(
            "need 2 < y < x, got y = {y}, x = {x}"
        )));
    }
    if !seq.weight_at_most(k, x) {
        return Err(Error::NotAMember {
            weight: seq.index_weight(k),
            x,
        });
    }
    let (i, j) = k.split_at_rank(seq.cutoff_rank(y));
    Ok(KqSplit { m: j.len(), i, j })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub weights: String,
    pub x: f64,
    pub m: usize,
    pub y: Option<f64>,
    pub source_size: u64,
    pub reduced_size: u64,
    pub target_size: u64,
    pub holds: bool,
    /// up to ten reduced indices missing from the target
    pub violations: Vec<MultiIndex>,
}

/// Checks `J(x,m)* ⊂ J(x^{(m-1)/m}, m-1)`, or the `J+` variant when `y` is
/// given.
pub fn verify_reduced_inclusion(
    seq: &WeightSequence,
    x: f64,
    m: usize,
    y: Option<f64>,
    cap: u64,
) -> Result<InclusionReport> {
    if m < 2 {
        return Err(Error::Parameter("reduced inclusion needs m >= 2".into()));
    }
    let family = if y.is_some() {
        Family::Jplus
    } else {
        Family::Jxm
    };
    let mut spec = WeightedFamilySpec::new(seq.clone(), family, x)
        .with_m(m)
        .with_cap(cap);
    spec.y = y;
    let source: Vec<MultiIndex> = enumerate_family(&spec)?.collect::<Result<_>>()?;
    let reduced = index::reduce(&source, m)?;

    let (lo, hi, _) = spec.walk_params();
    let limit = seq.threshold_root(x, (m - 1) as u32, m as u32, 0.0);
    let target: BTreeSet<MultiIndex> = walk(
        seq,
        limit,
        &MultiIndex::empty(),
        lo,
        hi,
        Length::Exact(m - 1),
        cap,
    )
    .collect::<Result<_>>()?;

    let violations: Vec<MultiIndex> = reduced
        .iter()
        .filter(|j| !target.contains(*j))
        .take(10)
        .cloned()
        .collect();
    Ok(InclusionReport {
        weights: seq.kind().to_string(),
        x,
        m,
        y,
        source_size: source.len() as u64,
        reduced_size: reduced.len() as u64,
        target_size: target.len() as u64,
        holds: violations.is_empty(),
        violations,
    })
}
