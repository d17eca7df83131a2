//! Multi-indices `j = (j_1 <= ... <= j_m)` and their exponent vectors.
//!
//! A [`MultiIndex`] names the monomial `z_{j_1} ... z_{j_m}`; the equivalent
//! [`ExponentVector`] `alpha` counts how often every variable occurs. Both are
//! plain values ordered lexicographically, so `BTreeSet<MultiIndex>` is the
//! canonical representation of an index set.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of elements an enumeration may produce.
pub const DEFAULT_CAP: u64 = 100_000_000;

/// Nondecreasing tuple of positive integers. The empty tuple is the index of
/// length zero, with `z_() = 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn new(entries: Vec<u32>) -> Result<Self> {
        let valid =
            entries.first().map_or(true, |&e| e >= 1) && entries.windows(2).all(|w| w[0] <= w[1]);
        if valid {
            Ok(MultiIndex(entries))
        } else {
            Err(Error::InvalidIndex(entries))
        }
    }

    /// Sorts arbitrary positive entries into a multi-index.
    pub fn from_unsorted(mut entries: Vec<u32>) -> Result<Self> {
        entries.sort_unstable();
        Self::new(entries)
    }

    pub(crate) fn from_sorted_unchecked(entries: Vec<u32>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0] <= w[1]));
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// The degree `m`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// Largest variable occurring, 0 for the empty index.
    pub fn max_entry(&self) -> u32 {
        self.last().unwrap_or(0)
    }

    pub fn to_exponent(&self) -> ExponentVector {
        let mut alpha = vec![0u32; self.max_entry() as usize];
        for &e in &self.0 {
            alpha[e as usize - 1] += 1;
        }
        ExponentVector(alpha)
    }

    /// Number of distinct orderings, `m! / alpha!`.
    pub fn multiplicity(&self) -> BigUint {
        let mut total = BigUint::one();
        let mut seen = 0u64;
        for run in runs(&self.0) {
            for t in 1..=run as u64 {
                total *= seen + t;
                total /= t;
            }
            seen += run as u64;
        }
        total
    }

    /// Multiplicity as a float; saturates to infinity for huge values.
    pub fn multiplicity_f64(&self) -> f64 {
        self.multiplicity().to_f64().unwrap_or(f64::INFINITY)
    }

    /// `(self, other)`; requires every entry of `self` to be at most every
    /// entry of `other`.
    pub fn concat(&self, other: &MultiIndex) -> Result<MultiIndex> {
        match (self.last(), other.first()) {
            (Some(a), Some(b)) if a > b => Err(Error::OrderViolation {
                left_max: a,
                right_min: b,
            }),
            _ => {
                let mut v = Vec::with_capacity(self.len() + other.len());
                v.extend_from_slice(&self.0);
                v.extend_from_slice(&other.0);
                Ok(MultiIndex(v))
            }
        }
    }

    /// Splits into the entries `<= l` and the entries `> l`.
    pub fn split_at_rank(&self, l: u32) -> (MultiIndex, MultiIndex) {
        let cut = self.0.partition_point(|&e| e <= l);
        (
            MultiIndex(self.0[..cut].to_vec()),
            MultiIndex(self.0[cut..].to_vec()),
        )
    }

    /// Drops the last entry.
    pub fn prefix(&self) -> Option<MultiIndex> {
        if self.0.is_empty() {
            None
        } else {
            Some(MultiIndex(self.0[..self.0.len() - 1].to_vec()))
        }
    }
}

fn runs(entries: &[u32]) -> impl Iterator<Item = usize> + '_ {
    let mut i = 0;
    std::iter::from_fn(move || {
        if i >= entries.len() {
            return None;
        }
        let start = i;
        while i < entries.len() && entries[i] == entries[start] {
            i += 1;
        }
        Some(i - start)
    })
}

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        MultiIndex::new(v)
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(j: MultiIndex) -> Self {
        j.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Exponent vector `alpha` with `alpha_r = #{q : j_q = r}`. Trailing zeros
/// are dropped so that equal vectors compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<u32>", into = "Vec<u32>")]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(mut alpha: Vec<u32>) -> Self {
        while alpha.last() == Some(&0) {
            alpha.pop();
        }
        ExponentVector(alpha)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// `|alpha|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of variables up to the last nonzero exponent.
    pub fn support_len(&self) -> usize {
        self.0.len()
    }

    pub fn to_index(&self) -> MultiIndex {
        let mut v = Vec::with_capacity(self.order() as usize);
        for (r, &a) in self.0.iter().enumerate() {
            v.extend(std::iter::repeat(r as u32 + 1).take(a as usize));
        }
        MultiIndex(v)
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(v: Vec<u32>) -> Self {
        ExponentVector::new(v)
    }
}

impl From<ExponentVector> for Vec<u32> {
    fn from(a: ExponentVector) -> Self {
        a.0
    }
}

pub fn to_exponent(j: &MultiIndex) -> ExponentVector {
    j.to_exponent()
}

pub fn from_exponent(alpha: &ExponentVector) -> MultiIndex {
    alpha.to_index()
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// `|J(m,n)| = binom(n+m-1, m)`.
pub fn jmn_cardinality(m: usize, n: usize) -> BigUint {
    if n == 0 {
        return if m == 0 {
            BigUint::one()
        } else {
            BigUint::default()
        };
    }
    binomial((n + m - 1) as u64, m as u64)
}

/// Lexicographic stream over `J(m,n)`, the nondecreasing `m`-tuples with
/// entries in `1..=n`.
#[derive(Debug, Clone)]
pub struct Jmn {
    n: u32,
    current: Option<Vec<u32>>,
}

/// Enumerates `J(m,n)`, failing fast when its cardinality exceeds `cap`.
pub fn enumerate_jmn(m: usize, n: usize, cap: u64) -> Result<Jmn> {
    if jmn_cardinality(m, n) > BigUint::from(cap) {
        return Err(Error::CapExceeded { cap });
    }
    let current = if n == 0 && m > 0 {
        None
    } else {
        Some(vec![1; m])
    };
    Ok(Jmn {
        n: n as u32,
        current,
    })
}

impl Iterator for Jmn {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let cur = self.current.as_mut()?;
        let out = MultiIndex(cur.clone());
        // advance: bump the rightmost entry below n and flatten the tail
        match cur.iter().rposition(|&e| e < self.n) {
            Some(pos) => {
                let v = cur[pos] + 1;
                for e in &mut cur[pos..] {
                    *e = v;
                }
            }
            None => self.current = None,
        }
        Some(out)
    }
}

/// The reduced set `J* = { j : (j,k) in J for some k >= j_{m-1} }`.
///
/// All members of `set` must have length `m >= 1`.
pub fn reduce<'a, I>(set: I, m: usize) -> Result<BTreeSet<MultiIndex>>
where
    I: IntoIterator<Item = &'a MultiIndex>,
{
    if m == 0 {
        return Err(Error::Parameter("reduced sets need m >= 1".into()));
    }
    let mut out = BTreeSet::new();
    for j in set {
        if j.len() != m {
            return Err(Error::MixedLengths {
                expected: m,
                found: j.len(),
            });
        }
        // nondecreasing storage makes the last entry the suffix extension k
        out.insert(MultiIndex(j.0[..m - 1].to_vec()));
    }
    Ok(out)
}

pub fn concat(i: &MultiIndex, j: &MultiIndex) -> Result<MultiIndex> {
    i.concat(j)
}

/// One-variable powers `z_1^j` for `j < n`, starting with the empty index.
pub fn powers(n: usize) -> BTreeSet<MultiIndex> {
    (0..n).map(|j| MultiIndex(vec![1; j])).collect()
}

/// Parses a set description: `powers:N`, `full:M,N` or `list:1.1.2;2.3`
/// (entries separated by `.`, indices by `;`, `e` for the empty index).
pub fn parse_set(text: &str, cap: u64) -> Result<BTreeSet<MultiIndex>> {
    let bad = || Error::Parameter(format!("cannot parse index set `{text}`"));
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    match kind {
        "powers" => Ok(powers(rest.trim().parse().map_err(|_| bad())?)),
        "full" => {
            let (m, n) = rest.split_once(',').ok_or_else(bad)?;
            let m: usize = m.trim().parse().map_err(|_| bad())?;
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            Ok(enumerate_jmn(m, n, cap)?.collect())
        }
        "list" => rest
            .split(';')
            .map(|item| {
                let item = item.trim();
                if item == "e" || item.is_empty() {
                    return Ok(MultiIndex::empty());
                }
                let entries = item
                    .split('.')
                    .map(|e| e.trim().parse::<u32>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                MultiIndex::from_unsorted(entries)
            })
            .collect(),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn set_descriptions() {
        assert_eq!(parse_set("powers:3", 10).unwrap(), powers(3));
        assert_eq!(parse_set("full:2,3", 10).unwrap().len(), 6);
        let l = parse_set("list:2.1;e;3", 10).unwrap();
        assert!(
            l.contains(&idx(&[1, 2])) && l.contains(&MultiIndex::empty()) && l.contains(&idx(&[3]))
        );
        assert!(parse_set("full:9,9", 10).is_err());
        assert!(parse_set("ring:3", 10).is_err());
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(idx(&[1, 1, 2]).to_exponent().as_slice(), &[2, 1]);
        assert_eq!(MultiIndex::empty().to_exponent().as_slice(), &[] as &[u32]);
        assert_eq!(idx(&[2, 2, 2]).to_exponent().as_slice(), &[0, 3]);
        assert_eq!(
            from_exponent(&ExponentVector::new(vec![2, 1])),
            idx(&[1, 1, 2])
        );
        assert_eq!(
            from_exponent(&ExponentVector::new(vec![0, 0, 1])),
            idx(&[3])
        );
        assert_eq!(
            from_exponent(&ExponentVector::new(vec![])),
            MultiIndex::empty()
        );
        assert_eq!(
            ExponentVector::new(vec![1, 0, 0]),
            ExponentVector::new(vec![1])
        );
    }

    fn distinct_permutations(v: &[u32]) -> usize {
        fn rec(rest: &mut Vec<u32>, cur: &mut Vec<u32>, out: &mut BTreeSet<Vec<u32>>) {
            if rest.is_empty() {
                out.insert(cur.clone());
                return;
            }
            for i in 0..rest.len() {
                let e = rest.remove(i);
                cur.push(e);
                rec(rest, cur, out);
                cur.pop();
                rest.insert(i, e);
            }
        }
        let mut out = BTreeSet::new();
        rec(&mut v.to_vec(), &mut Vec::new(), &mut out);
        out.len()
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(idx(&[1, 2]).multiplicity(), BigUint::from(2u32));
        assert_eq!(idx(&[1, 1]).multiplicity(), BigUint::from(1u32));
        assert_eq!(distinct_permutations(&[1, 1, 2]), 3);
        assert_eq!(idx(&[1, 1, 2]).multiplicity(), BigUint::from(3u32));
        assert_eq!(MultiIndex::empty().multiplicity(), BigUint::from(1u32));
        for j in enumerate_jmn(5, 3, DEFAULT_CAP).unwrap() {
            let brute = distinct_permutations(j.entries());
            assert_eq!(j.multiplicity(), BigUint::from(brute));
            assert_eq!(j.multiplicity_f64(), brute as f64);
        }
    }

    #[test]
    fn multiplicity_beyond_u64() {
        // 25! / 1 for 25 distinct entries
        let j = MultiIndex::new((1..=25).collect()).unwrap();
        let fact: BigUint = (1u32..=25).map(BigUint::from).product();
        assert_eq!(j.multiplicity(), fact);
        assert!(u64::try_from(j.multiplicity()).is_err());
    }

    #[test]
    fn jmn_matches_filtered_brute_force() {
        let got: Vec<_> = enumerate_jmn(2, 3, DEFAULT_CAP).unwrap().collect();
        let mut brute = Vec::new();
        for a in 1..=3u32 {
            for b in 1..=3u32 {
                if a <= b {
                    brute.push(idx(&[a, b]));
                }
            }
        }
        assert_eq!(got, brute);
        assert_eq!(got.len(), 6);
        let zero: Vec<_> = enumerate_jmn(0, 5, DEFAULT_CAP).unwrap().collect();
        assert_eq!(zero, vec![MultiIndex::empty()]);
    }

    #[test]
    fn jmn_cap() {
        assert_eq!(
            enumerate_jmn(10, 10, 1000).unwrap_err(),
            Error::CapExceeded { cap: 1000 }
        );
    }

    #[test]
    fn reduce_examples() {
        let j = [idx(&[1, 1]), idx(&[1, 2])];
        assert_eq!(reduce(&j, 2).unwrap(), BTreeSet::from([idx(&[1])]));
        let j = [idx(&[1, 1]), idx(&[2, 2])];
        assert_eq!(
            reduce(&j, 2).unwrap(),
            BTreeSet::from([idx(&[1]), idx(&[2])])
        );
        let full: Vec<_> = enumerate_jmn(2, 3, DEFAULT_CAP).unwrap().collect();
        let expect: BTreeSet<_> = enumerate_jmn(1, 3, DEFAULT_CAP).unwrap().collect();
        assert_eq!(reduce(&full, 2).unwrap(), expect);
        let mixed = [idx(&[1, 1]), idx(&[1])];
        assert!(matches!(reduce(&mixed, 2), Err(Error::MixedLengths { .. })));
    }

    #[test]
    fn concat_examples() {
        assert_eq!(
            idx(&[1, 2]).concat(&idx(&[3, 3])).unwrap(),
            idx(&[1, 2, 3, 3])
        );
        assert_eq!(
            MultiIndex::empty().concat(&idx(&[2, 5])).unwrap(),
            idx(&[2, 5])
        );
        assert_eq!(
            idx(&[2, 5]).concat(&MultiIndex::empty()).unwrap(),
            idx(&[2, 5])
        );
        assert_eq!(
            idx(&[1, 1]).concat(&idx(&[1, 2])).unwrap(),
            idx(&[1, 1, 1, 2])
        );
        assert_eq!(
            idx(&[2, 2]).concat(&idx(&[1, 3])).unwrap_err(),
            Error::OrderViolation {
                left_max: 2,
                right_min: 1
            }
        );
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(MultiIndex::new(vec![2, 1]).is_err());
        assert!(MultiIndex::new(vec![0, 1]).is_err());
    }

    #[test]
    fn json_form() {
        assert_eq!(serde_json::to_string(&idx(&[1, 1, 2])).unwrap(), "[1,1,2]");
        assert_eq!(serde_json::to_string(&MultiIndex::empty()).unwrap(), "[]");
        let back: MultiIndex = serde_json::from_str("[1,1,2]").unwrap();
        assert_eq!(back, idx(&[1, 1, 2]));
        assert!(serde_json::from_str::<MultiIndex>("[3,1]").is_err());
    }

    #[test]
    fn split_and_prefix() {
        let (i, j) = idx(&[1, 2, 3]).split_at_rank(2);
        assert_eq!((i, j), (idx(&[1, 2]), idx(&[3])));
        assert_eq!(idx(&[1, 2, 3]).prefix(), Some(idx(&[1, 2])));
        assert_eq!(MultiIndex::empty().prefix(), None);
    }
}
