//! Lazily grown prime table backed by a segmented sieve of Eratosthenes.

use std::sync::{Arc, OnceLock};

use parking_lot::RwLock;

const SEGMENT: u64 = 1 << 18;
const INITIAL_LIMIT: u64 = 1 << 16;

#[derive(Debug)]
struct Inner {
    primes: Arc<Vec<u64>>,
    /// every prime `<= sieved_to` is in `primes`
    sieved_to: u64,
}

/// Shared, append-only table of primes. Readers receive immutable snapshots;
/// growth happens under a write lock and never invalidates earlier snapshots.
#[derive(Debug)]
pub struct PrimeTable {
    inner: RwLock<Inner>,
}

impl Default for PrimeTable {
    fn default() -> Self {
        Self::new()
    }
}

impl PrimeTable {
    pub fn new() -> Self {
        let primes = simple_sieve(INITIAL_LIMIT);
        PrimeTable {
            inner: RwLock::new(Inner {
                primes: Arc::new(primes),
                sieved_to: INITIAL_LIMIT,
            }),
        }
    }

    /// Snapshot holding at least `count` primes.
    pub fn with_count(&self, count: usize) -> Arc<Vec<u64>> {
        {
            let guard = self.inner.read();
            if guard.primes.len() >= count {
                return Arc::clone(&guard.primes);
            }
        }
        let mut guard = self.inner.write();
        while guard.primes.len() < count {
            let target = (guard.sieved_to * 2).max(guard.sieved_to + SEGMENT);
            extend(&mut guard, target);
        }
        Arc::clone(&guard.primes)
    }

    /// Snapshot containing every prime `<= limit`.
    pub fn up_to(&self, limit: u64) -> Arc<Vec<u64>> {
        {
            let guard = self.inner.read();
            if guard.sieved_to >= limit {
                return Arc::clone(&guard.primes);
            }
        }
        let mut guard = self.inner.write();
        if guard.sieved_to < limit {
            let target = limit.max(guard.sieved_to * 2);
            extend(&mut guard, target);
        }
        Arc::clone(&guard.primes)
    }

    /// The `k`-th prime, `p_1 = 2`.
    pub fn nth(&self, k: usize) -> u64 {
        assert!(k >= 1, "primes are indexed from 1");
        self.with_count(k)[k - 1]
    }
}

/// Process-wide prime table.
pub fn table() -> &'static PrimeTable {
    static TABLE: OnceLock<PrimeTable> = OnceLock::new();
    TABLE.get_or_init(PrimeTable::new)
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut k = i * i;
            while k <= n {
                composite[k] = true;
                k += i;
            }
        }
    }
    out
}

fn extend(inner: &mut Inner, target: u64) {
    let mut primes = Vec::clone(&inner.primes);
    let mut lo = inner.sieved_to + 1;
    let mut marks = vec![false; SEGMENT as usize];
    while lo <= target {
        let hi = (lo + SEGMENT - 1).min(target);
        let len = (hi - lo + 1) as usize;
        marks[..len].fill(false);
        // base primes up to sqrt(hi) are already present: lo > 2^16 and
        // segments are short enough that sqrt(hi) < lo
        for &p in primes.iter() {
            if p * p > hi {
                break;
            }
            let mut start = lo.div_ceil(p) * p;
            if start < p * p {
                start = p * p;
            }
            let mut k = start;
            while k <= hi {
                marks[(k - lo) as usize] = true;
                k += p;
            }
        }
        primes.extend(
            marks[..len]
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| lo + i as u64),
        );
        lo = hi + 1;
    }
    inner.sieved_to = target;
    inner.primes = Arc::new(primes);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime_trial(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn first_primes() {
        let t = PrimeTable::new();
        assert_eq!(t.nth(1), 2);
        assert_eq!(t.nth(4), 7);
        assert_eq!(t.nth(10_000), 104_729);
    }

    #[test]
    fn matches_trial_division_across_segments() {
        let t = PrimeTable::new();
        let snap = t.with_count(10_000);
        let oracle: Vec<u64> = (2..).filter(|&n| is_prime_trial(n)).take(10_000).collect();
        assert_eq!(&snap[..10_000], &oracle[..]);
        // a window well past the initial simple sieve
        let snap = t.up_to(1_200_000);
        let window: Vec<u64> = snap
            .iter()
            .copied()
            .filter(|&p| (1_000_000..1_200_000).contains(&p))
            .collect();
        let oracle: Vec<u64> = (1_000_000..1_200_000u64)
            .filter(|&n| is_prime_trial(n))
            .collect();
        assert_eq!(window, oracle);
    }

    #[test]
    fn concurrent_growth_is_consistent() {
        let t = Arc::new(PrimeTable::new());
        let handles: Vec<_> = (0..4)
            .map(|i| {
                let t = Arc::clone(&t);
                std::thread::spawn(move || t.nth(50_000 + i * 10_000))
            })
            .collect();
        let got: Vec<u64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let snap = t.with_count(80_000);
        for (i, p) in got.into_iter().enumerate() {
            assert_eq!(p, snap[50_000 + i * 10_000 - 1]);
        }
    }
}
