//! Empirical constants for the existential size bounds on prime index sets.
//!
//! These are not closed-form values. Each was measured by exhaustive
//! enumeration over `x <= 10^6` and rounded up; the unit tests below re-check
//! them on a smaller window. The table is versioned so reports can name the
//! values they used.

/// Version tag of this table; bump whenever a value changes.
pub const CONSTANTS_VERSION: &str = "empirical-1";

/// Additive constant `c` in `|J+(x,m;y)| <= x y^-m exp(y (log log x + c))`
/// for primes. On `x <= 10^6`, `2 < y < min(x, 2000)`, `m <= 20` the
/// smallest admissible value is about `-0.094`; the stored value keeps `c > 0`.
pub const PRIME_JPLUS_C: f64 = 0.01;

/// `C_m` in `|J(x,m)| <= C_m x / log x (log log x)^(m-1)` for primes,
/// `3 <= x <= 10^6`. `C_1` is the Rosser-Schoenfeld value at `x = 113`;
/// `C_2` peaks near the top of the window and is the least certain.
const LANDAU: [f64; 19] = [
    1.2551, 1.11, 0.5297, 0.1714, 4.806e-2, 1.179e-2, 2.621e-3, 5.400e-4, 1.047e-4, 1.927e-5,
    3.397e-6, 5.769e-7, 9.479e-8, 1.513e-8, 2.353e-9, 3.572e-10, 5.308e-11, 7.733e-12, 1.107e-12,
];

/// `C_m`; degrees past the table reuse the last entry, which dominates them
/// on the calibration window.
pub fn landau_constant(m: usize) -> f64 {
    match m {
        0 => 1.0,
        m if m <= LANDAU.len() => LANDAU[m - 1],
        _ => LANDAU[LANDAU.len() - 1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::{
        enumerate_family, jplus_size_bound, landau_shape, Family, WeightedFamilySpec,
    };
    use crate::weights::WeightSequence;

    /// `(weight, degree, first entry)` of every member of `J(x)`, by weight.
    fn members(x: u64) -> Vec<(u64, usize, u32)> {
        let seq = WeightSequence::primes();
        let spec = WeightedFamilySpec::new(seq.clone(), Family::Jx, x as f64);
        let mut v: Vec<_> = enumerate_family(&spec)
            .unwrap()
            .map(|j| {
                let j = j.unwrap();
                let w: u64 = j.entries().iter().map(|&e| seq.prime(e as usize)).product();
                (w, j.len(), j.first().unwrap_or(u32::MAX))
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn landau_table_holds_at_every_integer() {
        let top = 100_000u64;
        let items = members(top);
        let mut count = [0u64; 20];
        let mut next = 0;
        for x in 3..=top {
            while next < items.len() && items[next].0 <= x {
                count[items[next].1.min(19)] += 1;
                next += 1;
            }
            for (m, &c) in count.iter().enumerate().take(19).skip(1) {
                assert!(
                    c as f64 <= landau_constant(m) * landau_shape(x as f64, m),
                    "x={x} m={m}"
                );
            }
        }
    }

    #[test]
    fn prime_jplus_constant_holds() {
        let seq = WeightSequence::primes();
        let primes = crate::primes::table().with_count(40);
        let grid: Vec<u64> = (3..=300)
            .chain((0..60).map(|k| (300.0 * 1.07f64.powi(k)) as u64))
            .collect();
        let top = *grid.last().unwrap();
        let items = members(top);
        for &x in &grid {
            for l in 1..primes.len() {
                let (lo, hi) = (
                    (primes[l - 1] as f64).max(2.0 + 1e-9),
                    (primes[l] as f64).min(x as f64),
                );
                if lo >= hi {
                    break;
                }
                for m in 1..12 {
                    let n = items
                        .iter()
                        .take_while(|t| t.0 <= x)
                        .filter(|t| t.1 == m && t.2 as usize > l)
                        .count() as f64;
                    for t in 0..8 {
                        let y = lo + (hi - lo) * t as f64 / 8.0;
                        assert!(
                            n <= jplus_size_bound(&seq, x as f64, y, m, PRIME_JPLUS_C),
                            "x={x} y={y} m={m}"
                        );
                    }
                }
            }
        }
    }
}
