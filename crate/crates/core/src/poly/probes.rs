//! Partial sums over weighted index families: the direct sum against its
//! prefix/suffix decomposition, and blockwise sums for convergence probes.

use serde::{Deserialize, Serialize};

use super::sequence::{CoefficientSource, SequencePoint};
use crate::error::{Error, Result};
use crate::index::{MultiIndex, DEFAULT_CAP};
use crate::index_sets::{walk, Length};
use crate::sum::NeumaierSum;
use crate::weights::WeightSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KqSum {
    pub x: f64,
    pub y: f64,
    pub l: u32,
    pub direct: f64,
    pub decomposed: f64,
    /// `|J(x)|`
    pub terms: u64,
    /// `|J-(x;y)|`
    pub prefixes: u64,
    pub relative_gap: f64,
}

/// `sum_{q_k <= x} |c_k u_k|` computed over `J(x)` and again as
/// `sum_{i in J-} |u_i| sum_m sum_{j in J+(x,m;y), q_(i,j) <= x} |c_(i,j) u_j|`.
pub fn kq_sum<C>(
    coeffs: &C,
    u: &SequencePoint,
    seq: &WeightSequence,
    x: f64,
    y: f64,
) -> Result<KqSum>
where
    C: CoefficientSource + ?Sized,
{
    if !(y > 2.0 && y < x) {
        return Err(Error::Parameter(format!(
            "need 2 < y < x, got y = {y}, x = {x}"
        )));
    }
    let limit = seq.threshold(x, 0.0);
    let empty = MultiIndex::empty();

    let mut direct = NeumaierSum::new();
    let mut terms = 0u64;
    for k in walk(seq, limit, &empty, 1, u32::MAX, Length::Any, DEFAULT_CAP) {
        let k = k?;
        terms += 1;
        let c = coeffs.abs_coefficient(&k);
        if c != 0.0 {
            direct.add(c * u.index_modulus(&k)?);
        }
    }

    let l = seq.cutoff_rank(y);
    let mut decomposed = NeumaierSum::new();
    let mut prefixes = 0u64;
    for i in walk(seq, limit, &empty, 1, l, Length::Any, DEFAULT_CAP) {
        let i = i?;
        prefixes += 1;
        let ui = u.index_modulus(&i)?;
        for m in 0.. {
            let mut inner = NeumaierSum::new();
            let mut seen = false;
            for j in walk(
                seq,
                limit,
                &i,
                l + 1,
                u32::MAX,
                Length::Exact(m),
                DEFAULT_CAP,
            ) {
                let j = j?;
                seen = true;
                let k = i.concat(&j)?;
                let c = coeffs.abs_coefficient(&k);
                if c != 0.0 {
                    inner.add(c * u.index_modulus(&j)?);
                }
            }
            // suffix weights grow with m, so the first empty degree ends it
            if !seen {
                break;
            }
            decomposed.add(ui * inner.value());
        }
    }

    let (direct, decomposed) = (direct.value(), decomposed.value());
    let scale = direct.abs().max(decomposed.abs());
    let relative_gap = if scale == 0.0 {
        0.0
    } else {
        (direct - decomposed).abs() / scale
    };
    Ok(KqSum {
        x,
        y,
        l,
        direct,
        decomposed,
        terms,
        prefixes,
        relative_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub n: u32,
    /// exclusive lower end `base^n` (block 0 also holds `q = 1`)
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub sum: f64,
    pub cumulative: f64,
}

/// Sums `S_N = sum_{base^N < q_j <= base^{N+1}} |c_j u_j|` for `N = 0..=n_max`
/// with running totals.
pub fn block_partial_sums<C>(
    coeffs: &C,
    u: &SequencePoint,
    seq: &WeightSequence,
    base: f64,
    n_max: u32,
) -> Result<Vec<Block>>
where
    C: CoefficientSource + ?Sized,
{
    if !(base > 1.0) {
        return Err(Error::Parameter(format!("need base > 1, got {base}")));
    }
    let edges: Vec<f64> = (0..=n_max + 1).map(|k| base.powi(k as i32)).collect();
    let top = edges[n_max as usize + 1];
    let mut sums: Vec<NeumaierSum> = (0..=n_max).map(|_| NeumaierSum::new()).collect();
    let mut counts = vec![0u64; n_max as usize + 1];
    for j in walk(
        seq,
        seq.threshold(top, 0.0),
        &MultiIndex::empty(),
        1,
        u32::MAX,
        Length::Any,
        DEFAULT_CAP,
    ) {
        let j = j?;
        let w = seq.index_weight(&j);
        // first block whose upper edge holds w
        let b = edges[1..].partition_point(|&e| e < w).min(n_max as usize);
        counts[b] += 1;
        let c = coeffs.abs_coefficient(&j);
        if c != 0.0 {
            sums[b].add(c * u.index_modulus(&j)?);
        }
    }
    let mut running = NeumaierSum::new();
    Ok(sums
        .iter()
        .enumerate()
        .map(|(b, s)| {
            running.add(s.value());
            Block {
                n: b as u32,
                lo: edges[b],
                hi: edges[b + 1],
                count: counts[b],
                sum: s.value(),
                cumulative: running.value(),
            }
        })
        .collect())
}

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::{family_set, Family, WeightedFamilySpec};
    use crate::poly::polynomial::{random_polynomial, SparsePolynomial};
    use crate::poly::sequence::{weighted_sum, UnitCoefficients};
    use num_complex::Complex64;

    fn ones() -> SequencePoint {
        SequencePoint::Power {
            a: 0.0,
            b: 0.0,
            dim: usize::MAX,
        }
    }

    #[test]
    fn unit_fields_count_members() {
        let seq = WeightSequence::primes();
        let s = kq_sum(&UnitCoefficients::default(), &ones(), &seq, 30.0, 4.0).unwrap();
        assert_eq!(s.direct, 30.0);
        assert_eq!(s.decomposed, 30.0);
        assert_eq!(s.terms, 30);
    }

    #[test]
    fn single_coefficient() {
        let seq = WeightSequence::primes();
        let k = MultiIndex::new(vec![1, 2]).unwrap();
        let p = SparsePolynomial::monomial(k, Complex64::new(1.0, 0.0));
        let u: SequencePoint = "v:0.5,0.25,0.125".parse().unwrap();
        let s = kq_sum(&p, &u, &seq, 30.0, 2.5).unwrap();
        assert_eq!(s.direct, 0.125);
        assert_eq!(s.decomposed, 0.125);
    }

    #[test]
    fn random_fields_agree() {
        for seq in [
            WeightSequence::primes(),
            WeightSequence::klog(0.75).unwrap(),
        ] {
            let set = family_set(&WeightedFamilySpec::new(seq.clone(), Family::Jx, 100.0)).unwrap();
            let u: SequencePoint = "n:-0.6".parse().unwrap();
            for seed in 0..5 {
                let p = random_polynomial(&set, seed);
                for y in [3.0, 7.5, 20.0] {
                    let s = kq_sum(&p, &u, &seq, 100.0, y).unwrap();
                    assert!(s.relative_gap <= 1e-10, "{s:?}");
                }
            }
        }
    }

    #[test]
    fn blocks_telescope() {
        let seq = WeightSequence::primes();
        let u: SequencePoint = "n:-0.75:b=1.2".parse().unwrap();
        let blocks = block_partial_sums(&UnitCoefficients::default(), &u, &seq, 2.0, 9).unwrap();
        let set = family_set(&WeightedFamilySpec::new(seq, Family::Jx, 1024.0)).unwrap();
        let total = weighted_sum(&UnitCoefficients::default(), &u, &set).unwrap();
        let last = blocks.last().unwrap().cumulative;
        assert!((last - total).abs() <= 1e-13 * total);
        assert_eq!(blocks.iter().map(|b| b.count).sum::<u64>(), 1024);
    }

    #[test]
    fn linear_prime_blocks_match_prime_sums() {
        let seq = WeightSequence::primes();
        let u: SequencePoint = "p:-1".parse().unwrap();
        let unit = UnitCoefficients { degree: Some(1) };
        let blocks = block_partial_sums(&unit, &u, &seq, 2.0, 15).unwrap();
        let primes = crate::primes::table().up_to(1 << 16);
        for b in &blocks {
            let oracle: f64 = primes
                .iter()
                .filter(|&&p| (p as f64) > b.lo && (p as f64) <= b.hi)
                .map(|&p| 1.0 / p as f64)
                .sum();
            assert!((b.sum - oracle).abs() < 1e-12, "block {}", b.n);
        }
        // Mertens: block sums approach log(N+1) - log N
        for w in blocks[4..].windows(2) {
            assert!(w[1].sum < w[0].sum);
        }
    }

    #[test]
    fn slope_of_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        assert!((ols_slope(&xs, &ys) + 0.5).abs() < 1e-15);
    }
}
