//! Certified lower bounds for the unconditional basis constant of a
//! monomial set, from random sign polynomials.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ball::BallSpec;
use super::polynomial::{random_sign_polynomial, SparsePolynomial};
use super::supnorm::{sup_norm, sup_norm_upper, SupNormBudget};
use crate::error::{Error, Result};
use crate::index::MultiIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidonReport {
    pub set_size: usize,
    pub seeds: u64,
    /// `lower(sup_u sum_j |u_j|)`, equal to `|J|` on the polydisc
    pub numerator: f64,
    pub best_seed: u64,
    pub best_upper: f64,
    pub value: f64,
}

/// `max_seed lower(sup_u sum_j |c_j u_j|) / upper(||P_eps||)` over sign
/// polynomials `P_eps = sum_j eps_j z_j`. Each quotient is a lower bound for
/// the unconditional basis constant since the denominator is a majorant.
///
/// The result is at least 1, the constant of any nonempty set. Sets mixing
/// degrees are accepted; the quotient stays a valid lower bound.
pub fn sidon_lower_bound(
    set: &BTreeSet<MultiIndex>,
    spec: &BallSpec,
    seeds: u64,
    budget: &SupNormBudget,
) -> Result<SidonReport> {
    if set.is_empty() || seeds == 0 {
        return Err(Error::Parameter(
            "need a nonempty set and at least one seed".into(),
        ));
    }
    // on the polydisc the all-ones point gives sum_j |u_j| = |J| exactly
    let numerator = if spec.r.is_infinite() {
        set.len() as f64
    } else {
        let positive =
            SparsePolynomial::from_terms(set.iter().map(|j| (j.clone(), Complex64::new(1.0, 0.0))));
        sup_norm(&positive, spec, budget)?.lower
    };
    let uppers: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let p = random_sign_polynomial(set, budget.seed.wrapping_add(s), false);
            sup_norm_upper(&p, spec, budget)
        })
        .collect();
    let (best_seed, best_upper) =
        uppers
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (s, &v)| {
                if v < best.1 {
                    (s as u64, v)
                } else {
                    best
                }
            });
    Ok(SidonReport {
        set_size: set.len(),
        seeds,
        numerator,
        best_seed: budget.seed.wrapping_add(best_seed),
        best_upper,
        // a single monomial already gives the trivial bound 1
        value: (numerator / best_upper).max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ball::Exponent;

    fn set(v: &[&[u32]]) -> BTreeSet<MultiIndex> {
        v.iter()
            .map(|e| MultiIndex::new(e.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn singleton_is_one() {
        let spec = BallSpec::new(Exponent::Infinity, 3).unwrap();
        for j in [&[1u32, 1, 1][..], &[2, 3], &[3]] {
            let r = sidon_lower_bound(&set(&[j]), &spec, 10, &SupNormBudget::default()).unwrap();
            assert_eq!(r.value, 1.0);
        }
    }

    #[test]
    fn disjoint_pair_at_least_one() {
        let spec = BallSpec::new(Exponent::Infinity, 4).unwrap();
        let r = sidon_lower_bound(
            &set(&[&[1, 1], &[2, 2]]),
            &spec,
            20,
            &SupNormBudget::default(),
        )
        .unwrap();
        assert!(r.value >= 1.0 - 1e-12);
    }

    #[test]
    fn deterministic_across_pools() {
        let spec = BallSpec::new(Exponent::Infinity, 1).unwrap();
        let powers: BTreeSet<MultiIndex> = (0..8)
            .map(|j| MultiIndex::new(vec![1; j]).unwrap())
            .collect();
        let budget = SupNormBudget::default();
        let a = sidon_lower_bound(&powers, &spec, 16, &budget).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| sidon_lower_bound(&powers, &spec, 16, &budget).unwrap());
        assert_eq!(a, b);
        assert!(a.value > 1.0);
    }
}
