//! Coefficient inequalities checked against certified norm majorants.
//!
//! Every right-hand side uses `SupNormEstimate::upper`, which dominates the
//! true norm, so a reported violation can only come from a defect in the
//! code, never from the optimizer missing the maximum.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ball::{BallSpec, Exponent};
use super::polynomial::{monomial_value, SparsePolynomial};
use super::supnorm::{monomial_sup_norm, SupNormEstimate};
use crate::bounds::constant_cmr;
use crate::error::{Error, Result};
use crate::index::{self, MultiIndex};
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyEntry {
    pub index: MultiIndex,
    pub abs_coefficient: f64,
    /// `(m^m / alpha^alpha)^{1/r} * upper`
    pub bound: f64,
    /// `e^{m/r} |j|^{1/r} * upper`
    pub multiplicity_bound: f64,
    /// `|c| / ((m^m / alpha^alpha)^{1/r} * lower)`; at most 1 means the
    /// inequality is confirmed even against the lower estimate
    pub ratio_to_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub inequality: String,
    pub r: Exponent,
    pub degree: usize,
    pub norm_upper: f64,
    pub norm_lower: f64,
    pub entries: Vec<CauchyEntry>,
    pub worst_ratio: f64,
    pub holds: bool,
}

/// `|c_alpha| <= (m^m/alpha^alpha)^{1/r} ||P||` and
/// `|c_j| <= e^{m/r} |j|^{1/r} ||P||` for every coefficient.
pub fn cauchy_bound_check(
    p: &SparsePolynomial,
    spec: &BallSpec,
    norm: &SupNormEstimate,
) -> Result<CauchyReport> {
    let degree = p.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
    let m = degree as f64;
    let inv_r = spec.r.recip();
    let mut entries = Vec::with_capacity(p.len());
    let mut holds = true;
    let mut worst_ratio = 0.0f64;
    for (j, c) in p.terms() {
        let cauchy = 1.0 / monomial_sup_norm(spec.r, &j.to_exponent());
        let bound = cauchy * norm.upper;
        let multiplicity_bound = (m * inv_r).exp() * j.multiplicity_f64().powf(inv_r) * norm.upper;
        let abs = c.norm();
        holds &= abs <= bound && abs <= multiplicity_bound;
        worst_ratio = worst_ratio.max(abs / bound);
        entries.push(CauchyEntry {
            index: j.clone(),
            abs_coefficient: abs,
            bound,
            multiplicity_bound,
            ratio_to_lower: abs / (cauchy * norm.lower),
        });
    }
    Ok(CauchyReport {
        inequality: "cauchy-coefficient".into(),
        r: spec.r,
        degree,
        norm_upper: norm.upper,
        norm_lower: norm.lower,
        entries,
        worst_ratio,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedEntry {
    /// prefix `j` of length `m-1` (r <= 2) or the last entry `k` (r = inf)
    pub key: MultiIndex,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedReport {
    pub inequality: String,
    pub r: Exponent,
    pub degree: usize,
    pub norm_upper: f64,
    pub entries: Vec<MixedEntry>,
    /// smallest `rhs - lhs`
    pub min_margin: f64,
    pub holds: bool,
}

/// Mixed-norm coefficient inequalities.
///
/// For `r <= 2`, per prefix `j`:
/// `(sum_{k >= j_{m-1}} |c_{(j,k)}|^{r'})^{1/r'} <= m e^{1+(m-1)/r} |j|^{1/r} ||P||`.
/// For `r = inf`, one inequality:
/// `sum_k (sum_{j_{m-1} <= k} |c_{(j,k)}|^2)^{1/2} <= e m 2^{(m-1)/2} ||P||`.
pub fn mixed_norm_check(
    p: &SparsePolynomial,
    spec: &BallSpec,
    norm: &SupNormEstimate,
) -> Result<MixedReport> {
    let degree = p.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
    if degree < 2 {
        return Err(Error::Parameter(
            "mixed-norm inequalities need degree >= 2".into(),
        ));
    }
    let m = degree as f64;
    let e = std::f64::consts::E;
    let (inequality, entries) = match spec.r {
        Exponent::Finite(r) if r <= 2.0 => {
            let conj = spec.r.conjugate();
            let mut groups: BTreeMap<MultiIndex, Vec<f64>> = BTreeMap::new();
            for (k, c) in p.terms() {
                groups
                    .entry(k.prefix().expect("degree >= 2"))
                    .or_default()
                    .push(c.norm());
            }
            let factor = m * (1.0 + (m - 1.0) / r).exp();
            let entries: Vec<MixedEntry> = groups
                .into_iter()
                .map(|(j, moduli)| {
                    let lhs = conj.norm(moduli);
                    let rhs = factor * j.multiplicity_f64().powf(1.0 / r) * norm.upper;
                    MixedEntry { key: j, lhs, rhs }
                })
                .collect();
            ("mixed-prefix", entries)
        }
        Exponent::Infinity => {
            let mut groups: BTreeMap<u32, NeumaierSum> = BTreeMap::new();
            for (k, c) in p.terms() {
                groups
                    .entry(k.last().expect("degree >= 2"))
                    .or_default()
                    .add(c.norm_sqr());
            }
            let lhs: NeumaierSum = groups.values().map(|s| s.value().sqrt()).collect();
            let rhs = e * m * 2f64.powf((m - 1.0) / 2.0) * norm.upper;
            (
                "mixed-polydisc",
                vec![MixedEntry {
                    key: MultiIndex::empty(),
                    lhs: lhs.value(),
                    rhs,
                }],
            )
        }
        Exponent::Finite(r) => {
            return Err(Error::NotApplicable(format!(
                "no mixed-norm inequality is available for 2 < r < inf (r = {r})"
            )))
        }
    };
    let min_margin = entries
        .iter()
        .map(|e| e.rhs - e.lhs)
        .fold(f64::INFINITY, f64::min);
    Ok(MixedReport {
        inequality: inequality.into(),
        r: spec.r,
        degree,
        norm_upper: norm.upper,
        holds: entries.iter().all(|e| e.lhs <= e.rhs),
        entries,
        min_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThmMonomialReport {
    pub inequality: String,
    pub r: Exponent,
    pub degree: usize,
    pub set_size: usize,
    pub reduced_size: usize,
    pub constant: f64,
    pub sigma: f64,
    pub u_norm: f64,
    pub norm_upper: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `sum_{j in J} |c_j| |u_j| <= C(m,r) |J*|^sigma ||u||_r^m ||P||`.
pub fn thm_monomial_check(
    p: &SparsePolynomial,
    spec: &BallSpec,
    set: &BTreeSet<MultiIndex>,
    u: &[Complex64],
    norm: &SupNormEstimate,
) -> Result<ThmMonomialReport> {
    let degree = p.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
    if degree == 0 {
        return Err(Error::Parameter("degree must be at least 1".into()));
    }
    if let Some(bad) = set
        .iter()
        .find(|j| j.len() != degree || j.max_entry() as usize > spec.n)
    {
        return Err(Error::Parameter(format!(
            "index {bad} is not in J({degree},{})",
            spec.n
        )));
    }
    let need = set
        .iter()
        .map(|j| j.max_entry() as usize)
        .max()
        .unwrap_or(0);
    if need > u.len() {
        return Err(Error::Dimension {
            have: u.len(),
            need,
        });
    }
    let lhs: NeumaierSum = set
        .iter()
        .map(|j| p.coefficient(j).norm() * monomial_value(j, u).norm())
        .collect();
    let reduced_size = index::reduce(set, degree)?.len();
    let constant = constant_cmr(degree, spec.r);
    let sigma = spec.sigma();
    let u_norm = spec.norm(u);
    let rhs =
        constant * (reduced_size as f64).powf(sigma) * u_norm.powi(degree as i32) * norm.upper;
    let lhs = lhs.value();
    Ok(ThmMonomialReport {
        inequality: "monomial-sum".into(),
        r: spec.r,
        degree,
        set_size: set.len(),
        reduced_size,
        constant,
        sigma,
        u_norm,
        norm_upper: norm.upper,
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{enumerate_jmn, DEFAULT_CAP};
    use crate::poly::polynomial::random_polynomial;
    use crate::poly::supnorm::{sup_norm, SupNormBudget};

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn cauchy_equality_on_monomials() {
        for r in [
            Exponent::Finite(1.0),
            Exponent::Finite(2.5),
            Exponent::Infinity,
        ] {
            let p = SparsePolynomial::monomial(idx(&[1, 2, 2]), Complex64::new(0.0, 2.0));
            let spec = BallSpec::new(r, 2).unwrap();
            let norm = sup_norm(&p, &spec, &SupNormBudget::default()).unwrap();
            let rep = cauchy_bound_check(&p, &spec, &norm).unwrap();
            assert!(rep.holds);
            let e = &rep.entries[0];
            assert!((e.bound - e.abs_coefficient).abs() < 1e-9);
        }
    }

    #[test]
    fn cauchy_l1_product() {
        let p = SparsePolynomial::monomial(idx(&[1, 2]), one());
        let spec = BallSpec::new(Exponent::Finite(1.0), 2).unwrap();
        let norm = sup_norm(&p, &spec, &SupNormBudget::default()).unwrap();
        assert!((norm.upper - 0.25).abs() < 1e-12);
        let rep = cauchy_bound_check(&p, &spec, &norm).unwrap();
        assert!((rep.entries[0].bound - 1.0).abs() < 1e-11);
        assert!(rep.holds);
    }

    #[test]
    fn cauchy_random_degree_two() {
        let set: Vec<_> = enumerate_jmn(2, 4, DEFAULT_CAP).unwrap().collect();
        let spec = BallSpec::new(Exponent::Finite(2.0), 4).unwrap();
        for seed in 0..10 {
            let p = random_polynomial(&set, seed);
            let norm = sup_norm(&p, &spec, &SupNormBudget::default()).unwrap();
            assert!(cauchy_bound_check(&p, &spec, &norm).unwrap().holds);
        }
    }

    #[test]
    fn mixed_l1_product() {
        let p = SparsePolynomial::monomial(idx(&[1, 2]), one());
        let spec = BallSpec::new(Exponent::Finite(1.0), 2).unwrap();
        let norm = sup_norm(&p, &spec, &SupNormBudget::default()).unwrap();
        let rep = mixed_norm_check(&p, &spec, &norm).unwrap();
        assert_eq!(rep.entries.len(), 1);
        assert_eq!(rep.entries[0].lhs, 1.0);
        // m e^{1 + (m-1)/r} |j|^{1/r} ||P|| = 2 e^2 / 4
        let expect = 2.0 * std::f64::consts::E.powi(2) * 0.25;
        assert!((rep.entries[0].rhs - expect).abs() < 1e-9);
        assert!(rep.holds);
    }

    #[test]
    fn mixed_random_suites() {
        let set3: Vec<_> = enumerate_jmn(3, 5, DEFAULT_CAP).unwrap().collect();
        let spec = BallSpec::new(Exponent::Finite(1.5), 5).unwrap();
        for seed in 0..4 {
            let p = random_polynomial(&set3, seed);
            let norm = sup_norm(&p, &spec, &SupNormBudget::default()).unwrap();
            assert!(mixed_norm_check(&p, &spec, &norm).unwrap().holds);
        }
        let set2: Vec<_> = enumerate_jmn(2, 6, DEFAULT_CAP).unwrap().collect();
        let spec = BallSpec::new(Exponent::Infinity, 6).unwrap();
        for seed in 0..4 {
            let p = random_polynomial(&set2, seed);
            let norm = sup_norm(&p, &spec, &SupNormBudget::default()).unwrap();
            assert!(mixed_norm_check(&p, &spec, &norm).unwrap().holds);
        }
    }

    #[test]
    fn mixed_not_applicable_between_two_and_inf() {
        let p = SparsePolynomial::monomial(idx(&[1, 2]), one());
        let spec = BallSpec::new(Exponent::Finite(3.0), 2).unwrap();
        let norm = sup_norm(&p, &spec, &SupNormBudget::default()).unwrap();
        assert!(matches!(
            mixed_norm_check(&p, &spec, &norm),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn thm_monomial_singleton() {
        let j = idx(&[1, 3]);
        let p = SparsePolynomial::monomial(j.clone(), one());
        for r in [
            Exponent::Finite(1.0),
            Exponent::Finite(1.5),
            Exponent::Infinity,
        ] {
            let spec = BallSpec::new(r, 3).unwrap();
            let norm = sup_norm(&p, &spec, &SupNormBudget::default()).unwrap();
            let raw = [0.6, 0.3, 0.5];
            let scale = r.norm(raw);
            let u: Vec<Complex64> = raw.iter().map(|x| Complex64::new(x / scale, 0.0)).collect();
            let rep =
                thm_monomial_check(&p, &spec, &BTreeSet::from([j.clone()]), &u, &norm).unwrap();
            assert!((rep.lhs - monomial_value(&j, &u).norm()).abs() < 1e-15);
            assert_eq!(rep.reduced_size, 1);
            assert!(rep.holds);
        }
    }

    #[test]
    fn thm_monomial_full_set_uses_full_reduced_size() {
        let set: BTreeSet<_> = enumerate_jmn(3, 4, DEFAULT_CAP).unwrap().collect();
        let p = random_polynomial(&set, 5);
        let spec = BallSpec::new(Exponent::Infinity, 4).unwrap();
        let norm = sup_norm(&p, &spec, &SupNormBudget::default()).unwrap();
        let u = vec![one(); 4];
        let rep = thm_monomial_check(&p, &spec, &set, &u, &norm).unwrap();
        // |J(2,4)| = binom(5,2)
        assert_eq!(rep.reduced_size, 10);
        assert!(rep.holds);
    }
}
