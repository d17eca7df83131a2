use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::sum::ComplexSum;

/// Finitely supported polynomial `P = sum_j c_j z_j` with complex coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparsePolynomial {
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl SparsePolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from `(index, coefficient)` pairs, adding up repeated indices
    /// and dropping zero coefficients.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (j, c) in terms {
            *coeffs.entry(j).or_default() += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        SparsePolynomial { coeffs }
    }

    pub fn monomial(j: MultiIndex, c: Complex64) -> Self {
        Self::from_terms([(j, c)])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, j: &MultiIndex) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Common degree of all terms, if there is one.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut it = self.coeffs.keys().map(MultiIndex::len);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Largest variable index occurring.
    pub fn max_variable(&self) -> usize {
        self.coeffs
            .keys()
            .map(|j| j.max_entry() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `sum |c_j|`.
    pub fn coefficient_l1(&self) -> f64 {
        crate::sum::compensated_sum(self.coeffs.values().map(|c| c.norm()))
    }

    /// `P(u)` with compensated accumulation.
    pub fn evaluate(&self, u: &[Complex64]) -> Result<Complex64> {
        let need = self.max_variable();
        if need > u.len() {
            return Err(Error::Dimension {
                have: u.len(),
                need,
            });
        }
        let mut acc = ComplexSum::new();
        for (j, c) in &self.coeffs {
            acc.add(c * monomial_value(j, u));
        }
        Ok(acc.value())
    }

    /// Scales all coefficients.
    pub fn scaled(&self, factor: f64) -> SparsePolynomial {
        Self::from_terms(self.coeffs.iter().map(|(j, c)| (j.clone(), c * factor)))
    }

    /// `f_w` with `c_alpha(f_w) = w^alpha c_alpha(f)`, so `f_w(u) = f(u w)`.
    pub fn transfer_coefficients(&self, w: &[Complex64]) -> Result<SparsePolynomial> {
        let need = self.max_variable();
        if need > w.len() {
            return Err(Error::Dimension {
                have: w.len(),
                need,
            });
        }
        Ok(Self::from_terms(
            self.coeffs
                .iter()
                .map(|(j, c)| (j.clone(), c * monomial_value(j, w))),
        ))
    }

    /// `P_i`: the terms `c_{(i,j)} z_{(i,j)}` whose index consists of exactly
    /// the prefix `i` (entries `<= l`) followed by entries `> l` only.
    pub fn restrict_prefix(&self, i: &MultiIndex, l: u32) -> Result<SparsePolynomial> {
        if i.max_entry() > l {
            return Err(Error::Parameter(format!(
                "prefix {i} has entries above the cutoff l = {l}"
            )));
        }
        Ok(Self::from_terms(
            self.coeffs
                .iter()
                .filter(|(k, _)| k.split_at_rank(l).0 == *i)
                .map(|(k, c)| (k.clone(), *c)),
        ))
    }

    pub fn to_file(&self) -> PolynomialFile {
        PolynomialFile {
            degree: self.homogeneous_degree(),
            terms: self
                .coeffs
                .iter()
                .map(|(j, c)| TermRecord {
                    index: j.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_file(file: PolynomialFile) -> Result<Self> {
        let p = Self::from_terms(
            file.terms
                .into_iter()
                .map(|t| (t.index, Complex64::new(t.re, t.im))),
        );
        if let Some(d) = file.degree {
            if p.homogeneous_degree().is_some_and(|h| h != d)
                || (!p.is_empty() && p.homogeneous_degree().is_none())
            {
                return Err(Error::Format(format!(
                    "declared degree {d} does not match the terms"
                )));
            }
        }
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("polynomial serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PolynomialFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_file(file)
    }
}

/// `u_j = u_{j_1} ... u_{j_m}`; caller guarantees the dimension.
pub fn monomial_value(j: &MultiIndex, u: &[Complex64]) -> Complex64 {
    j.entries()
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &e| acc * u[e as usize - 1])
}

/// On-disk form: `{"degree": m|null, "terms": [{"index": [...], "re": .., "im": ..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialFile {
    pub degree: Option<usize>,
    pub terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub index: MultiIndex,
    pub re: f64,
    pub im: f64,
}

/// Coefficients `eps_j in {-1, +1}` drawn from a seeded stream, optionally
/// multiplied by the multiplicity `|j|`.
pub fn random_sign_polynomial<'a, I>(set: I, seed: u64, weighted: bool) -> SparsePolynomial
where
    I: IntoIterator<Item = &'a MultiIndex>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SparsePolynomial::from_terms(set.into_iter().map(|j| {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let scale = if weighted { j.multiplicity_f64() } else { 1.0 };
        (j.clone(), Complex64::new(sign * scale, 0.0))
    }))
}

/// Polynomial with i.i.d. coefficients, real and imaginary parts uniform in
/// `[-1, 1]`, on the given index set.
pub fn random_polynomial<'a, I>(set: I, seed: u64) -> SparsePolynomial
where
    I: IntoIterator<Item = &'a MultiIndex>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SparsePolynomial::from_terms(set.into_iter().map(|j| {
        let re = rng.gen_range(-1.0..=1.0);
        let im = rng.gen_range(-1.0..=1.0);
        (j.clone(), Complex64::new(re, im))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{enumerate_jmn, DEFAULT_CAP};

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        let p = SparsePolynomial::monomial(idx(&[1, 2]), c(1.0, 0.0));
        assert_eq!(
            p.evaluate(&[c(0.5, 0.0), c(0.25, 0.0)]).unwrap(),
            c(0.125, 0.0)
        );
        let q = SparsePolynomial::from_terms([
            (idx(&[1, 1]), c(1.0, 0.0)),
            (idx(&[2, 2]), c(1.0, 0.0)),
        ]);
        assert_eq!(
            q.evaluate(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap(),
            c(0.0, 0.0)
        );
        let full: Vec<_> = enumerate_jmn(3, 4, DEFAULT_CAP).unwrap().collect();
        let r = random_polynomial(&full, 3);
        assert_eq!(r.evaluate(&[c(0.0, 0.0); 4]).unwrap(), c(0.0, 0.0));
        assert!(matches!(
            r.evaluate(&[c(1.0, 0.0); 3]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn zero_terms_dropped_and_duplicates_merged() {
        let p = SparsePolynomial::from_terms([
            (idx(&[1]), c(1.0, 0.0)),
            (idx(&[1]), c(-1.0, 0.0)),
            (idx(&[2]), c(2.0, 0.0)),
            (idx(&[2]), c(0.5, 1.0)),
        ]);
        assert_eq!(p.len(), 1);
        assert_eq!(p.coefficient(&idx(&[2])), c(2.5, 1.0));
    }

    #[test]
    fn transfer_examples() {
        let f = SparsePolynomial::monomial(idx(&[1, 2]), c(1.0, 0.0));
        let g = f
            .transfer_coefficients(&[c(2.0, 0.0), c(3.0, 0.0)])
            .unwrap();
        assert_eq!(g.coefficient(&idx(&[1, 2])), c(6.0, 0.0));
        let ones = vec![c(1.0, 0.0); 3];
        let full: Vec<_> = enumerate_jmn(2, 3, DEFAULT_CAP).unwrap().collect();
        let r = random_polynomial(&full, 9);
        assert_eq!(r.transfer_coefficients(&ones).unwrap(), r);
    }

    #[test]
    fn restrict_examples() {
        let p = SparsePolynomial::from_terms([
            (idx(&[1, 3]), c(1.0, 0.0)),
            (idx(&[2, 3]), c(1.0, 0.0)),
        ]);
        let p1 = p.restrict_prefix(&idx(&[1]), 2).unwrap();
        assert_eq!(p1, SparsePolynomial::monomial(idx(&[1, 3]), c(1.0, 0.0)));
        let q = SparsePolynomial::monomial(idx(&[1, 2]), c(1.0, 0.0));
        assert!(q
            .restrict_prefix(&MultiIndex::empty(), 2)
            .unwrap()
            .is_empty());
        assert!(q.restrict_prefix(&idx(&[3]), 2).is_err());
    }

    #[test]
    fn json_file_format() {
        let p = SparsePolynomial::from_terms([
            (idx(&[1, 2]), c(1.5, -2.0)),
            (idx(&[2, 2]), c(0.0, 1.0)),
        ]);
        let text = p.to_json();
        assert_eq!(
            text,
            r#"{"degree":2,"terms":[{"index":[1,2],"re":1.5,"im":-2.0},{"index":[2,2],"re":0.0,"im":1.0}]}"#
        );
        assert_eq!(SparsePolynomial::from_json(&text).unwrap(), p);
        let mixed =
            r#"{"degree":null,"terms":[{"index":[],"re":1,"im":0},{"index":[3],"re":2,"im":0}]}"#;
        let q = SparsePolynomial::from_json(mixed).unwrap();
        assert_eq!(q.homogeneous_degree(), None);
        let bad = r#"{"degree":3,"terms":[{"index":[1],"re":1,"im":0}]}"#;
        assert!(SparsePolynomial::from_json(bad).is_err());
        assert!(SparsePolynomial::from_json(
            r#"{"degree":1,"terms":[{"index":[2,1],"re":1,"im":0}]}"#
        )
        .is_err());
    }

    #[test]
    fn random_signs_are_deterministic() {
        let set: Vec<_> = enumerate_jmn(2, 5, DEFAULT_CAP).unwrap().collect();
        let a = random_sign_polynomial(&set, 42, false);
        let b = random_sign_polynomial(&set, 42, false);
        assert_eq!(a, b);
        assert_eq!(a.len(), set.len());
        assert!(a.terms().all(|(_, c)| c.im == 0.0 && c.re.abs() == 1.0));
        let w = random_sign_polynomial(&set, 42, true);
        for (j, cw) in w.terms() {
            assert_eq!(cw.re.abs(), j.multiplicity_f64());
            assert_eq!(cw.re.signum(), a.coefficient(j).re.signum());
        }
    }
}
