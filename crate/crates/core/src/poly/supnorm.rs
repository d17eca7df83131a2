//! Certified two-sided estimates of `||P||_inf` over the unit ball of `l_r^n`.
//!
//! The upper side is always a true majorant: the per-monomial exact norms
//! summed with the coefficient moduli, and, on the polydisc, a torus grid
//! maximum corrected by Bernstein's inequality. The lower side is the best
//! value found at explicit admissible points.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ball::{BallSpec, Exponent};
use super::polynomial::{monomial_value, SparsePolynomial};
use crate::error::{Error, Result};
use crate::index::{ExponentVector, MultiIndex};
use crate::sum::{ComplexSum, NeumaierSum};

/// Relative inflation of the coefficient majorant, covering rounding in the
/// closed-form monomial norms.
const UPPER_INFLATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNormBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Largest torus grid evaluated for the polydisc majorant.
    pub grid_points: usize,
    /// Target Bernstein loss `delta` of the torus majorant `max / (1 - delta)`.
    pub grid_delta: f64,
}

impl Default for SupNormBudget {
    fn default() -> Self {
        SupNormBudget {
            restarts: 64,
            iterations: 200,
            seed: 0,
            grid_points: 1 << 16,
            grid_delta: 1.0 / 16.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub coefficient_upper: f64,
    pub torus_upper: Option<f64>,
    pub witness: Vec<Complex64>,
}

/// `sup |z^alpha|` over the unit ball of `l_r^n`, `(alpha^alpha / m^m)^{1/r}`
/// with `0^0 = 1`; attained at `u = m^{-1/r} alpha^{1/r}`.
pub fn monomial_sup_norm(r: Exponent, alpha: &ExponentVector) -> f64 {
    let m = alpha.order() as f64;
    if m == 0.0 || r.is_infinite() {
        return 1.0;
    }
    let log: f64 = alpha
        .as_slice()
        .iter()
        .filter(|&&a| a > 0)
        .map(|&a| a as f64 * (a as f64 / m).ln())
        .sum();
    (log * r.recip()).exp()
}

/// The maximizer of `|z^alpha|` on the ball (all-ones on the polydisc).
pub fn monomial_maximizer(spec: &BallSpec, j: &MultiIndex) -> Vec<f64> {
    let alpha = j.to_exponent();
    let m = alpha.order() as f64;
    let mut u = vec![0.0; spec.n];
    match spec.r {
        Exponent::Infinity => u.iter_mut().for_each(|x| *x = 1.0),
        Exponent::Finite(r) => {
            if m == 0.0 {
                u[0] = 1.0;
            } else {
                for (k, &a) in alpha.as_slice().iter().enumerate() {
                    u[k] = (a as f64 / m).powf(1.0 / r);
                }
            }
        }
    }
    u
}

/// `sum_j |c_j| sup |z_j|`, a majorant of `||P||_inf`.
pub fn coefficient_upper(p: &SparsePolynomial, r: Exponent) -> f64 {
    let s: NeumaierSum = p
        .terms()
        .map(|(j, c)| c.norm() * monomial_sup_norm(r, &j.to_exponent()))
        .collect();
    s.value() * (1.0 + UPPER_INFLATION)
}

/// Polydisc majorant from a torus grid: with `N_i` points in variable `i`
/// and frequency width `d_i`, Bernstein's inequality gives
/// `||P|| <= max_grid |P| / (1 - sum_i pi d_i / (2 N_i))`.
/// Returns `(majorant, grid maximum, grid argmax)`, or `None` when the grid
/// would exceed the budget.
pub fn torus_upper(
    p: &SparsePolynomial,
    n: usize,
    budget: &SupNormBudget,
) -> Option<(f64, f64, Vec<Complex64>)> {
    if p.is_empty() {
        return Some((0.0, 0.0, vec![Complex64::new(1.0, 0.0); n]));
    }
    let mut min_exp = vec![u32::MAX; n];
    let mut max_exp = vec![0u32; n];
    for (j, _) in p.terms() {
        let alpha = j.to_exponent();
        for k in 0..n {
            let a = alpha.as_slice().get(k).copied().unwrap_or(0);
            min_exp[k] = min_exp[k].min(a);
            max_exp[k] = max_exp[k].max(a);
        }
    }
    let widths: Vec<u32> = (0..n).map(|k| max_exp[k] - min_exp[k]).collect();
    let active = widths.iter().filter(|&&d| d > 0).count().max(1) as f64;
    let sizes: Vec<usize> = widths
        .iter()
        .map(|&d| {
            if d == 0 {
                1
            } else {
                (PI * d as f64 * active / (2.0 * budget.grid_delta)).ceil() as usize
            }
        })
        .collect();
    let total = sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))?;
    if total > budget.grid_points {
        return None;
    }
    let delta: f64 = widths
        .iter()
        .zip(&sizes)
        .map(|(&d, &s)| PI * d as f64 / (2.0 * s as f64))
        .sum();

    // per-variable tables of unit roots
    let roots: Vec<Vec<Complex64>> = sizes
        .iter()
        .map(|&s| {
            (0..s)
                .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / s as f64))
                .collect()
        })
        .collect();
    let terms: Vec<(&MultiIndex, Complex64)> = p.terms().map(|(j, c)| (j, *c)).collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut point = vec![Complex64::new(1.0, 0.0); n];
    let mut digits = vec![0usize; n];
    for flat in 0..total {
        for k in 0..n {
            point[k] = roots[k][digits[k]];
        }
        let mut acc = ComplexSum::new();
        for (j, c) in &terms {
            acc.add(c * monomial_value(j, &point));
        }
        let v = acc.value().norm();
        if v > best.0 {
            best = (v, flat);
        }
        for k in 0..n {
            digits[k] += 1;
            if digits[k] < sizes[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    let mut rest = best.1;
    let witness: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = rest % sizes[k];
            rest /= sizes[k];
            roots[k][t]
        })
        .collect();
    let l1 = p.coefficient_l1();
    let rounding = 8.0 * f64::EPSILON * (terms.len() as f64 + 16.0) * l1;
    Some((best.0 / (1.0 - delta) + rounding, best.0, witness))
}

/// Certified majorant only (no ascent).
pub fn sup_norm_upper(p: &SparsePolynomial, spec: &BallSpec, budget: &SupNormBudget) -> f64 {
    let coeff = coefficient_upper(p, spec.r);
    match spec.r {
        Exponent::Infinity => torus_upper(p, spec.n, budget).map_or(coeff, |t| coeff.min(t.0)),
        _ => coeff,
    }
}

/// Two-sided estimate of `||P||_inf` on the unit ball of `l_r^n`.
///
/// Lower: the exact maximizer of every monomial, then multi-start projected
/// gradient ascent (`budget.restarts` starts, the first ones seeded at the
/// monomial maximizers). Deterministic for a fixed budget.
pub fn sup_norm(
    p: &SparsePolynomial,
    spec: &BallSpec,
    budget: &SupNormBudget,
) -> Result<SupNormEstimate> {
    let n = spec.n;
    if p.max_variable() > n {
        return Err(Error::Dimension {
            have: n,
            need: p.max_variable(),
        });
    }
    let coefficient_upper = coefficient_upper(p, spec.r);
    let torus = match spec.r {
        Exponent::Infinity => torus_upper(p, n, budget),
        _ => None,
    };
    let upper = torus
        .as_ref()
        .map_or(coefficient_upper, |t| coefficient_upper.min(t.0));

    let objective = Objective::new(p, n);
    let mut best = (0.0f64, vec![Complex64::new(0.0, 0.0); n]);
    if let Some((_, grid_max, w)) = &torus {
        best = (*grid_max, w.clone());
    }

    // seeds: the monomial maximizers with phases aligned to that monomial
    let seeds: Vec<Vec<Complex64>> = p
        .terms()
        .map(|(j, c)| {
            let moduli = monomial_maximizer(spec, j);
            let mut u: Vec<Complex64> = moduli.iter().map(|&m| Complex64::new(m, 0.0)).collect();
            if let Some(&e) = j.entries().first() {
                let k = e as usize - 1;
                let a = j.to_exponent().as_slice()[k] as f64;
                u[k] *= Complex64::from_polar(1.0, -c.arg() / a);
            }
            u
        })
        .collect();
    for u in &seeds {
        let v = objective.value(u);
        if v > best.0 {
            best = (v, u.clone());
        }
    }

    let restarts: Vec<(f64, Vec<Complex64>)> = (0..budget.restarts)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            rng.set_stream(t as u64 + 1);
            let start = if t < seeds.len() && t < budget.restarts / 2 {
                seeds[t].clone()
            } else {
                random_start(spec, &mut rng)
            };
            objective.ascend(spec, start, budget.iterations)
        })
        .collect();
    for (v, u) in restarts {
        if v > best.0 {
            best = (v, u);
        }
    }

    Ok(SupNormEstimate {
        lower: best.0,
        upper,
        coefficient_upper,
        torus_upper: torus.map(|t| t.0),
        witness: best.1,
    })
}

fn random_start(spec: &BallSpec, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let moduli: Vec<f64> = (0..spec.n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let scale = match spec.r {
        Exponent::Infinity => 1.0,
        r => r.norm(moduli.iter().copied()).max(f64::MIN_POSITIVE),
    };
    moduli
        .into_iter()
        .map(|m| Complex64::from_polar(m / scale, rng.gen_range(0.0..2.0 * PI)))
        .collect()
}

/// Retraction onto the ball: clamp moduli (polydisc) or rescale radially.
fn project(spec: &BallSpec, u: &mut [Complex64]) {
    match spec.r {
        Exponent::Infinity => {
            for z in u.iter_mut() {
                let m = z.norm();
                if m > 1.0 {
                    *z /= m;
                }
            }
        }
        r => {
            let norm = r.norm(u.iter().map(|z| z.norm()));
            if norm > 1.0 {
                for z in u.iter_mut() {
                    *z /= norm;
                }
            }
        }
    }
}

struct Objective<'a> {
    terms: Vec<(&'a MultiIndex, Complex64)>,
    n: usize,
    /// every variable occurs in at most one term
    disjoint: bool,
}

impl<'a> Objective<'a> {
    fn new(p: &'a SparsePolynomial, n: usize) -> Self {
        let terms: Vec<_> = p.terms().map(|(j, c)| (j, *c)).collect();
        let mut owner = vec![usize::MAX; n];
        let mut disjoint = true;
        for (t, (j, _)) in terms.iter().enumerate() {
            for &e in j.entries() {
                let k = e as usize - 1;
                if owner[k] != usize::MAX && owner[k] != t {
                    disjoint = false;
                }
                owner[k] = t;
            }
        }
        Objective { terms, n, disjoint }
    }

    fn eval(&self, u: &[Complex64]) -> Complex64 {
        let mut acc = ComplexSum::new();
        for (j, c) in &self.terms {
            acc.add(c * monomial_value(j, u));
        }
        acc.value()
    }

    fn value(&self, u: &[Complex64]) -> f64 {
        self.eval(u).norm()
    }

    fn gradient(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); self.n];
        let mut prefix = Vec::new();
        for (j, c) in &self.terms {
            let e = j.entries();
            prefix.clear();
            prefix.push(Complex64::new(1.0, 0.0));
            for &x in e {
                let last = *prefix.last().unwrap();
                prefix.push(last * u[x as usize - 1]);
            }
            let mut suffix = Complex64::new(1.0, 0.0);
            for t in (0..e.len()).rev() {
                g[e[t] as usize - 1] += c * prefix[t] * suffix;
                suffix *= u[e[t] as usize - 1];
            }
        }
        g
    }

    /// Rotates phases so that every term has the same argument; only valid
    /// when the terms live on disjoint variables.
    fn align(&self, u: &mut [Complex64]) {
        let target = self
            .terms
            .iter()
            .find(|(j, _)| j.is_empty())
            .map_or(0.0, |(_, c)| c.arg());
        for (j, c) in &self.terms {
            let Some(&first) = j.entries().first() else {
                continue;
            };
            let k = first as usize - 1;
            let current = (c * monomial_value(j, u)).arg();
            if u[k].norm() == 0.0 {
                continue;
            }
            let a = j.to_exponent().as_slice()[k] as f64;
            u[k] *= Complex64::from_polar(1.0, (target - current) / a);
        }
    }

    fn ascend(
        &self,
        spec: &BallSpec,
        mut u: Vec<Complex64>,
        iterations: usize,
    ) -> (f64, Vec<Complex64>) {
        project(spec, &mut u);
        if self.disjoint {
            self.align(&mut u);
        }
        let mut value = self.value(&u);
        let mut step = 0.25;
        let mut trial = u.clone();
        for _ in 0..iterations {
            let p = self.eval(&u);
            let phase = if p.norm() > 0.0 {
                p / p.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            let g = self.gradient(&u);
            let gnorm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if gnorm == 0.0 || !gnorm.is_finite() {
                break;
            }
            let mut improved = false;
            while step > 1e-12 {
                for k in 0..self.n {
                    trial[k] = u[k] + g[k].conj() * phase * (step / gnorm);
                }
                project(spec, &mut trial);
                if self.disjoint {
                    self.align(&mut trial);
                }
                let v = self.value(&trial);
                if v > value {
                    value = v;
                    std::mem::swap(&mut u, &mut trial);
                    step *= 1.5;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (value, u)
    }
}
