//! Closed-form bounds with their intermediate terms exposed.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::constants;
use crate::error::{Error, Result};
use crate::index_sets::jminus_size_bound;
use crate::poly::ball::Exponent;
use crate::weights::{g_theta, WeightSequence};

/// A bound value together with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, Value>,
    pub intermediates: BTreeMap<String, f64>,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(name: &str) -> Self {
        BoundReport {
            name: name.to_string(),
            inputs: BTreeMap::new(),
            intermediates: BTreeMap::new(),
            value: f64::NAN,
            notes: Vec::new(),
        }
    }

    fn input<V: Into<Value>>(mut self, key: &str, v: V) -> Self {
        self.inputs.insert(key.to_string(), v.into());
        self
    }

    fn term(&mut self, key: &str, v: f64) {
        self.intermediates.insert(key.to_string(), v);
    }
}

/// `C(m,r)`: `e m e^{(m-1)/r}` for `r <= 2`, `e m 2^{(m-1)/2}` otherwise.
pub fn constant_cmr(m: usize, r: Exponent) -> f64 {
    let m_f = m as f64;
    let e = std::f64::consts::E;
    if r.at_most_two() {
        e * m_f * ((m_f - 1.0) * r.recip()).exp()
    } else {
        e * m_f * 2f64.powf((m_f - 1.0) / 2.0)
    }
}

/// `log C(m,r)`, finite for every degree.
pub fn log_constant_cmr(m: usize, r: Exponent) -> f64 {
    let m_f = m as f64;
    let tail = if r.at_most_two() {
        (m_f - 1.0) * r.recip()
    } else {
        (m_f - 1.0) / 2.0 * std::f64::consts::LN_2
    };
    1.0 + m_f.ln() + tail
}

pub fn sigma(r: Exponent) -> f64 {
    r.sigma()
}

/// `sigma_m = (m-1)/m (1 - 1/r)`.
pub fn sigma_m(m: usize, r: Exponent) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let m = m as f64;
    (m - 1.0) / m * (1.0 - r.recip())
}

/// `C(m,r) |J*|^sigma`.
pub fn chi_upper(m: usize, r: Exponent, reduced_size: u64) -> f64 {
    constant_cmr(m, r) * (reduced_size as f64).powf(r.sigma())
}

pub fn constant_cmr_report(m: usize, r: Exponent) -> BoundReport {
    let mut rep = BoundReport::new("cmr")
        .input("m", m)
        .input("r", r.to_string());
    rep.term("sigma", r.sigma());
    rep.value = constant_cmr(m, r);
    if r == Exponent::Finite(2.0) {
        rep.term("alternative_r_ge_2", e_m_2(m));
        rep.notes.push("r = 2 uses the r <= 2 branch".into());
    }
    rep
}

fn e_m_2(m: usize) -> f64 {
    constant_cmr(m, Exponent::Infinity)
}

pub fn chi_upper_report(m: usize, r: Exponent, reduced_size: u64) -> BoundReport {
    let mut rep = BoundReport::new("chi_upper")
        .input("m", m)
        .input("r", r.to_string())
        .input("reduced_size", reduced_size);
    rep.term("cmr", constant_cmr(m, r));
    rep.term("sigma", r.sigma());
    rep.value = chi_upper(m, r, reduced_size);
    rep
}

pub fn sigma_m_report(m: usize, r: Exponent) -> BoundReport {
    let mut rep = BoundReport::new("sigma_m")
        .input("m", m)
        .input("r", r.to_string());
    rep.value = sigma_m(m, r);
    rep
}

/// Smallest `y` handed out when the formula falls to 2 or below.
pub const Y_FLOOR: f64 = 2.0 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YChoice {
    pub y: f64,
    pub formula: f64,
    pub clamped: bool,
}

/// `y = (log x)^{theta - 1/2} / log log x`, clamped into `(2, x)`.
pub fn recommended_y(x: f64, theta: f64) -> Result<YChoice> {
    if !(x > std::f64::consts::E.exp()) {
        return Err(Error::Domain(format!("need x > e^e, got {x}")));
    }
    if !(theta > 0.5 && theta <= 1.0) {
        return Err(Error::Parameter(format!(
            "need theta in (1/2, 1], got {theta}"
        )));
    }
    let formula = x.ln().powf(theta - 0.5) / x.ln().ln();
    let (y, clamped) = if formula <= 2.0 {
        (Y_FLOOR, true)
    } else if formula >= x {
        (x * (1.0 - 1e-12), true)
    } else {
        (formula, false)
    };
    Ok(YChoice {
        y,
        formula,
        clamped,
    })
}

/// Denominator used for the stationary point of `h_{x,y}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HVariant {
    /// `sqrt(log x / (log y - C))`
    Printed,
    /// `sqrt(log x / (log y - log C))`, the zero of `h'`
    #[default]
    LogC,
}

impl fmt::Display for HVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HVariant::Printed => "printed",
            HVariant::LogC => "logc",
        })
    }
}

impl FromStr for HVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(HVariant::Printed),
            "logc" => Ok(HVariant::LogC),
            _ => Err(Error::Parameter(format!("unknown h variant `{s}`"))),
        }
    }
}

/// `h_{x,y}(m) = m log C - log x / m - m log y`.
pub fn h_value(x: f64, y: f64, c: f64, m: f64) -> f64 {
    m * c.ln() - x.ln() / m - m * y.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HMax {
    pub variant: HVariant,
    pub m: f64,
    pub h: f64,
    /// best integer `m` in `1..=grid_top`
    pub grid_m: u64,
    pub grid_h: f64,
    pub grid_top: u64,
    /// `h(M) >= max over the integer grid` up to `1e-12`
    pub dominates_grid: bool,
}

pub fn h_maximizer(x: f64, y: f64, c: f64, variant: HVariant) -> Result<HMax> {
    if !(x > 1.0 && x.is_finite()) || !(y > 0.0) || !(c > 0.0) {
        return Err(Error::Domain(format!(
            "need x > 1, y > 0, C > 0; got x={x}, y={y}, C={c}"
        )));
    }
    let denom = match variant {
        HVariant::Printed => y.ln() - c,
        HVariant::LogC => y.ln() - c.ln(),
    };
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "denominator of the stationary point is {denom} (variant {variant})"
        )));
    }
    let m = (x.ln() / denom).sqrt();
    let h = h_value(x, y, c, m);
    let grid_top = ((2.0 * m).ceil() as u64).clamp(50, 1 << 20);
    let (grid_m, grid_h) = (1..=grid_top)
        .map(|k| (k, h_value(x, y, c, k as f64)))
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    Ok(HMax {
        variant,
        m,
        h,
        grid_m,
        grid_h,
        grid_top,
        dominates_grid: h + 1e-12 >= grid_h,
    })
}

pub fn h_maximizer_report(x: f64, y: f64, c: f64, variant: HVariant) -> Result<BoundReport> {
    let hm = h_maximizer(x, y, c, variant)?;
    let mut rep = BoundReport::new("h_max")
        .input("x", x)
        .input("y", y)
        .input("C", c)
        .input("variant", variant.to_string());
    rep.term("M", hm.m);
    rep.term("grid_m", hm.grid_m as f64);
    rep.term("grid_h", hm.grid_h);
    rep.value = hm.h;
    if !hm.dominates_grid {
        rep.notes.push("h(M) is below an integer grid value".into());
    }
    Ok(rep)
}

/// Explicit pre-asymptotic majorant of `sum_{q_k <= x} |c_k u_k| / ||f||`:
/// `(1 + log x / log q_1)^{l+1} max_m C(m,r) [x^{(m-1)/m} y^{1-m} exp(y (g + c))]^sigma`.
///
/// `c` defaults to `1/q_1 + 1/q_2 + 1/q_3` for klog weights and to the
/// calibrated constant for primes; primes use `g = log log x`.
pub fn kq_master_bound(
    seq: &WeightSequence,
    x: f64,
    y: f64,
    r: Exponent,
    c: Option<f64>,
) -> Result<BoundReport> {
    if !(y > 2.0 && x > y) {
        return Err(Error::Parameter(format!(
            "need x > y > 2, got x = {x}, y = {y}"
        )));
    }
    let theta = seq.theta();
    if !seq.is_primes() && theta <= 0.5 {
        return Err(Error::Parameter(format!("need theta > 1/2, got {theta}")));
    }
    let c = c.unwrap_or_else(|| {
        if seq.is_primes() {
            constants::PRIME_JPLUS_C
        } else {
            seq.head_reciprocal_constant()
        }
    });
    let sigma = r.sigma();
    let l = seq.cutoff_rank(y);
    let log_q1 = seq.term(1).ln();
    let degrees = (x.ln() / log_q1).floor().max(1.0) as usize;
    let g = g_theta(x, theta);

    // log of the per-m term, to stay finite for large degrees
    let log_term = |m: usize| {
        let mf = m as f64;
        let log_jplus = (mf - 1.0) / mf * x.ln() - (mf - 1.0) * y.ln() + y * (g + c);
        log_constant_cmr(m, r) + sigma * log_jplus
    };
    let (argmax, log_sup) =
        (1..=degrees)
            .map(|m| (m, log_term(m)))
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
    let log_head = (l as f64 + 1.0) * (1.0 + x.ln() / log_q1).ln();

    let mut rep = BoundReport::new("kq_master")
        .input("weights", seq.kind().to_string())
        .input("x", x)
        .input("y", y)
        .input("r", r.to_string())
        .input("c", c);
    rep.term("theta", theta);
    rep.term("sigma", sigma);
    rep.term("l", l as f64);
    rep.term("g", g);
    rep.term("degree_top", degrees as f64);
    rep.term("jminus_bound", jminus_size_bound(seq, x, l));
    rep.term("log_head", log_head);
    rep.term("argmax_m", argmax as f64);
    rep.term("log_sup", log_sup);
    rep.term("log_value", log_head + log_sup);
    rep.term("log_ratio_x_sigma", log_head + log_sup - sigma * x.ln());
    for m in 1..=degrees.min(64) {
        rep.term(&format!("log_term_m{m:02}"), log_term(m));
    }
    rep.value = (log_head + log_sup).exp();
    rep.notes.push("C(m,r) stands in for C^m".into());
    if seq.is_primes() {
        rep.notes.push(format!(
            "prime constant c is empirical ({})",
            constants::CONSTANTS_VERSION
        ));
    }
    Ok(rep)
}

/// Displayed `x`-dependence of the degree-`m` bound over primes, with the
/// unnamed constant set to 1.
pub fn polynomial_bound(m: usize, r: Exponent, x: f64) -> Result<BoundReport> {
    if !(x >= 3.0) || m == 0 {
        return Err(Error::Parameter(format!(
            "need x >= 3 and m >= 1, got x = {x}, m = {m}"
        )));
    }
    let mf = m as f64;
    let (lx, llx) = (x.ln(), x.ln().ln());
    let value = if r.at_most_two() {
        let s = 1.0 - r.recip();
        x.powf((mf - 1.0) / mf * s) * llx.powf((mf - 1.0) * s) / lx.powf(s)
    } else {
        x.powf((mf - 1.0) / (2.0 * mf)) / lx.powf((mf - 1.0) / 2.0)
    };
    let mut rep = BoundReport::new("polynomial")
        .input("m", m)
        .input("r", r.to_string())
        .input("x", x);
    rep.term("constant", 1.0);
    rep.term("sigma_m", sigma_m(m, r));
    rep.value = value;
    rep.notes
        .push("unnormalized: multiplicative constant reported as 1".into());
    Ok(rep)
}

/// Lower bound `1/(3e^2) / sup_m |J_m*|^{sigma/m}` for the Bohr radius of a
/// family given by its per-degree reduced-set sizes `(m, |J_m*|)`.
pub fn bohr_lower_bound<I>(n: usize, r: Exponent, reduced_sizes: I) -> Result<BoundReport>
where
    I: IntoIterator<Item = (usize, f64)>,
{
    let mut logs = Vec::new();
    for (m, size) in reduced_sizes {
        if m == 0 || !(size >= 1.0) {
            return Err(Error::Parameter(format!(
                "need m >= 1 and |J*| >= 1, got ({m}, {size})"
            )));
        }
        logs.push((m, size.ln()));
    }
    bohr_from_logs(n, r, logs)
}

fn bohr_from_logs(n: usize, r: Exponent, log_sizes: Vec<(usize, f64)>) -> Result<BoundReport> {
    if log_sizes.is_empty() {
        return Err(Error::Parameter("empty family".into()));
    }
    let sigma = r.sigma();
    let mut rep = BoundReport::new("bohr_lower")
        .input("n", n)
        .input("r", r.to_string());
    let mut log_sup = f64::NEG_INFINITY;
    let mut argmax = 0usize;
    for (m, log_size) in log_sizes {
        let v = sigma / m as f64 * log_size;
        if v > log_sup {
            log_sup = v;
            argmax = m;
        }
        if m <= 64 {
            let chi = chi_upper_log(m, r, log_size);
            rep.term(&format!("radius_m{m:02}"), (-chi / m as f64).exp());
        }
    }
    let constant = 1.0 / (3.0 * std::f64::consts::E.powi(2));
    rep.term("constant", constant);
    rep.term("sigma", sigma);
    rep.term("argmax_m", argmax as f64);
    rep.term("log_sup", log_sup);
    rep.value = constant * (-log_sup).exp();
    Ok(rep)
}

fn chi_upper_log(m: usize, r: Exponent, log_size: f64) -> f64 {
    log_constant_cmr(m, r) + r.sigma() * log_size
}

/// `log binom(n, k)` via `ln Gamma`-free summation.
fn log_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Bohr lower bound for the full family `J(m,n)`, `m >= 1`, where
/// `|J(m,n)*| = |J(m-1,n)| = binom(n+m-2, m-1)`. Degrees are scanned up to
/// `2n + 64`, past which `|J*|^{1/m}` is monotone.
pub fn bohr_lower_bound_full(n: usize, r: Exponent) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::Parameter("need n >= 1".into()));
    }
    let top = 2 * n + 64;
    let log_sizes = (1..=top)
        .map(|m| (m, log_binomial((n + m - 2) as u64, (m - 1) as u64)))
        .collect();
    let mut rep = bohr_from_logs(n, r, log_sizes)?;
    rep.name = "bohr_lower_full".into();
    rep.notes.push(format!("degrees 1..={top}"));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn fin(r: f64) -> Exponent {
        Exponent::finite(r).unwrap()
    }

    #[test]
    fn cmr_examples() {
        assert!((constant_cmr(1, fin(1.0)) - E).abs() < 1e-15);
        assert!((constant_cmr(2, fin(2.0)) - 2.0 * E.powf(1.5)).abs() < 1e-12);
        assert!((constant_cmr(2, fin(2.0)) - 8.9634).abs() < 1e-4);
        assert!((constant_cmr(2, Exponent::Infinity) - 7.6885).abs() < 1e-4);
        for m in [1, 2, 5, 40] {
            for r in [fin(1.0), fin(1.5), fin(2.0), fin(3.0), Exponent::Infinity] {
                let a = log_constant_cmr(m, r);
                assert!((a - constant_cmr(m, r).ln()).abs() < 1e-12 * a.abs().max(1.0));
            }
        }
        let rep = constant_cmr_report(2, fin(2.0));
        assert!(rep.intermediates.contains_key("alternative_r_ge_2"));
    }

    #[test]
    fn chi_examples() {
        for size in [1, 7, 1000] {
            assert_eq!(chi_upper(3, fin(1.0), size), constant_cmr(3, fin(1.0)));
        }
        assert!((chi_upper(2, Exponent::Infinity, 4) - 15.377).abs() < 1e-3);
    }

    #[test]
    fn sigma_m_examples() {
        assert_eq!(sigma_m(1, fin(3.0)), 0.0);
        assert_eq!(sigma_m(2, fin(2.0)), 0.25);
        assert!((sigma_m(1_000_000, fin(2.0)) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn recommended_y_examples() {
        let c = recommended_y(100f64.exp(), 1.0).unwrap();
        assert!((c.y - 10.0 / 100f64.ln()).abs() < 1e-12);
        assert!((c.y - 2.1715).abs() < 1e-4);
        assert!(!c.clamped);
        let c = recommended_y(1e6, 0.75).unwrap();
        let f = 1e6f64.ln().powf(0.25) / 1e6f64.ln().ln();
        assert_eq!(c.formula, f);
        assert!(c.clamped && c.y > 2.0);
        assert!(recommended_y(10.0, 1.0).is_err());
        assert!(recommended_y(1e6, 0.5).is_err());
    }

    #[test]
    fn h_maximizer_examples() {
        let x = 100f64.exp();
        let y = 4f64.exp();
        let c = 2f64.exp();
        let hm = h_maximizer(x, y, c, HVariant::LogC).unwrap();
        assert!((hm.m - 50f64.sqrt()).abs() < 1e-12);
        assert!(hm.dominates_grid);
        for k in 1..=50 {
            assert!(hm.h + 1e-12 >= h_value(x, y, c, k as f64));
        }
        // closed form of the maximum
        assert!((hm.h + 2.0 * (100.0f64 * 2.0).sqrt()).abs() < 1e-9);
        assert!(h_maximizer(x, y, c, HVariant::Printed).is_err());
        let hp = h_maximizer(x, y, 1.5, HVariant::Printed).unwrap();
        assert!((hp.m - (100.0f64 / 2.5).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn h_trend_approaches_limit() {
        let theta = 1.0;
        let ratio = |lx: f64| {
            let x = lx.exp();
            let y = lx.powf(theta - 0.5) / lx.ln();
            let hm = h_maximizer(x, y, 1.5, HVariant::LogC).unwrap();
            hm.h / (lx * lx.ln()).sqrt()
        };
        let target = -2.0 * (theta - 0.5f64).sqrt();
        let errs: Vec<f64> = [50.0, 100.0, 300.0, 700.0]
            .iter()
            .map(|&lx| (ratio(lx) - target).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn polynomial_bound_examples() {
        let x = E.exp();
        let v = polynomial_bound(2, Exponent::Infinity, x).unwrap().value;
        assert!((v - (E / 4.0).exp() / 0.5f64.exp()).abs() < 1e-12);
        for r in [fin(1.5), Exponent::Infinity] {
            let a = polynomial_bound(1, r, 1e3).unwrap().value;
            let b = polynomial_bound(1, r, 1e6).unwrap().value;
            assert!(b <= a);
        }
        assert!(polynomial_bound(1, fin(1.0), 2.0).is_err());
    }

    #[test]
    fn bohr_examples() {
        let rep = bohr_lower_bound(8, fin(1.0), [(1, 1.0), (2, 8.0), (3, 36.0)]).unwrap();
        assert!((rep.value - 1.0 / (3.0 * E * E)).abs() < 1e-15);
        let rep = bohr_lower_bound(4, Exponent::Infinity, [(2, 4.0)]).unwrap();
        let per_m = rep.intermediates["radius_m02"];
        assert!((per_m - 1.0 / chi_upper(2, Exponent::Infinity, 4).sqrt()).abs() < 1e-12);
        assert!((rep.value - 1.0 / (3.0 * E * E) / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn log_binomial_matches_exact() {
        for n in 1..40u64 {
            for k in 0..=n {
                let exact = crate::index::binomial(n, k);
                let approx = log_binomial(n, k).exp();
                let e: f64 = num_traits::ToPrimitive::to_f64(&exact).unwrap();
                assert!((approx - e).abs() <= 1e-9 * e);
            }
        }
    }

    #[test]
    fn kq_master_is_replayable() {
        let seq = WeightSequence::klog(1.0).unwrap();
        // one call site, so both runs share the same compiled code
        let runs: Vec<BoundReport> = (0..2)
            .map(|_| kq_master_bound(&seq, 1e4, 3.0, fin(2.0), None).unwrap())
            .collect();
        let (a, b) = (runs[0].clone(), runs[1].clone());
        assert_eq!(a, b);
        let text = serde_json::to_string(&a).unwrap();
        let back: BoundReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        assert!(kq_master_bound(&seq, 1e4, 2.0, fin(2.0), None).is_err());
        let half = WeightSequence::klog(0.5).unwrap();
        assert!(kq_master_bound(&half, 1e4, 3.0, fin(2.0), None).is_err());
    }
}
