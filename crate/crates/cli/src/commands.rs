use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, Read};
use std::path::PathBuf;

use clap::{Args, Subcommand};
use monomial_lab_core::bounds::{
    bohr_lower_bound_full, chi_upper_report, constant_cmr_report, h_maximizer_report,
    kq_master_bound, polynomial_bound, recommended_y, sigma_m_report, BoundReport, HVariant,
};
use monomial_lab_core::index::parse_set;
use monomial_lab_core::index_sets::{kq_decompose, verify_reduced_inclusion};
use monomial_lab_core::poly::probes::ols_slope;
use monomial_lab_core::poly::{
    block_partial_sums, cauchy_bound_check, kq_sum, mixed_norm_check, random_polynomial,
    sidon_lower_bound, sup_norm, thm_monomial_check, SequencePoint, SupNormBudget,
    UnitCoefficients,
};
use monomial_lab_core::{
    census, enumerate_family, enumerate_jmn, BallSpec, Exponent, Family, MultiIndex,
    SparsePolynomial, WeightKind, WeightSequence, WeightedFamilySpec,
};
use serde_json::{json, Map, Value};

use crate::output::{num, Format, Sink};
use crate::{Command, Global, Status};

/// Relative agreement required between the direct and decomposed sums.
const PARTITION_TOLERANCE: f64 = 1e-10;

#[derive(Debug)]
pub struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<monomial_lab_core::Error> for CliError {
    fn from(e: monomial_lab_core::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError(e.to_string())
    }
}

type Res<T> = Result<T, CliError>;

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Res<T> {
    v.clone()
        .ok_or_else(|| CliError(format!("missing required flag {flag}")))
}

fn flag_err<E: fmt::Display>(flag: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError(format!("{flag}: {e}"))
}

fn weights(text: &str) -> Res<WeightSequence> {
    let kind: WeightKind = text.parse().map_err(flag_err("--weights"))?;
    WeightSequence::from_kind(kind).map_err(flag_err("--weights"))
}

fn exponent(text: &str) -> Res<Exponent> {
    text.parse().map_err(flag_err("--r"))
}

fn index_list(text: &str) -> Res<MultiIndex> {
    let entries = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(flag_err("--index"))?;
    MultiIndex::from_unsorted(entries).map_err(flag_err("--index"))
}

fn float_list(text: &str, flag: &str) -> Res<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(flag_err(flag)))
        .collect()
}

#[derive(Args, Debug, Clone)]
pub struct EnumArgs {
    /// Degree (with --n: J(m,n); with --weights: restricts the family)
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of variables
    #[arg(long)]
    pub n: Option<usize>,
    /// `primes` or `klog:<theta>`
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, default_value = "jx")]
    pub family: String,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long)]
    pub weights: String,
    /// jx, jxm, jminus or jplus
    #[arg(long, default_value = "jx")]
    pub family: String,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Constant in the size bound (defaults to the calibrated value)
    #[arg(long)]
    pub constant: Option<f64>,
    /// Relative slack on klog membership limits, for boundary audits
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
}

impl FamilyArgs {
    fn spec(&self, cap: u64) -> Res<WeightedFamilySpec> {
        let family: Family = self.family.parse().map_err(flag_err("--family"))?;
        let mut spec =
            WeightedFamilySpec::new(weights(&self.weights)?, family, self.x).with_cap(cap);
        spec.y = self.y;
        spec.m = self.m;
        spec.constant = self.constant;
        spec.margin = self.margin;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args, Debug, Clone)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub weights: String,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub y: f64,
    /// A single index such as 1,2,5; all of J(x) when omitted
    #[arg(long)]
    pub index: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct BoundArgs {
    /// cmr, chi, sigma-m, kq-master, recommended-y, h-max, polynomial or bohr
    pub name: String,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Constant c (kq-master) or C (h-max)
    #[arg(long)]
    pub c: Option<f64>,
    /// Size of the reduced set |J*| (chi)
    #[arg(long)]
    pub reduced: Option<u64>,
    /// printed or logc (h-max)
    #[arg(long, default_value = "logc")]
    pub variant: String,
    #[arg(long)]
    pub weights: Option<String>,
    /// Evaluate over a grid, e.g. `x=1e2,1e3,1e4`
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PolyCheckArgs {
    /// Polynomial JSON file, `-` for stdin
    #[arg(long)]
    pub poly: String,
    #[arg(long, default_value = "inf")]
    pub r: String,
    /// Dimension (defaults to the largest variable used)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub iterations: usize,
    /// Evaluation point for thm-monomial, e.g. `v:0.5,0.5` or `n:-1`
    #[arg(long)]
    pub u: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum CheckCommand {
    /// Coefficient bounds by the sup norm
    Cauchy(PolyCheckArgs),
    /// Mixed-norm coefficient inequalities (r <= 2 and r = inf)
    Mixed(PolyCheckArgs),
    /// Monomial sum bound by the reduced-set size
    ThmMonomial(PolyCheckArgs),
    /// J(x,m)* inside J(x^{(m-1)/m}, m-1)
    ReducedInclusion {
        #[arg(long)]
        weights: String,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        y: Option<f64>,
    },
    /// Direct and decomposed sums over J(x) agree
    KqPartition {
        #[arg(long)]
        weights: String,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value = "n:-0.6")]
        u: String,
        /// Random coefficient fields besides the unit field
        #[arg(long, default_value_t = 10)]
        trials: u64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SidonArgs {
    /// `powers:N`, `full:M,N` or `list:1.1;1.2;e`
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value = "inf")]
    pub r: String,
    /// Dimension (defaults to the largest variable used)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub seeds: u64,
}

#[derive(Subcommand, Debug)]
pub enum ProbeCommand {
    /// Block sums over base^N < q_j <= base^{N+1}, unit coefficients
    Blocks {
        #[arg(long)]
        u: String,
        #[arg(long)]
        weights: String,
        /// Top edge; sets --nmax to floor(log_base x) - 1
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, default_value_t = 10)]
        nmax: u32,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        /// Only count indices of this degree
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Bohr radius lower bound for J(m,n) over n, with a power-law fit
    BohrTrend {
        #[arg(long, default_value = "inf")]
        r: String,
        #[arg(long, default_value = "16,32,64,128,256,512,1024,2048,4096")]
        n_list: String,
    },
    /// Master bound over x, with a fit against sqrt(log x loglog x)
    KqEnvelope {
        #[arg(long)]
        weights: String,
        #[arg(long, default_value = "inf")]
        r: String,
        #[arg(long, default_value = "1e2,1e3,1e4,1e5,1e6")]
        x_list: String,
        /// Fixed y; the recommended y per x when omitted
        #[arg(long)]
        y: Option<f64>,
    },
}

pub fn run(command: &Command, g: &Global, sink: &mut Sink) -> Res<Status> {
    match command {
        Command::Enum(a) => run_enum(a, g, sink),
        Command::Census(a) => {
            let c = census(&a.spec(g.cap)?)?;
            // families with a size bound assert it
            let holds = c.bound_satisfied != Some(false);
            if sink.format == Format::Csv {
                let rows = c
                    .by_degree
                    .iter()
                    .map(|(m, k)| vec![m.to_string(), k.to_string()])
                    .collect::<Vec<_>>();
                sink.csv(&["degree", "count"], &rows)?;
            } else {
                let mut body = serde_json::to_value(&c).expect("serializable");
                if c.bound_satisfied.is_some() {
                    body["inequality"] = c.bound_name.clone().into();
                    body = with_status(body, holds).0;
                }
                sink.record("census", &body)?;
            }
            Ok(if holds { Status::Pass } else { Status::Fail })
        }
        Command::Decompose(a) => run_decompose(a, g, sink),
        Command::Bound(a) => run_bound(a, sink),
        Command::Check(c) => run_check(c, g, sink),
        Command::Sidon(a) => {
            let set = parse_set(&a.set, g.cap).map_err(flag_err("--set"))?;
            let n = a.n.unwrap_or_else(|| {
                set.iter()
                    .map(|j| j.max_entry() as usize)
                    .max()
                    .unwrap_or(1)
                    .max(1)
            });
            let spec = BallSpec::new(exponent(&a.r)?, n)?;
            let rep = sidon_lower_bound(&set, &spec, a.seeds, &budget(g.seed, 64, 200))?;
            emit(
                sink,
                "sidon",
                serde_json::to_value(&rep).expect("serializable"),
            )?;
            Ok(Status::Pass)
        }
        Command::Probe(p) => run_probe(p, sink),
    }
}

fn budget(seed: u64, restarts: usize, iterations: usize) -> SupNormBudget {
    SupNormBudget {
        restarts,
        iterations,
        seed,
        ..SupNormBudget::default()
    }
}

/// Writes a record, or its scalar fields as `field,value` rows for CSV.
fn emit(sink: &mut Sink, command: &str, body: Value) -> Res<()> {
    if sink.format == Format::Csv {
        let mut rows = Vec::new();
        if let Value::Object(map) = &body {
            flatten("", map, &mut rows);
        }
        sink.csv(&["field", "value"], &rows)?;
    } else {
        sink.record(command, &body)?;
    }
    Ok(())
}

fn flatten(prefix: &str, map: &Map<String, Value>, rows: &mut Vec<Vec<String>>) {
    for (k, v) in map {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Object(inner) => flatten(&key, inner, rows),
            Value::Number(x) => rows.push(vec![key, x.as_f64().map_or_else(|| x.to_string(), num)]),
            Value::String(s) => rows.push(vec![key, s.clone()]),
            Value::Bool(b) => rows.push(vec![key, b.to_string()]),
            Value::Null => rows.push(vec![key, String::new()]),
            Value::Array(_) => {}
        }
    }
}

fn with_status(mut body: Value, holds: bool) -> (Value, Status) {
    if let Value::Object(map) = &mut body {
        map.insert("status".into(), if holds { "pass" } else { "fail" }.into());
    }
    (body, if holds { Status::Pass } else { Status::Fail })
}

fn run_enum(a: &EnumArgs, g: &Global, sink: &mut Sink) -> Res<Status> {
    let members: Vec<MultiIndex> = match (&a.weights, a.n) {
        (Some(w), _) => {
            let fam = FamilyArgs {
                weights: w.clone(),
                family: a.family.clone(),
                x: need(&a.x, "--x")?,
                y: a.y,
                m: a.m,
                constant: None,
                margin: a.margin,
            };
            enumerate_family(&fam.spec(g.cap)?)?.collect::<Result<_, _>>()?
        }
        (None, Some(n)) => enumerate_jmn(need(&a.m, "--m")?, n, g.cap)?.collect(),
        (None, None) => {
            return Err(CliError(
                "give either --m and --n, or --weights and --x".into(),
            ))
        }
    };
    match sink.format {
        Format::Json => sink.record(
            "enum",
            &json!({ "count": members.len(), "indices": members }),
        )?,
        Format::Jsonl => {
            for j in &members {
                sink.line(j)?;
            }
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = members
                .iter()
                .map(|j| {
                    vec![
                        j.entries()
                            .iter()
                            .map(u32::to_string)
                            .collect::<Vec<_>>()
                            .join("."),
                        j.len().to_string(),
                    ]
                })
                .collect();
            sink.csv(&["index", "degree"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn run_decompose(a: &DecomposeArgs, g: &Global, sink: &mut Sink) -> Res<Status> {
    let seq = weights(&a.weights)?;
    let ks: Vec<MultiIndex> = match &a.index {
        Some(text) => vec![index_list(text)?],
        None => enumerate_family(
            &WeightedFamilySpec::new(seq.clone(), Family::Jx, a.x).with_cap(g.cap),
        )?
        .collect::<Result<_, _>>()?,
    };
    let splits = ks
        .iter()
        .map(|k| {
            kq_decompose(&seq, a.x, a.y, k).map(|s| json!({ "k": k, "i": s.i, "m": s.m, "j": s.j }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match sink.format {
        Format::Jsonl => {
            for s in &splits {
                sink.line(s)?;
            }
        }
        Format::Csv => {
            let dotted = |v: &Value| {
                v.as_array()
                    .map(|a| {
                        a.iter()
                            .map(|e| e.to_string())
                            .collect::<Vec<_>>()
                            .join(".")
                    })
                    .unwrap_or_default()
            };
            let rows: Vec<Vec<String>> = splits
                .iter()
                .map(|s| {
                    vec![
                        dotted(&s["k"]),
                        dotted(&s["i"]),
                        s["m"].to_string(),
                        dotted(&s["j"]),
                    ]
                })
                .collect();
            sink.csv(&["k", "i", "m", "j"], &rows)?;
        }
        Format::Json => {
            let l = seq.cutoff_rank(a.y);
            sink.record(
                "decompose",
                &json!({ "weights": seq.kind().to_string(), "x": a.x, "y": a.y, "l": l, "splits": splits }),
            )?;
        }
    }
    Ok(Status::Pass)
}

fn evaluate_bound(a: &BoundArgs) -> Res<BoundReport> {
    let r = || a.r.as_deref().map_or(Ok(Exponent::Infinity), exponent);
    let report = match a.name.as_str() {
        "cmr" => constant_cmr_report(need(&a.m, "--m")?, r()?),
        "chi" => chi_upper_report(need(&a.m, "--m")?, r()?, need(&a.reduced, "--reduced")?),
        "sigma-m" => sigma_m_report(need(&a.m, "--m")?, r()?),
        "polynomial" => polynomial_bound(need(&a.m, "--m")?, r()?, need(&a.x, "--x")?)?,
        "bohr" => bohr_lower_bound_full(need(&a.n, "--n")?, r()?)?,
        "h-max" => {
            let variant: HVariant = a.variant.parse().map_err(flag_err("--variant"))?;
            h_maximizer_report(need(&a.x, "--x")?, need(&a.y, "--y")?, need(&a.c, "--c")?, variant)?
        }
        "recommended-y" => {
            let x = need(&a.x, "--x")?;
            let theta = need(&a.theta, "--theta")?;
            let choice = recommended_y(x, theta)?;
            let mut inputs = std::collections::BTreeMap::new();
            inputs.insert("x".to_string(), json!(x));
            inputs.insert("theta".to_string(), json!(theta));
            let mut intermediates = std::collections::BTreeMap::new();
            intermediates.insert("formula".to_string(), choice.formula);
            BoundReport {
                name: "recommended_y".into(),
                inputs,
                intermediates,
                value: choice.y,
                notes: if choice.clamped { vec!["clamped into (2, x)".into()] } else { Vec::new() },
            }
        }
        "kq-master" => {
            let seq = match (&a.weights, a.theta) {
                (Some(w), _) => weights(w)?,
                (None, Some(t)) => WeightSequence::klog(t).map_err(flag_err("--theta"))?,
                (None, None) => return Err(CliError("kq-master needs --weights or --theta".into())),
            };
            let x = need(&a.x, "--x")?;
            let y = match a.y {
                Some(y) => y,
                None => recommended_y(x, seq.theta())?.y,
            };
            kq_master_bound(&seq, x, y, r()?, a.c)?
        }
        other => {
            return Err(CliError(format!(
                "unknown bound `{other}` (expected cmr, chi, sigma-m, kq-master, recommended-y, h-max, polynomial or bohr)"
            )))
        }
    };
    Ok(report)
}

fn run_bound(a: &BoundArgs, sink: &mut Sink) -> Res<Status> {
    let Some(sweep) = &a.sweep else {
        let rep = evaluate_bound(a)?;
        emit(
            sink,
            "bound",
            serde_json::to_value(&rep).expect("serializable"),
        )?;
        return Ok(Status::Pass);
    };
    let (param, values) = sweep
        .split_once('=')
        .ok_or_else(|| CliError("--sweep: expected param=v1,v2,...".into()))?;
    let mut reports = Vec::new();
    for v in values.split(',').map(str::trim) {
        let mut b = a.clone();
        let bad = || CliError(format!("--sweep: cannot parse `{v}` for {param}"));
        match param {
            "m" => b.m = Some(v.parse().map_err(|_| bad())?),
            "n" => b.n = Some(v.parse().map_err(|_| bad())?),
            "r" => b.r = Some(v.to_string()),
            "x" => b.x = Some(v.parse().map_err(|_| bad())?),
            "y" => b.y = Some(v.parse().map_err(|_| bad())?),
            "theta" => b.theta = Some(v.parse().map_err(|_| bad())?),
            "c" => b.c = Some(v.parse().map_err(|_| bad())?),
            "reduced" => b.reduced = Some(v.parse().map_err(|_| bad())?),
            _ => return Err(CliError(format!("--sweep: cannot sweep `{param}`"))),
        }
        reports.push((v.to_string(), evaluate_bound(&b)?));
    }
    match sink.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|(v, r)| vec![v.clone(), num(r.value)])
                .collect();
            sink.csv(&[param, "value"], &rows)?;
        }
        Format::Jsonl => {
            for (_, r) in &reports {
                sink.line(r)?;
            }
        }
        Format::Json => {
            let all: Vec<&BoundReport> = reports.iter().map(|(_, r)| r).collect();
            sink.record(
                "bound",
                &json!({ "name": a.name, "sweep": param, "reports": all }),
            )?;
        }
    }
    Ok(Status::Pass)
}

fn read_polynomial(path: &str) -> Res<SparsePolynomial> {
    let text = if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(PathBuf::from(path)).map_err(flag_err("--poly"))?
    };
    SparsePolynomial::from_json(&text).map_err(flag_err("--poly"))
}

fn run_check(c: &CheckCommand, g: &Global, sink: &mut Sink) -> Res<Status> {
    let (command, body, holds) = match c {
        CheckCommand::Cauchy(a) | CheckCommand::Mixed(a) | CheckCommand::ThmMonomial(a) => {
            let p = read_polynomial(&a.poly)?;
            let n = a.n.unwrap_or(p.max_variable().max(1));
            let spec = BallSpec::new(exponent(&a.r)?, n)?;
            let est = sup_norm(&p, &spec, &budget(g.seed, a.restarts, a.iterations))?;
            match c {
                CheckCommand::Cauchy(_) => {
                    let rep = cauchy_bound_check(&p, &spec, &est)?;
                    ("check cauchy", serde_json::to_value(&rep), rep.holds)
                }
                CheckCommand::Mixed(_) => {
                    let rep = mixed_norm_check(&p, &spec, &est)?;
                    ("check mixed", serde_json::to_value(&rep), rep.holds)
                }
                _ => {
                    let u = match &a.u {
                        Some(text) => {
                            let point: SequencePoint = text.parse().map_err(flag_err("--u"))?;
                            point.with_dim(n).to_vector().map_err(flag_err("--u"))?
                        }
                        // the point of the unit sphere with equal moduli
                        None => vec![num_point((n as f64).powf(-spec.r.recip())); n],
                    };
                    let set: BTreeSet<MultiIndex> = p.terms().map(|(j, _)| j.clone()).collect();
                    let rep = thm_monomial_check(&p, &spec, &set, &u, &est)?;
                    ("check thm-monomial", serde_json::to_value(&rep), rep.holds)
                }
            }
        }
        CheckCommand::ReducedInclusion {
            weights: w,
            x,
            m,
            y,
        } => {
            let rep = verify_reduced_inclusion(&weights(w)?, *x, *m, *y, g.cap)?;
            (
                "check reduced-inclusion",
                serde_json::to_value(&rep),
                rep.holds,
            )
        }
        CheckCommand::KqPartition {
            weights: w,
            x,
            y,
            u,
            trials,
        } => {
            let seq = weights(w)?;
            let point: SequencePoint = u.parse().map_err(flag_err("--u"))?;
            let ones = SequencePoint::Power {
                a: 0.0,
                b: 0.0,
                dim: usize::MAX,
            };
            let unit = kq_sum(&UnitCoefficients::default(), &ones, &seq, *x, *y)?;
            let set = enumerate_family(
                &WeightedFamilySpec::new(seq.clone(), Family::Jx, *x).with_cap(g.cap),
            )?
            .collect::<Result<BTreeSet<_>, _>>()?;
            let mut worst = unit.relative_gap;
            for t in 0..*trials {
                let p = random_polynomial(&set, g.seed.wrapping_add(t));
                worst = worst.max(kq_sum(&p, &point, &seq, *x, *y)?.relative_gap);
            }
            let counts_ok =
                unit.direct == unit.terms as f64 && unit.decomposed == unit.terms as f64;
            let holds = counts_ok && worst <= PARTITION_TOLERANCE;
            let body = json!({
                "inequality": "partition-exactness",
                "weights": seq.kind().to_string(),
                "x": x, "y": y, "l": unit.l,
                "terms": unit.terms, "prefixes": unit.prefixes,
                "decomposed_count": unit.decomposed,
                "trials": trials,
                "worst_relative_gap": worst,
                "tolerance": PARTITION_TOLERANCE,
                "holds": holds,
            });
            ("check kq-partition", Ok(body), holds)
        }
    };
    let (body, status) = with_status(body.expect("serializable"), holds);
    emit(sink, command, body)?;
    Ok(status)
}

fn num_point(v: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(v, 0.0)
}

fn run_probe(p: &ProbeCommand, sink: &mut Sink) -> Res<Status> {
    match p {
        ProbeCommand::Blocks {
            u,
            weights: w,
            x,
            nmax,
            base,
            degree,
        } => {
            let seq = weights(w)?;
            let point: SequencePoint = u.parse().map_err(flag_err("--u"))?;
            let nmax = match x {
                Some(x) => (x.ln() / base.ln()).floor().max(1.0) as u32 - 1,
                None => *nmax,
            };
            let unit = UnitCoefficients { degree: *degree };
            let blocks = block_partial_sums(&unit, &point, &seq, *base, nmax)?;
            if sink.format == Format::Csv {
                let rows: Vec<Vec<String>> = blocks
                    .iter()
                    .map(|b| {
                        vec![
                            b.n.to_string(),
                            num(b.lo),
                            num(b.hi),
                            b.count.to_string(),
                            num(b.sum),
                            num(b.cumulative),
                        ]
                    })
                    .collect();
                sink.csv(&["n", "lo", "hi", "count", "sum", "cumulative"], &rows)?;
            } else {
                sink.record(
                    "probe blocks",
                    &json!({ "weights": seq.kind().to_string(), "u": u, "base": base, "degree": degree, "blocks": blocks }),
                )?;
            }
        }
        ProbeCommand::BohrTrend { r, n_list } => {
            let r = exponent(r)?;
            let ns = float_list(n_list, "--n-list")?;
            let mut rows = Vec::new();
            for &n in &ns {
                if !(n >= 2.0 && n.fract() == 0.0) {
                    return Err(CliError(format!("--n-list: need integers >= 2, got {n}")));
                }
                rows.push((n, bohr_lower_bound_full(n as usize, r)?.value));
            }
            let xs: Vec<f64> = rows.iter().map(|(n, _)| (n.ln() / n).ln()).collect();
            let ys: Vec<f64> = rows.iter().map(|(_, v)| v.ln()).collect();
            let exponent_fit = if rows.len() >= 2 {
                ols_slope(&xs, &ys)
            } else {
                f64::NAN
            };
            if sink.format == Format::Csv {
                let table: Vec<Vec<String>> = rows
                    .iter()
                    .map(|(n, v)| vec![n.to_string(), num(*v)])
                    .collect();
                sink.csv(&["n", "bohr_lower"], &table)?;
            } else {
                let points: Vec<Value> = rows
                    .iter()
                    .map(|(n, v)| json!({ "n": n, "value": v }))
                    .collect();
                sink.record(
                    "probe bohr-trend",
                    &json!({ "r": r, "sigma": r.sigma(), "fitted_exponent": exponent_fit, "points": points }),
                )?;
            }
        }
        ProbeCommand::KqEnvelope {
            weights: w,
            r,
            x_list,
            y,
        } => {
            let seq = weights(w)?;
            let r = exponent(r)?;
            let mut rows = Vec::new();
            for x in float_list(x_list, "--x-list")? {
                let y = match y {
                    Some(y) => *y,
                    None => recommended_y(x, seq.theta())?.y,
                };
                let rep = kq_master_bound(&seq, x, y, r, None)?;
                rows.push((
                    x,
                    y,
                    rep.intermediates["log_value"],
                    rep.intermediates["log_ratio_x_sigma"],
                ));
            }
            let xs: Vec<f64> = rows
                .iter()
                .map(|row| (row.0.ln() * row.0.ln().ln()).sqrt())
                .collect();
            let ys: Vec<f64> = rows.iter().map(|row| row.3).collect();
            let slope = if rows.len() >= 2 {
                ols_slope(&xs, &ys)
            } else {
                f64::NAN
            };
            if sink.format == Format::Csv {
                let table: Vec<Vec<String>> = rows
                    .iter()
                    .map(|(x, y, lv, lr)| vec![num(*x), num(*y), num(*lv), num(*lr)])
                    .collect();
                sink.csv(&["x", "y", "log_bound", "log_ratio_x_sigma"], &table)?;
            } else {
                let points: Vec<Value> = rows
                    .iter()
                    .map(|(x, y, lv, lr)| json!({ "x": x, "y": y, "log_bound": lv, "log_ratio_x_sigma": lr }))
                    .collect();
                sink.record(
                    "probe kq-envelope",
                    &json!({ "weights": seq.kind().to_string(), "r": r, "slope": slope, "points": points }),
                )?;
            }
        }
    }
    Ok(Status::Pass)
}
