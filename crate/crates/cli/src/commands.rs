//! Subcommand arguments and their implementations.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use pslab::admissible::{obstruction, LinearForm, LinearSystem, OffsetTuple};
use pslab::cramer_model::{simulate_with, ModelVariant};
use pslab::discrepancy::{discrepancy_sum_with, lower_bound_check};
use pslab::erdos_rankin::{
    construct_with, derive_params, override_params, sample_ns, theorem_report, verify_window_identity, Construction, DEFAULT_MAX_ATTEMPTS,
};
use pslab::interval_stats::{
    chi_square_poisson, chi_square_two_sample, exponential_mass, gap_histogram_with, poisson_pmf, tv_distance, window_histogram_with,
    GapNormalization, WindowHistogram, DEFAULT_M_MAX,
};
use pslab::interval_walk::{count_prime_rich, locate_with, LocateOptions};
use pslab::sieve::{read_cache, sieve_range, write_cache, PrimeSegment, SieveConfig, DEFAULT_ROUNDS};
use pslab::{Error, Result};

use crate::emit::{round12, to_value, Format, Report, Table};

/// Flags shared by every data-producing subcommand.
#[derive(Args, Clone, Debug, Serialize)]
pub struct OutputArgs {
    /// Output format; each subcommand has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Data file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Manifest location; defaults to `<out>.manifest.json` when --out is set.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// What a command did besides producing its report.
#[derive(Default)]
pub struct Effects {
    /// Extra files written (cache segments, ...).
    pub files: Vec<PathBuf>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|e| Error::Argument(format!("{what} {t:?}: {e}"))))
        .collect()
}

fn load_construction(path: &Path) -> Result<Construction> {
    let text = fs::read_to_string(path).map_err(|e| Error::Resource(format!("{}: {e}", path.display())))?;
    Construction::from_json(&text)
}

fn histogram_table(h: &WindowHistogram) -> Table {
    let mut t = Table::new(&["m", "count", "frequency", "poisson_pmf", "abs_error"]);
    for r in h.rows() {
        t.push(vec![json!(r.m), json!(r.count), json!(r.frequency), json!(r.poisson_pmf), json!(r.abs_error)]);
    }
    t
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SieveArgs {
    /// Sieve the half-open range [lo, hi).
    #[arg(long, default_value_t = 0)]
    pub lo: u64,
    #[arg(long)]
    pub hi: u64,
    /// List the primes instead of only counting them.
    #[arg(long)]
    pub list: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

pub fn sieve(a: &SieveArgs, config: &SieveConfig, cache_dir: Option<&Path>, fx: &mut Effects) -> Result<Report> {
    let segments: Vec<PrimeSegment> = match cache_dir {
        Some(dir) => {
            let path = dir.join(format!("segments-{}-{}.bin", a.lo, a.hi));
            if path.exists() {
                read_cache(&path)?
            } else {
                fs::create_dir_all(dir).map_err(|e| Error::Resource(format!("{}: {e}", dir.display())))?;
                let segs = sieve_range(a.lo, a.hi, config)?.collect_parallel();
                write_cache(&path, &segs).map_err(|e| Error::Resource(format!("{}: {e}", path.display())))?;
                fx.files.push(path);
                segs
            }
        }
        None => sieve_range(a.lo, a.hi, config)?.collect_parallel(),
    };
    let count: u64 = segments.iter().map(|s| s.count()).sum();
    let mut table;
    let mut json = json!({"lo": a.lo, "hi": a.hi, "count": count, "segments": segments.len()});
    if a.list {
        let primes: Vec<u64> = segments.iter().flat_map(|s| s.primes()).collect();
        table = Table::new(&["p"]);
        for &p in &primes {
            table.push(vec![json!(p)]);
        }
        json["primes"] = json!(primes);
    } else {
        table = Table::new(&["lo", "hi", "count"]);
        table.push(vec![json!(a.lo), json!(a.hi), json!(count)]);
    }
    Ok(Report {
        json,
        table,
        text: Some(count.to_string()),
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct StatsArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub lambda: f64,
    /// Largest m tracked individually; larger counts go to an overflow bucket.
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    pub m_max: usize,
    /// The chi-square statistic uses cells 0..last−1 and a final "≥ last" cell.
    #[arg(long, default_value_t = 8)]
    pub chi_last: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

pub fn stats(a: &StatsArgs, config: &SieveConfig) -> Result<Report> {
    let h = window_histogram_with(a.x, a.lambda, a.m_max, config)?;
    let tv = tv_distance(&h, a.lambda)?;
    let chi = chi_square_poisson(&h, a.lambda, a.chi_last)?;
    let json = json!({
        "x": a.x,
        "lambda": a.lambda,
        "n_total": h.n_total,
        "mean": h.mean(),
        "window_sum": h.window_sum,
        "overflow": h.overflow,
        "tv_distance": tv,
        "chi_square": {"last": a.chi_last, "value": chi},
        "rows": to_value(&h.rows()),
    });
    Ok(Report {
        json,
        table: histogram_table(&h),
        text: None,
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct GapsArgs {
    #[arg(long)]
    pub x: u64,
    /// Bin edges e_0 < e_1 < …; bins are (e_i, e_{i+1}].
    #[arg(long, default_value = "0,0.25,0.5,0.75,1,1.5,2,3,4,6,8")]
    pub bins: String,
    #[arg(long, value_enum, default_value_t = Normalization::PrimeIndex)]
    pub normalization: Normalization,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Divide d_n by log n.
    PrimeIndex,
    /// Divide d_n by log p_n.
    PrimeValue,
}

pub fn gaps(a: &GapsArgs, config: &SieveConfig) -> Result<Report> {
    let edges: Vec<f64> = parse_list(&a.bins, "bin edge")?;
    let norm = match a.normalization {
        Normalization::PrimeIndex => GapNormalization::PrimeIndex,
        Normalization::PrimeValue => GapNormalization::PrimeValue,
    };
    let h = gap_histogram_with(a.x, &edges, norm, config)?;
    let mut table = Table::new(&["lo", "hi", "count", "mass", "exponential_mass"]);
    let mut bins = Vec::new();
    for i in 0..h.bin_counts.len() {
        let (lo, hi) = (edges[i], edges[i + 1]);
        let expected = if lo >= 0.0 { Some(exponential_mass(lo, hi)?) } else { None };
        table.push(vec![json!(lo), json!(hi), json!(h.bin_counts[i]), json!(h.mass(i)), json!(expected)]);
        bins.push(json!({"lo": lo, "hi": hi, "count": h.bin_counts[i], "mass": h.mass(i), "exponential_mass": expected}));
    }
    let json = json!({
        "x": a.x,
        "normalization": to_value(&h.normalization),
        "n_total": h.n_total,
        "out_of_range": h.out_of_range,
        "last_prime": h.last_prime,
        "gap_sum": h.gap_sum,
        "bins": bins,
    });
    Ok(Report { json, table, text: None })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct CramerArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub lambda: f64,
    /// Generated and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Variant::Fixed)]
    pub variant: Variant,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    pub m_max: usize,
    /// Also histogram the primes and compare the two samples.
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Probability 1/log x everywhere.
    Fixed,
    /// Probability 1/log n at position n.
    PerN,
}

pub fn cramer(a: &CramerArgs, config: &SieveConfig, seed: u64) -> Result<Report> {
    let variant = match a.variant {
        Variant::Fixed => ModelVariant::Fixed,
        Variant::PerN => ModelVariant::PerN,
    };
    let run = simulate_with(a.x, a.lambda, seed, variant, a.m_max)?;
    let tv = tv_distance(&run.histogram, a.lambda)?;
    let mut json = json!({
        "x": a.x,
        "lambda": a.lambda,
        "seed": seed,
        "variant": to_value(&run.variant),
        "p": run.p,
        "window": run.window,
        "n_total": run.histogram.n_total,
        "mean": run.histogram.mean(),
        "tv_distance": tv,
        "rows": to_value(&run.histogram.rows()),
    });
    if !a.compare {
        return Ok(Report {
            json,
            table: histogram_table(&run.histogram),
            text: None,
        });
    }
    let primes = window_histogram_with(a.x, a.lambda, a.m_max, config)?;
    json["primes"] = json!({
        "mean": primes.mean(),
        "tv_distance": tv_distance(&primes, a.lambda)?,
        "rows": to_value(&primes.rows()),
    });
    json["chi_square_two_sample"] = json!(chi_square_two_sample(&run.histogram, &primes));
    let mut table = Table::new(&["m", "model_count", "model_frequency", "prime_count", "prime_frequency", "poisson_pmf"]);
    for m in 0..=run.histogram.max_observed().max(primes.max_observed()) {
        table.push(vec![
            json!(m),
            json!(run.histogram.count(m)),
            json!(run.histogram.frequency(m)),
            json!(primes.count(m)),
            json!(primes.frequency(m)),
            json!(poisson_pmf(a.lambda, m as u64)),
        ]);
    }
    Ok(Report { json, table, text: None })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct AdmissibleArgs {
    /// Offsets h_1 < … < h_k of the forms n + h_i, e.g. 0,2,6.
    #[arg(long, conflicts_with = "forms", required_unless_present = "forms")]
    pub offsets: Option<String>,
    /// Forms "g h" separated by ';', e.g. "1 0; 2 1".
    #[arg(long)]
    pub forms: Option<String>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

fn parse_system(offsets: Option<&str>, forms: Option<&str>) -> Result<LinearSystem> {
    match (offsets, forms) {
        (Some(o), _) => Ok(LinearSystem::from_offsets(&o.parse::<OffsetTuple>()?)),
        (None, Some(f)) => LinearSystem::new(f.split(';').map(|s| s.trim().parse::<LinearForm>()).collect::<Result<Vec<_>>>()?),
        (None, None) => Err(Error::Argument("either --offsets or --forms is required".into())),
    }
}

pub fn admissible(a: &AdmissibleArgs) -> Result<Report> {
    let system = parse_system(a.offsets.as_deref(), a.forms.as_deref())?;
    let obs = obstruction(&system);
    let text = match &obs {
        None => "admissible".to_string(),
        Some(p) => format!("not admissible (p={p})"),
    };
    let obs_str = obs.as_ref().map(|p| p.to_string());
    let mut table = Table::new(&["k", "admissible", "obstruction"]);
    table.push(vec![json!(system.len()), json!(obs.is_none()), json!(obs_str)]);
    Ok(Report {
        json: json!({"k": system.len(), "admissible": obs.is_none(), "obstruction": obs_str, "forms": to_value(&system.forms())}),
        table,
        text: Some(text),
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct ConstructArgs {
    /// Derive (k, y, z) from --x, --lambda, --m and --c instead.
    #[arg(long)]
    pub derive: bool,
    #[arg(long, required_unless_present = "derive")]
    pub k: Option<usize>,
    #[arg(long, required_unless_present = "derive")]
    pub y: Option<f64>,
    #[arg(long, required_unless_present = "derive")]
    pub z: Option<f64>,
    #[arg(long = "B", default_value_t = 1)]
    pub b: u64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub m: u64,
    /// The sieve constant C.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Scale x; required with --derive.
    #[arg(long, required_if_eq("derive", "true"))]
    pub x: Option<f64>,
    /// Preferred survivor positions, one per offset.
    #[arg(long)]
    pub targets: Option<String>,
    /// Generated and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    pub max_attempts: u32,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

pub fn construct(a: &ConstructArgs, seed: u64) -> Result<Report> {
    let mut params = if a.derive {
        derive_params(a.x.expect("clap enforces --x"), a.lambda, a.m, a.c)?
    } else {
        let p = override_params(a.k.unwrap(), a.y.unwrap(), a.z.unwrap(), a.b)?.with_lambda(a.lambda)?.with_m(a.m).with_c(a.c)?;
        match a.x {
            Some(x) => p.with_x(x)?,
            None => p,
        }
    };
    if let Some(t) = &a.targets {
        params = params.with_targets(parse_list(t, "target")?)?;
    }
    let c = construct_with(&params, seed, a.max_attempts)?;
    let mut table = Table::new(&["p", "a_p"]);
    for (p, r) in c.residues.iter() {
        table.push(vec![json!(p), json!(r)]);
    }
    let text = format!("offsets {:?}, g = {}, h = {}", c.offsets.as_slice(), c.g, c.h);
    Ok(Report {
        json: to_value(&c),
        table,
        text: Some(text),
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub construction: PathBuf,
    /// Number of random n drawn from [1, n-max].
    #[arg(long, default_value_t = 100, conflicts_with = "n")]
    pub samples: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_max: u64,
    /// Explicit comma-separated n instead of random samples.
    #[arg(long)]
    pub n: Option<String>,
    /// Generated and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    pub rounds: u32,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

pub fn verify(a: &VerifyArgs, seed: u64) -> Result<Report> {
    let c = load_construction(&a.construction)?;
    let ns = match &a.n {
        Some(list) => parse_list(list, "n")?,
        None => sample_ns(seed, a.samples, a.n_max)?,
    };
    let report = verify_window_identity(&c, &ns, a.rounds)?;
    let mut table = Table::new(&["n", "certificates", "failures", "prime_offsets"]);
    for s in &report.samples {
        table.push(vec![json!(s.n), json!(s.certificates.len()), json!(s.failures), json!(s.prime_offsets)]);
    }
    let failures: usize = report.samples.iter().map(|s| s.failures.len()).sum();
    let text = format!("{} samples, {} uncertified positions", report.samples.len(), failures);
    let mut json = to_value(&report);
    json["seed"] = json!(a.n.is_none().then_some(seed));
    Ok(Report {
        json,
        table,
        text: Some(text),
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct WalkArgs {
    #[arg(long)]
    pub construction: PathBuf,
    /// The n of N_0 = g·n + h (decimal, any size).
    #[arg(long)]
    pub n: String,
    #[arg(long)]
    pub m: u64,
    /// Scale for the offset-bound check; defaults to the construction's.
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub j_start: Option<u64>,
    #[arg(long)]
    pub j_end: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    pub rounds: u32,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

pub fn walk(a: &WalkArgs) -> Result<Report> {
    let c = load_construction(&a.construction)?;
    let n: BigUint = a.n.parse().map_err(|e| Error::Argument(format!("--n {:?}: {e}", a.n)))?;
    let opts = LocateOptions {
        rounds: a.rounds,
        j_start: a.j_start,
        j_end: a.j_end,
        x: a.x,
    };
    let r = locate_with(&c, &n, a.m, &opts)?;
    let mut table = Table::new(&["j", "count"]);
    for (i, &cnt) in r.trace.counts.iter().enumerate() {
        table.push(vec![json!(r.trace.j_start + i as u64), json!(cnt)]);
    }
    let json = json!({
        "n": r.n.to_string(),
        "m": r.m,
        "j": r.j,
        "N_j": r.n_j.to_string(),
        "width": r.width,
        "primes_in_window": r.primes_in_window.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "form_primes": r.form_primes,
        "j_start": r.trace.j_start,
        "counts": r.trace.counts,
        "all_exact": r.all_exact,
        "start_has_all_forms": r.start_has_all_forms,
        "end_has_no_forms": r.end_has_no_forms,
        "offset_bounds": r.offset_bounds,
    });
    Ok(Report {
        json,
        table,
        text: Some(format!("j = {}, N_j = {}", r.j, r.n_j)),
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct RichArgs {
    #[arg(long, conflicts_with_all = ["forms", "construction"])]
    pub offsets: Option<String>,
    #[arg(long, conflicts_with = "construction")]
    pub forms: Option<String>,
    #[arg(long)]
    pub construction: Option<PathBuf>,
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub m: u64,
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    pub rounds: u32,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

pub fn rich(a: &RichArgs) -> Result<Report> {
    let system = match &a.construction {
        Some(path) => load_construction(path)?.system(),
        None => parse_system(a.offsets.as_deref(), a.forms.as_deref())?,
    };
    let count = count_prime_rich(&system, a.x, a.m, a.rounds)?;
    let mut table = Table::new(&["x", "m", "count"]);
    table.push(vec![json!(a.x), json!(a.m), json!(count)]);
    Ok(Report {
        json: json!({"x": a.x, "m": a.m, "k": system.len(), "count": count}),
        table,
        text: Some(count.to_string()),
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct DiscrepancyArgs {
    /// The form "g h".
    #[arg(long)]
    pub form: String,
    #[arg(long)]
    pub x: u64,
    #[arg(long = "Q", default_value_t = 1)]
    pub q_max: u64,
    #[arg(long = "B", default_value_t = 1)]
    pub b: u64,
    /// Exponent E of the reference size count / (log x)^E.
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    /// Number of forms k; reports the asymptotic exponent 100k² alongside.
    #[arg(long)]
    pub k: Option<usize>,
    /// Compare the weighted prime count with x / (2 log x) instead.
    #[arg(long)]
    pub lower_bound: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

pub fn discrepancy(a: &DiscrepancyArgs) -> Result<Report> {
    let form: LinearForm = a.form.parse()?;
    if a.lower_bound {
        let r = lower_bound_check(&form, a.x, a.b)?;
        let mut table = Table::new(&["count", "lhs", "rhs", "holds"]);
        table.push(vec![json!(r.count), json!(r.lhs), json!(r.rhs), json!(r.holds)]);
        let text = format!("{} {} {}", round12(r.lhs), if r.holds { ">" } else { "<=" }, round12(r.rhs));
        return Ok(Report {
            json: to_value(&r),
            table,
            text: Some(text),
        });
    }
    let r = discrepancy_sum_with(&form, a.x, a.q_max, a.b, a.exponent, a.k)?;
    let mut table = Table::new(&["q", "a_star", "max_abs_delta"]);
    for row in &r.rows {
        table.push(vec![json!(row.q), json!(row.a_star), json!(row.max_abs_delta)]);
    }
    Ok(Report {
        json: to_value(&r),
        table,
        text: None,
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct ReportArgs {
    #[arg(long)]
    pub construction: PathBuf,
    #[arg(long)]
    pub x: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

pub fn report(a: &ReportArgs) -> Result<Report> {
    let c = load_construction(&a.construction)?;
    let r = theorem_report(&c, a.x)?;
    let json = to_value(&r);
    let mut table = Table::new(&["key", "value"]);
    if let Value::Object(map) = &json {
        for (k, v) in map {
            table.push(vec![json!(k), v.clone()]);
        }
    }
    Ok(Report { json, table, text: None })
}
