//! The sliding windows `I_j = (N_j, N_j + λ log N_j]`, `N_j = N_0 + j`, and the
//! intermediate-value search for a window holding exactly `m` primes.
//!
//! Moving from `I_j` to `I_{j+1}` drops at most one integer on the left (`N_j + 1`)
//! while the right end never moves left, so the count `c_j` can fall by at most
//! one per step. A walk that starts at `c ≥ m` and later reaches `c ≤ m`
//! therefore passes through `c = m` exactly.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissible::{decimal_uint, LinearSystem};
use crate::erdos_rankin::{offset_bounds_hold, Construction};
use crate::error::{arg, Error, Result};
use crate::interval_stats::TIE_TOLERANCE;
use crate::numeric::ln_big;
use crate::sieve::{is_prime_big, is_prime_small, PrimeTable, DEFAULT_ROUNDS};

/// Largest `x` accepted by [`count_prime_rich`].
pub const RICH_BUDGET: u64 = 100_000_000;

/// Source of primality answers for a walk.
pub trait PrimalityOracle: Sync {
    /// Errors when `n` lies outside the oracle's coverage.
    fn is_prime(&self, n: &BigUint) -> Result<bool>;
}

/// Deterministic below 2^64, Miller–Rabin with `rounds` random bases above.
#[derive(Clone, Copy, Debug)]
pub struct MillerRabin {
    pub rounds: u32,
}

impl Default for MillerRabin {
    fn default() -> Self {
        MillerRabin { rounds: DEFAULT_ROUNDS }
    }
}

impl PrimalityOracle for MillerRabin {
    fn is_prime(&self, n: &BigUint) -> Result<bool> {
        Ok(match n.to_u64() {
            Some(small) => is_prime_small(small),
            None => is_prime_big(n, self.rounds).is_probably_prime(),
        })
    }
}

impl PrimalityOracle for PrimeTable {
    fn is_prime(&self, n: &BigUint) -> Result<bool> {
        match n.to_u64() {
            Some(v) if self.contains(v) => Ok(PrimeTable::is_prime(self, v)),
            _ => arg(format!("{n} lies outside the sieved range [{}, {})", self.lo(), self.hi())),
        }
    }
}

/// Uses a construction's divisor certificates for the non-offset positions
/// `t ∈ [1, ⌊z⌋]` above `N_0 = g·n + h` and Miller–Rabin everywhere else.
pub struct CertifiedOracle<'a> {
    construction: &'a Construction,
    base: BigUint,
    fallback: MillerRabin,
}

impl<'a> CertifiedOracle<'a> {
    pub fn new(construction: &'a Construction, n: &BigUint, rounds: u32) -> Self {
        CertifiedOracle {
            construction,
            base: construction.base(n),
            fallback: MillerRabin { rounds },
        }
    }
}

impl PrimalityOracle for CertifiedOracle<'_> {
    fn is_prime(&self, n: &BigUint) -> Result<bool> {
        if n > &self.base {
            if let Some(t) = (n - &self.base).to_i64() {
                if self.construction.certificate(t).is_some() {
                    return Ok(false);
                }
            }
        }
        self.fallback.is_prime(n)
    }
}

/// `⌊λ log N + 10^-9⌋`, zero for `N <= 1`.
pub fn window_width_big(n: &BigUint, lambda: f64) -> u64 {
    if n.bits() <= 1 {
        return 0;
    }
    (lambda * ln_big(n) + TIE_TOLERANCE).floor() as u64
}

/// Counts `c_j = #(I_j ∩ P)` for `j = j_start, …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkTrace {
    #[serde(with = "decimal_uint")]
    pub n0: BigUint,
    pub lambda: f64,
    pub j_start: u64,
    pub counts: Vec<u64>,
    pub located_j: Option<u64>,
}

impl WalkTrace {
    /// A bare trace, e.g. for testing the search on given counts.
    pub fn from_counts(counts: Vec<u64>) -> Self {
        WalkTrace {
            n0: BigUint::default(),
            lambda: 0.0,
            j_start: 0,
            counts,
            located_j: None,
        }
    }

    pub fn j_end(&self) -> u64 {
        self.j_start + self.counts.len() as u64 - 1
    }

    pub fn count(&self, j: u64) -> Option<u64> {
        j.checked_sub(self.j_start).and_then(|i| self.counts.get(i as usize)).copied()
    }
}

/// Counts for `j = 0..=j_max`.
pub fn window_counts(oracle: &dyn PrimalityOracle, n0: &BigUint, lambda: f64, j_max: u64) -> Result<WalkTrace> {
    window_counts_range(oracle, n0, lambda, 0, j_max)
}

/// Counts for `j = j_start..=j_end`, from one primality query per integer.
pub fn window_counts_range(oracle: &dyn PrimalityOracle, n0: &BigUint, lambda: f64, j_start: u64, j_end: u64) -> Result<WalkTrace> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return arg(format!("lambda must be a positive real, got {lambda}"));
    }
    if j_end < j_start {
        return arg(format!("empty walk: j_end = {j_end} < j_start = {j_start}"));
    }
    let widths: Vec<u64> = (j_start..=j_end).map(|j| window_width_big(&(n0 + j), lambda)).collect();
    let reach = (j_start..=j_end).zip(&widths).map(|(j, w)| j + w).max().unwrap();
    // flags[i] is the primality of N_0 + j_start + 1 + i
    let flags = (j_start + 1..=reach)
        .into_par_iter()
        .map(|t| oracle.is_prime(&(n0 + t)))
        .collect::<Result<Vec<bool>>>()?;
    let mut prefix = vec![0u64; flags.len() + 1];
    for (i, &f) in flags.iter().enumerate() {
        prefix[i + 1] = prefix[i] + f as u64;
    }
    let counts = (j_start..=j_end)
        .zip(&widths)
        .map(|(j, w)| prefix[(j + w - j_start) as usize] - prefix[(j - j_start) as usize])
        .collect();
    Ok(WalkTrace {
        n0: n0.clone(),
        lambda,
        j_start,
        counts,
        located_j: None,
    })
}

/// True iff `c_{j+1} >= c_j − 1` throughout.
pub fn check_step_property(trace: &WalkTrace) -> bool {
    trace.counts.windows(2).all(|w| w[1] + 1 >= w[0])
}

/// The smallest `j >= j0` with `c_j = m`, where `j0` is the first index with
/// `c ≥ m`.
///
/// Requires a later index with `c <= m` (the walk must come back down);
/// otherwise, or if no `c ≥ m` exists, returns [`Error::NotFound`].
pub fn find_exact(trace: &WalkTrace, m: u64) -> Result<u64> {
    let c = &trace.counts;
    let Some(i0) = c.iter().position(|&v| v >= m) else {
        return Err(Error::NotFound(format!("no window with at least {m} primes")));
    };
    let Some(i1) = c[i0..].iter().position(|&v| v <= m).map(|i| i + i0) else {
        return Err(Error::NotFound(format!("no window with at most {m} primes after j = {}", trace.j_start + i0 as u64)));
    };
    match c[i0..=i1].iter().position(|&v| v == m) {
        Some(i) => Ok(trace.j_start + (i0 + i) as u64),
        None => Err(Error::Internal(format!("walk skips the value {m}: step property violated"))),
    }
}

#[derive(Clone, Debug)]
pub struct LocateOptions {
    /// Miller–Rabin rounds for integers above 2^64.
    pub rounds: u32,
    /// Defaults to `h_1 − 1`.
    pub j_start: Option<u64>,
    /// Defaults to `⌊2λ log N_0⌋`.
    pub j_end: Option<u64>,
    /// Scale for the offset-bound report; defaults to the construction's `x`.
    pub x: Option<f64>,
}

impl Default for LocateOptions {
    fn default() -> Self {
        LocateOptions {
            rounds: DEFAULT_ROUNDS,
            j_start: None,
            j_end: None,
            x: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocateResult {
    #[serde(with = "decimal_uint")]
    pub n: BigUint,
    pub m: u64,
    pub j: u64,
    #[serde(with = "decimal_uint")]
    pub n_j: BigUint,
    pub width: u64,
    /// The primes of `(N_j, N_j + width]`, found by direct testing.
    #[serde(with = "decimal_list")]
    pub primes_in_window: Vec<BigUint>,
    /// Offsets `h_i` with `L_i(n)` prime.
    pub form_primes: Vec<i64>,
    /// Every `j` of the walk with `c_j = m`.
    pub all_exact: Vec<u64>,
    /// The first window holds every form value.
    pub start_has_all_forms: bool,
    /// The last window holds no form value.
    pub end_has_no_forms: bool,
    /// Whether the offsets satisfy the spread and placement bounds at `x`.
    pub offset_bounds: Option<bool>,
    pub trace: WalkTrace,
}

/// Walks the windows above `N_0 = g·n + h` and returns the first one with
/// exactly `m` primes, recounted independently.
pub fn locate(c: &Construction, n: &BigUint, m: u64) -> Result<LocateResult> {
    locate_with(c, n, m, &LocateOptions::default())
}

pub fn locate_with(c: &Construction, n: &BigUint, m: u64, opts: &LocateOptions) -> Result<LocateResult> {
    let lambda = c.params.lambda;
    let n0 = c.base(n);
    let direct = MillerRabin { rounds: opts.rounds };
    let offsets = c.offsets.as_slice();
    let mut form_primes = Vec::new();
    for &t in offsets {
        if direct.is_prime(&(&n0 + t as u64))? {
            form_primes.push(t);
        }
    }
    if (form_primes.len() as u64) < m {
        return arg(format!("only {} of the {} form values are prime at n = {n}, need {m}", form_primes.len(), offsets.len()));
    }
    let j_start = opts.j_start.unwrap_or((c.offsets.first() - 1).max(0) as u64);
    let j_end = opts.j_end.unwrap_or((2.0 * lambda * ln_big(&n0)).floor() as u64);
    let oracle = CertifiedOracle::new(c, n, opts.rounds);
    let mut trace = window_counts_range(&oracle, &n0, lambda, j_start, j_end)?;
    let j = find_exact(&trace, m)?;
    trace.located_j = Some(j);

    let n_j = &n0 + j;
    let width = window_width_big(&n_j, lambda);
    let mut primes_in_window = Vec::new();
    for t in 1..=width {
        let v = &n_j + t;
        if direct.is_prime(&v)? {
            primes_in_window.push(v);
        }
    }
    if primes_in_window.len() as u64 != m {
        return Err(Error::Internal(format!(
            "walk counted {m} primes in (N_{j}, N_{j} + {width}] but direct testing finds {}",
            primes_in_window.len()
        )));
    }

    let holds = |j: u64, t: i64| {
        let w = window_width_big(&(&n0 + j), lambda);
        t > j as i64 && t <= (j + w) as i64
    };
    let start_has_all_forms = offsets.iter().all(|&t| holds(j_start, t));
    let end_has_no_forms = !offsets.iter().any(|&t| holds(j_end, t));
    let all_exact = trace
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == m)
        .map(|(i, _)| trace.j_start + i as u64)
        .collect();
    Ok(LocateResult {
        n: n.clone(),
        m,
        j,
        n_j,
        width,
        primes_in_window,
        form_primes,
        all_exact,
        start_has_all_forms,
        end_has_no_forms,
        offset_bounds: opts.x.or(c.params.x).map(|x| offset_bounds_hold(lambda, x, &c.offsets)),
        trace,
    })
}

/// [`locate_with`] over many `n` in parallel, results in input order.
pub fn locate_batch(c: &Construction, ns: &[u64], m: u64, opts: &LocateOptions) -> Vec<Result<LocateResult>> {
    ns.par_iter().map(|&n| locate_with(c, &BigUint::from(n), m, opts)).collect()
}

/// `#{n ∈ [x, 2x) : at least m of the L_i(n) are prime}` by enumeration.
pub fn count_prime_rich(system: &LinearSystem, x: u64, m: u64, rounds: u32) -> Result<u64> {
    if x > RICH_BUDGET {
        return Err(Error::Resource(format!("x = {x} exceeds the enumeration budget {RICH_BUDGET}")));
    }
    if m == 0 {
        return Ok(x);
    }
    let oracle = MillerRabin { rounds };
    let rich = (x..2 * x)
        .into_par_iter()
        .map(|n| {
            let mut hits = 0;
            for form in system.forms() {
                if let Some(v) = form.eval_unsigned(n) {
                    if oracle.is_prime(&v).expect("unbounded oracle") {
                        hits += 1;
                        if hits >= m {
                            return 1u64;
                        }
                    }
                }
            }
            0
        })
        .sum();
    Ok(rich)
}

mod decimal_list {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|n| n.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|s| s.parse().map_err(D::Error::custom)).collect()
    }
}
