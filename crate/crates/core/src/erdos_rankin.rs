//! Erdős–Rankin style construction of a system of linear forms whose windows
//! hold no primes apart from the form values themselves.
//!
//! The pipeline is:
//!
//! 1. parameters `(k, y, z, B)`, either derived from `(x, λ, m, C)` by the
//!    asymptotic formulas or given explicitly;
//! 2. residue classes `a_p (mod p)` for the primes `p <= y` with `p ∤ B`,
//!    chosen so that exactly `k` integers `h_1 < … < h_k` of `[1, ⌊z⌋]`
//!    escape every class;
//! 3. `g = ∏ p` and the CRT shift `h` with `h ≡ −a_p (mod p)`;
//! 4. the forms `L_i(n) = g·n + h + h_i`.
//!
//! Any other `t <= ⌊z⌋` lies in some class `a_p`, so `p | g·n + h + t` for
//! every `n`: the only primes in `(g·n + h, g·n + h + z]` are the `L_i(n)`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissible::{decimal_uint, is_admissible_offsets, mod_inverse, obstruction, LinearForm, LinearSystem, OffsetTuple};
use crate::error::{arg, Error, Result};
use crate::numeric::{iterated_log, ln_big};
use crate::sieve::{is_prime_big, is_prime_small};

/// Seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 7;

/// Retry budget of [`sieve_residues`].
pub const DEFAULT_MAX_ATTEMPTS: u32 = 4096;

/// Largest `y` accepted; the residue domain is listed by trial division.
pub const MAX_Y: f64 = 1e7;

/// Largest `k` accepted.
pub const MAX_K: usize = 1 << 16;

const ATTEMPT_BATCH: u32 = 64;

// Width of the uniform noise added to kill counts on randomized attempts.
const GREEDY_SPREAD: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamMode {
    /// From `(x, λ, m, C)` through the asymptotic formulas.
    Derived,
    /// Explicit `(k, y, z, B)`.
    Override,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub mode: ParamMode,
    pub lambda: f64,
    pub m: u64,
    /// The sieve constant `C`; it has no known numeric value and defaults to 1.
    pub c: f64,
    pub k: usize,
    /// `β_i = 2^{i−k}·λ`, ascending.
    pub betas: Vec<f64>,
    /// Only present in derived mode.
    pub v: Option<f64>,
    pub y: f64,
    pub z: f64,
    pub b: u64,
    /// The scale `x` the parameters were derived for, when known.
    pub x: Option<f64>,
    /// Preferred positions of the survivors, one per offset.
    pub targets: Option<Vec<f64>>,
}

/// The smallest positive integer `k` with `k >= C`, `k >= e²` and
/// `k >= e^{2Cm}`.
pub fn choose_k(m: u64, c: f64) -> usize {
    let bound = c.max(std::f64::consts::E.powi(2)).max((2.0 * c * m as f64).exp());
    if bound >= usize::MAX as f64 {
        return usize::MAX;
    }
    (bound.ceil() as usize).max(1)
}

/// `β_i = 2^{i−k}·λ` for `i = 1..=k`.
pub fn betas(lambda: f64, k: usize) -> Vec<f64> {
    (1..=k).map(|i| lambda * 2f64.powi(i as i32 - k as i32)).collect()
}

fn check_common(lambda: f64, c: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return arg(format!("lambda must be a positive real, got {lambda}"));
    }
    if !(c.is_finite() && c > 0.0) {
        return arg(format!("C must be a positive real, got {c}"));
    }
    Ok(())
}

/// Parameters from the asymptotic formulas
///
/// ```text
/// v = log₃x / (3(1+3λ)·log₄x),  y = 3(1+3λ)·log x·log₄x / log₃x,  z = (1+3λ)·log x
/// ```
///
/// followed by the checks `v >= 1` and `2y(1 + (1+β_k)v) <= 2z <= y·log₂y/log₃y`,
/// in that order. The first failing inequality is returned as
/// [`Error::Infeasible`]; nothing is clamped.
pub fn derive_params(x: f64, lambda: f64, m: u64, c: f64) -> Result<ConstructionParams> {
    check_common(lambda, c)?;
    let (Some(l3), Some(l4)) = (iterated_log(x, 3), iterated_log(x, 4)) else {
        return arg(format!("x = {x} is too small: log log log log x must be defined"));
    };
    if !(l4 > 0.0) {
        return arg(format!("x = {x} is too small: log log log log x = {l4} <= 0"));
    }
    let k = choose_k(m, c);
    if k > MAX_K {
        return Err(Error::Resource(format!("k = {k} exceeds {MAX_K}")));
    }
    let a = 1.0 + 3.0 * lambda;
    let log_x = x.ln();
    let v = l3 / (3.0 * a * l4);
    let y = 3.0 * a * log_x * l4 / l3;
    let z = a * log_x;
    let betas = betas(lambda, k);
    let beta_k = *betas.last().unwrap();

    if v < 1.0 {
        return Err(Error::Infeasible {
            inequality: "v >= 1".into(),
            lhs: v,
            rhs: 1.0,
        });
    }
    let lower = 2.0 * y * (1.0 + (1.0 + beta_k) * v);
    if lower > 2.0 * z {
        return Err(Error::Infeasible {
            inequality: "2y(1 + (1 + beta_k) v) <= 2z".into(),
            lhs: lower,
            rhs: 2.0 * z,
        });
    }
    let upper = match (iterated_log(y, 2), iterated_log(y, 3)) {
        (Some(l2y), Some(l3y)) if l3y > 0.0 => y * l2y / l3y,
        _ => f64::NAN,
    };
    if !(2.0 * z <= upper) {
        return Err(Error::Infeasible {
            inequality: "2z <= y log2(y) / log3(y)".into(),
            lhs: 2.0 * z,
            rhs: upper,
        });
    }
    let targets = betas.iter().map(|b| y + b * v * y).collect();
    Ok(ConstructionParams {
        mode: ParamMode::Derived,
        lambda,
        m,
        c,
        k,
        betas,
        v: Some(v),
        y,
        z,
        b: 1,
        x: Some(x),
        targets: Some(targets),
    })
}

/// Explicit desk-scale parameters, bypassing the asymptotic formulas.
///
/// `λ`, `m` and `C` default to 1, 0 and 1; adjust them with the `with_*`
/// builders.
pub fn override_params(k: usize, y: f64, z: f64, b: u64) -> Result<ConstructionParams> {
    if k == 0 || k > MAX_K {
        return arg(format!("k must lie in 1..={MAX_K}, got {k}"));
    }
    if !(y.is_finite() && (0.0..=MAX_Y).contains(&y)) {
        return arg(format!("y must lie in [0, {MAX_Y}], got {y}"));
    }
    if !(z.is_finite() && z >= 1.0 && z < (1u64 << 40) as f64) {
        return arg(format!("z must be a real >= 1, got {z}"));
    }
    if b == 0 {
        return arg("B must be a positive integer");
    }
    Ok(ConstructionParams {
        mode: ParamMode::Override,
        lambda: 1.0,
        m: 0,
        c: 1.0,
        k,
        betas: betas(1.0, k),
        v: None,
        y,
        z,
        b,
        x: None,
        targets: None,
    })
}

impl ConstructionParams {
    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        check_common(lambda, self.c)?;
        self.lambda = lambda;
        self.betas = betas(lambda, self.k);
        Ok(self)
    }

    pub fn with_m(mut self, m: u64) -> Self {
        self.m = m;
        self
    }

    pub fn with_c(mut self, c: f64) -> Result<Self> {
        check_common(self.lambda, c)?;
        self.c = c;
        Ok(self)
    }

    pub fn with_x(mut self, x: f64) -> Result<Self> {
        if !(x.is_finite() && x > 1.0) {
            return arg(format!("x must be a real > 1, got {x}"));
        }
        self.x = Some(x);
        Ok(self)
    }

    pub fn with_targets(mut self, targets: Vec<f64>) -> Result<Self> {
        if targets.len() != self.k {
            return arg(format!("expected {} targets, got {}", self.k, targets.len()));
        }
        self.targets = Some(targets);
        Ok(self)
    }

    /// `⌊z⌋`.
    pub fn z_floor(&self) -> i64 {
        self.z.floor() as i64
    }
}

/// The `λ` for which `z = (1 + 3λ)·log x`.
pub fn lambda_for(z: f64, x: f64) -> f64 {
    (z / x.ln() - 1.0) / 3.0
}

/// The primes `p <= y` with `p ∤ B`, ascending.
pub fn residue_domain(y: f64, b: u64) -> Result<Vec<u64>> {
    if !(y.is_finite() && y <= MAX_Y) {
        return arg(format!("y must be at most {MAX_Y}, got {y}"));
    }
    if b == 0 {
        return arg("B must be a positive integer");
    }
    let top = y.max(0.0).floor() as u64;
    Ok((2..=top).filter(|&p| is_prime_small(p) && !b.is_multiple_of(p)).collect())
}

/// Residue classes `a_p (mod p)`, keyed by `p`.
///
/// Serialized as a list of `[p, a_p]` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[u64; 2]>", into = "Vec<[u64; 2]>")]
pub struct ResidueAssignment(BTreeMap<u64, u64>);

impl ResidueAssignment {
    /// Checks that every key is prime and every residue lies in `[0, p)`.
    pub fn new(map: BTreeMap<u64, u64>) -> Result<Self> {
        for (&p, &a) in &map {
            if !is_prime_small(p) {
                return arg(format!("residue modulus {p} is not prime"));
            }
            if a >= p {
                return arg(format!("residue {a} is not reduced mod {p}"));
            }
        }
        Ok(ResidueAssignment(map))
    }

    pub fn get(&self, p: u64) -> Option<u64> {
        self.0.get(&p).copied()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.0.iter().map(|(&p, &a)| (p, a))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The smallest `p` with `t ≡ a_p (mod p)`.
    pub fn hit(&self, t: i64) -> Option<u64> {
        self.iter().find(|&(p, a)| t.rem_euclid(p as i64) as u64 == a).map(|(p, _)| p)
    }

    fn insert(&mut self, p: u64, a: u64) {
        self.0.insert(p, a);
    }
}

impl TryFrom<Vec<[u64; 2]>> for ResidueAssignment {
    type Error = Error;

    fn try_from(pairs: Vec<[u64; 2]>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for [p, a] in pairs {
            if map.insert(p, a).is_some() {
                return arg(format!("duplicate residue modulus {p}"));
            }
        }
        ResidueAssignment::new(map)
    }
}

impl From<ResidueAssignment> for Vec<[u64; 2]> {
    fn from(r: ResidueAssignment) -> Self {
        r.iter().map(|(p, a)| [p, a]).collect()
    }
}

/// The integers of `[1, ⌊z⌋]` outside every class `a_p (mod p)`.
pub fn survivors(residues: &ResidueAssignment, z: f64) -> Vec<i64> {
    (1..=z.floor() as i64).filter(|&t| residues.hit(t).is_none()).collect()
}

/// True iff the survivors in `[1, ⌊z⌋]` are exactly `offsets`.
pub fn verify_survivors(residues: &ResidueAssignment, z: f64, offsets: &OffsetTuple) -> bool {
    survivors(residues, z) == offsets.as_slice()
}

/// Best effort of a failed [`sieve_residues`] run: the residues assigned before
/// the attempt stranded, and what was still alive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialAssignment {
    pub attempt: u32,
    pub residues: ResidueAssignment,
    pub survivors: Vec<i64>,
}

/// A successful [`sieve_residues`] run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveOutcome {
    pub residues: ResidueAssignment,
    pub survivors: Vec<i64>,
    pub seed: u64,
    /// Index of the winning attempt; attempt 0 is the plain greedy pass.
    pub attempt: u32,
}

// For each target in order, the nearest element of `alive` not taken by an
// earlier target (ties to the smaller element).
fn nearest_distinct(alive: &[i64], targets: &[f64]) -> Vec<i64> {
    let mut taken: Vec<i64> = Vec::with_capacity(targets.len());
    for &t in targets {
        let best = alive
            .iter()
            .filter(|s| !taken.contains(s))
            .min_by(|&&a, &&b| (a as f64 - t).abs().total_cmp(&(b as f64 - t).abs()).then(a.cmp(&b)));
        if let Some(&s) = best {
            taken.push(s);
        }
    }
    taken
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

// One greedy pass over the domain primes in ascending order.
//
// Each prime takes the class removing the most live integers, subject to two
// rules: never remove more than `alive − k` (so the pass cannot undershoot
// k), and avoid the classes of the survivors currently nearest the targets
// unless no other class qualifies. Ties go to the smallest residue; with an
// RNG, kill counts are perturbed by uniform noise first.
fn greedy_attempt(
    domain: &[u64],
    z: i64,
    k: usize,
    targets: Option<&[f64]>,
    mut rng: Option<ChaCha8Rng>,
    attempt: u32,
) -> std::result::Result<(ResidueAssignment, Vec<i64>), PartialAssignment> {
    let mut alive: Vec<i64> = (1..=z).collect();
    let mut residues = ResidueAssignment::default();
    let fail = |residues: ResidueAssignment, alive: Vec<i64>| PartialAssignment {
        attempt,
        residues,
        survivors: alive,
    };
    for &p in domain {
        if alive.len() < k {
            return Err(fail(residues, alive));
        }
        let need = alive.len() - k;
        let protected = targets.map(|ts| nearest_distinct(&alive, ts)).unwrap_or_default();
        let pu = p as usize;
        // Classes mod p beyond ⌊z⌋ are empty; only the first min(p, z+1) matter
        // for counting, but every residue is a candidate.
        let mut kills = vec![0usize; pu.min(z as usize + 1).max(1)];
        let mut guarded = vec![false; kills.len()];
        for &t in &alive {
            kills[(t as u64 % p) as usize] += 1;
        }
        for &t in &protected {
            guarded[(t as u64 % p) as usize] = true;
        }
        let kills_of = |r: usize| kills.get(r).copied().unwrap_or(0);
        let guarded_of = |r: usize| guarded.get(r).copied().unwrap_or(false);
        let mut pick = |allow_guarded: bool| -> Option<usize> {
            let mut best: Option<(f64, usize)> = None;
            // Residues past the counted range all kill nothing; the smallest
            // of them stands for the rest.
            let last = if pu > kills.len() { kills.len() } else { pu - 1 };
            for r in 0..=last {
                if kills_of(r) > need || (!allow_guarded && guarded_of(r)) {
                    continue;
                }
                let noise = rng.as_mut().map_or(0.0, |g| unit(g) * GREEDY_SPREAD);
                let score = kills_of(r) as f64 + noise;
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, r));
                }
            }
            best.map(|(_, r)| r)
        };
        let Some(r) = pick(false).or_else(|| pick(true)) else {
            return Err(fail(residues, alive));
        };
        residues.insert(p, r as u64);
        alive.retain(|&t| t as u64 % p != r as u64);
    }
    let on_target = targets.is_none_or(|ts| nearest_distinct(&alive, ts) == alive);
    let admissible = OffsetTuple::new(alive.clone()).is_ok_and(|o| is_admissible_offsets(&o));
    if alive.len() == k && on_target && admissible {
        Ok((residues, alive))
    } else {
        Err(fail(residues, alive))
    }
}

/// Chooses classes `a_p (mod p)` for `p <= y`, `p ∤ B`, leaving exactly `k`
/// admissible survivors in `[1, ⌊z⌋]`.
///
/// Attempt 0 is a deterministic greedy pass; attempt `i >= 1` perturbs the
/// greedy choices with ChaCha8 stream `i` of `seed`. Attempts run in parallel
/// batches and the lowest successful index wins, so the result depends only
/// on the arguments. With `targets`, each survivor must be the one nearest its
/// target.
pub fn sieve_residues(y: f64, z: f64, b: u64, k: usize, targets: Option<&[f64]>, seed: u64, max_attempts: u32) -> Result<SieveOutcome> {
    if k == 0 {
        return arg("k must be positive");
    }
    if !(z.is_finite() && z >= 1.0 && z < (1u64 << 40) as f64) {
        return arg(format!("z must be a real >= 1, got {z}"));
    }
    if let Some(ts) = targets {
        if ts.len() != k {
            return arg(format!("expected {k} targets, got {}", ts.len()));
        }
    }
    let domain = residue_domain(y, b)?;
    let zi = z.floor() as i64;
    let mut best: Option<PartialAssignment> = None;
    let mut start = 0;
    while start < max_attempts.max(1) {
        let end = (start + ATTEMPT_BATCH).min(max_attempts.max(1));
        let results: Vec<_> = (start..end)
            .into_par_iter()
            .map(|i| {
                let rng = (i > 0).then(|| {
                    let mut g = ChaCha8Rng::seed_from_u64(seed);
                    g.set_stream(i as u64);
                    g
                });
                greedy_attempt(&domain, zi, k, targets, rng, i)
            })
            .collect();
        for (i, r) in (start..end).zip(results) {
            match r {
                Ok((residues, survivors)) => {
                    return Ok(SieveOutcome {
                        residues,
                        survivors,
                        seed,
                        attempt: i,
                    })
                }
                Err(partial) => {
                    let dist = |p: &PartialAssignment| p.survivors.len().abs_diff(k);
                    if best.as_ref().is_none_or(|b| dist(&partial) < dist(b)) {
                        best = Some(partial);
                    }
                }
            }
        }
        start = end;
    }
    Err(Error::ConstructionFailed {
        attempts: max_attempts.max(1),
        reason: format!("no assignment of {} classes leaves exactly {k} admissible survivors in [1, {zi}]", domain.len()),
        best: best.map(Box::new),
    })
}

/// `g = ∏ p` over the assignment and the unique `h ∈ [0, g)` with
/// `h ≡ −a_p (mod p)` for every `p`.
pub fn crt_combine(residues: &ResidueAssignment) -> (BigUint, BigUint) {
    let g: BigUint = residues.primes().map(BigUint::from).product();
    let mut h = BigUint::zero();
    for (p, a) in residues.iter() {
        let cofactor = &g / p;
        let inv = mod_inverse((&cofactor % p).to_u64().unwrap(), p).expect("distinct primes");
        let r = (p - a) % p;
        h += cofactor * (r as u128 * inv as u128 % p as u128).to_u64().unwrap();
    }
    (g.clone(), h % g)
}

/// The forms `g·n + h + h_i`, which must be admissible.
pub fn build_system(g: &BigUint, h: &BigUint, offsets: &OffsetTuple) -> Result<LinearSystem> {
    let forms = offsets
        .as_slice()
        .iter()
        .map(|&t| LinearForm::new(BigInt::from(g.clone()), BigInt::from(h.clone()) + t))
        .collect::<Result<Vec<_>>>()?;
    let system = LinearSystem::new(forms)?;
    if let Some(p) = obstruction(&system) {
        return Err(Error::Internal(format!("system {} is not admissible (p = {p})", system.to_text().replace('\n', "; "))));
    }
    Ok(system)
}

/// Output of the construction pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub params: ConstructionParams,
    pub residues: ResidueAssignment,
    pub offsets: OffsetTuple,
    #[serde(with = "decimal_uint")]
    pub g: BigUint,
    #[serde(with = "decimal_uint")]
    pub h: BigUint,
    pub seed: u64,
    pub attempt: u32,
}

/// Runs the pipeline with [`DEFAULT_MAX_ATTEMPTS`].
pub fn construct(params: &ConstructionParams, seed: u64) -> Result<Construction> {
    construct_with(params, seed, DEFAULT_MAX_ATTEMPTS)
}

pub fn construct_with(params: &ConstructionParams, seed: u64, max_attempts: u32) -> Result<Construction> {
    let out = sieve_residues(params.y, params.z, params.b, params.k, params.targets.as_deref(), seed, max_attempts)?;
    Construction::assemble(params.clone(), out.residues, OffsetTuple::new(out.survivors)?, seed, out.attempt)
}

impl Construction {
    /// Builds a construction from a residue assignment, checking the survivor
    /// identity and admissibility.
    pub fn assemble(params: ConstructionParams, residues: ResidueAssignment, offsets: OffsetTuple, seed: u64, attempt: u32) -> Result<Self> {
        let domain = residue_domain(params.y, params.b)?;
        if !residues.primes().eq(domain.iter().copied()) {
            return arg("residue domain must be exactly the primes p <= y with p not dividing B");
        }
        if !verify_survivors(&residues, params.z, &offsets) {
            return arg(format!("offsets {:?} are not the survivors {:?}", offsets.as_slice(), survivors(&residues, params.z)));
        }
        let (g, h) = crt_combine(&residues);
        build_system(&g, &h, &offsets)?;
        Ok(Construction {
            params,
            residues,
            offsets,
            g,
            h,
            seed,
            attempt,
        })
    }

    /// Re-checks every invariant, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        let again = Construction::assemble(self.params.clone(), self.residues.clone(), self.offsets.clone(), self.seed, self.attempt)?;
        if again.g != self.g || again.h != self.h {
            return arg(format!("stored (g, h) = ({}, {}) disagree with the residues ({}, {})", self.g, self.h, again.g, again.h));
        }
        Ok(())
    }

    pub fn system(&self) -> LinearSystem {
        build_system(&self.g, &self.h, &self.offsets).expect("validated on construction")
    }

    /// `N_0 = g·n + h`.
    pub fn base(&self, n: &BigUint) -> BigUint {
        &self.g * n + &self.h
    }

    pub fn z_floor(&self) -> i64 {
        self.params.z_floor()
    }

    /// For a non-offset `t ∈ [1, ⌊z⌋]`, the prime `p` with
    /// `p | g·n + h + t` for all `n`.
    pub fn certificate(&self, t: i64) -> Option<u64> {
        if t < 1 || t > self.z_floor() || self.offsets.contains(t) {
            return None;
        }
        self.residues.hit(t)
    }

    /// Whether windows `[g·n + h, g·n + h + z]` of distinct `n` are disjoint,
    /// i.e. `g > z`.
    pub fn windows_disjoint(&self) -> bool {
        self.g > BigUint::from(self.z_floor().max(0) as u64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Construction = serde_json::from_str(text).map_err(|e| Error::Argument(format!("construction: {e}")))?;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub t: i64,
    pub p: u64,
}

/// Window `(g·n + h, g·n + h + ⌊z⌋]` for one sample `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub n: u64,
    #[serde(with = "decimal_uint")]
    pub base: BigUint,
    /// One divisor per non-offset position, checked by exact division.
    pub certificates: Vec<Certificate>,
    /// Non-offset positions whose certificate did not check out.
    pub failures: Vec<i64>,
    /// Offsets `h_i` with `L_i(n)` (probably) prime.
    pub prime_offsets: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowIdentityReport {
    pub rounds: u32,
    pub samples: Vec<SampleRecord>,
    /// True iff no sample has a failure.
    pub certified: bool,
}

/// For each sample `n >= 1`, certifies every non-offset position of the
/// window as composite and tests the `k` form values for primality.
pub fn verify_window_identity(c: &Construction, samples: &[u64], rounds: u32) -> Result<WindowIdentityReport> {
    if samples.contains(&0) {
        return arg("samples must be positive integers");
    }
    let z = c.z_floor();
    let records: Vec<SampleRecord> = samples
        .par_iter()
        .map(|&n| {
            let base = c.base(&BigUint::from(n));
            let mut certificates = Vec::new();
            let mut failures = Vec::new();
            let mut prime_offsets = Vec::new();
            for t in 1..=z {
                let value = &base + t as u64;
                if c.offsets.contains(t) {
                    if is_prime_big(&value, rounds).is_probably_prime() {
                        prime_offsets.push(t);
                    }
                    continue;
                }
                match c.certificate(t) {
                    Some(p) if (&value % p).is_zero() && value > BigUint::from(p) => certificates.push(Certificate { t, p }),
                    _ => failures.push(t),
                }
            }
            SampleRecord {
                n,
                base,
                certificates,
                failures,
                prime_offsets,
            }
        })
        .collect();
    Ok(WindowIdentityReport {
        rounds,
        certified: records.iter().all(|r| r.failures.is_empty()),
        samples: records,
    })
}

/// `count` distinct pseudo-random integers in `[1, n_max]`, ascending, from
/// ChaCha8 seeded with `seed`.
pub fn sample_ns(seed: u64, count: usize, n_max: u64) -> Result<Vec<u64>> {
    if n_max == 0 || count as u64 > n_max {
        return arg(format!("cannot draw {count} distinct values from [1, {n_max}]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // rejection sampling keeps the draw unbiased
    let zone = u64::MAX - u64::MAX % n_max;
    let mut out = std::collections::BTreeSet::new();
    while out.len() < count {
        let v = rng.next_u64();
        if v < zone {
            out.insert(v % n_max + 1);
        }
    }
    Ok(out.into_iter().collect())
}

/// `ε(X) = (log₄X)² / log₃X` from `log X`; `None` when undefined.
pub fn epsilon_from_log(log_big_x: f64) -> Option<f64> {
    let l3 = iterated_log(log_big_x, 2)?;
    let l4 = iterated_log(l3, 1)?;
    (l3 > 0.0).then(|| l4 * l4 / l3)
}

/// Logarithmic bookkeeping of the headline count, for one construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub x: f64,
    pub k: usize,
    pub c: f64,
    #[serde(with = "decimal_uint")]
    pub g: BigUint,
    /// `X = 4gx` in decimal, when `x` is an integer.
    pub big_x: Option<String>,
    pub log_big_x: f64,
    pub epsilon: Option<f64>,
    /// `log X^{1−ε(X)}`.
    pub log_lower_count: Option<f64>,
    /// `log (x / (e^C log x)^k)`.
    pub log_claimed_count: f64,
    pub log_g: f64,
    pub y: f64,
    pub log_g_over_y: Option<f64>,
}

pub fn theorem_report(c: &Construction, x: f64) -> Result<TheoremReport> {
    if !(x.is_finite() && x > 1.0) {
        return arg(format!("x must be a real > 1, got {x}"));
    }
    let log_g = ln_big(&c.g);
    let log_big_x = 4f64.ln() + log_g + x.ln();
    let big_x = (x.fract() == 0.0 && x < 1.8e19).then(|| (&c.g * 4u32 * (x as u64)).to_string());
    let epsilon = epsilon_from_log(log_big_x);
    let k = c.params.k;
    Ok(TheoremReport {
        x,
        k,
        c: c.params.c,
        g: c.g.clone(),
        big_x,
        log_big_x,
        epsilon,
        log_lower_count: epsilon.map(|e| (1.0 - e) * log_big_x),
        log_claimed_count: x.ln() - k as f64 * (c.params.c + x.ln().ln()),
        log_g,
        y: c.params.y,
        log_g_over_y: (c.params.y > 0.0).then(|| log_g / c.params.y),
    })
}

/// Primes in the window `(N_0, N_0 + ⌊z⌋]` that are not form values; always
/// empty for a valid construction. Brute force, for tests.
pub fn stray_primes(c: &Construction, n: u64, rounds: u32) -> Vec<i64> {
    let base = c.base(&BigUint::from(n));
    (1..=c.z_floor())
        .filter(|&t| !c.offsets.contains(t) && is_prime_big(&(&base + t as u64), rounds).is_probably_prime())
        .collect()
}

/// `h_k − h_1 < λ log x − 1`, `1 < h_1` and `h_k < 2λ log x − 1`: the first
/// walk window then holds every form value and the last one none.
pub fn offset_bounds_hold(lambda: f64, x: f64, offsets: &OffsetTuple) -> bool {
    let lx = lambda * x.ln();
    let (h1, hk) = (offsets.first() as f64, offsets.last() as f64);
    hk - h1 < lx - 1.0 && 1.0 < h1 && hk < 2.0 * lx - 1.0
}

impl ConstructionParams {
    /// [`offset_bounds_hold`] at the recorded `x`, if any.
    pub fn offset_bounds_hold(&self, offsets: &OffsetTuple) -> Option<bool> {
        Some(offset_bounds_hold(self.lambda, self.x?, offsets))
    }
}
