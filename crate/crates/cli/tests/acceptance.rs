//! Desk-scale acceptance suite: one PASS/FAIL line per criterion, tolerances
//! pinned below. Empirical criteria that miss their tolerance are reported as
//! failures, never relaxed.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use pslab::admissible::{is_admissible_offsets, LinearForm, OffsetTuple};
use pslab::cramer_model::simulate;
use pslab::discrepancy::{lower_bound_check, FormPrimes};
use pslab::erdos_rankin::{
    construct, lambda_for, override_params, sample_ns, sieve_residues, survivors, verify_survivors, verify_window_identity, Construction,
    DEFAULT_MAX_ATTEMPTS, DEFAULT_SEED,
};
use pslab::interval_stats::{chi_square_poisson, gap_histogram, mean_window_count, tv_distance, window_histogram};
use pslab::interval_walk::{check_step_property, locate};
use pslab::sieve::{count_primes, is_prime_big, is_prime_small, DEFAULT_ROUNDS};

const PI_1E8: u64 = 5_761_455;
const PI_1E9: u64 = 50_847_534;
const SIEVE_BUDGET: Duration = Duration::from_secs(30);
const MEAN_BUDGET: Duration = Duration::from_secs(60);
const MEAN_RANGE: (f64, f64) = (0.95, 1.05);
const TV_PRIMES_MAX: f64 = 0.05;
const GAP_MASS_TOLERANCE: f64 = 0.05;
const TV_MODEL_MAX: f64 = 0.02;
const ADMISSIBLE_BUDGET: Duration = Duration::from_secs(1);
const CONSTRUCTION_BUDGET: Duration = Duration::from_secs(1);
const DISCREPANCY_BUDGET: Duration = Duration::from_secs(10);
const LOWER_BOUND_COUNT: u64 = 1033;
const LOWER_BOUND_RHS: f64 = 542.8;
const LOWER_BOUND_RHS_TOLERANCE: f64 = 0.1;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Independent count: deterministic Miller–Rabin over the integers coprime
/// to 30, after trial division by the primes below 100. Shares no code with
/// the segmented sieve.
fn oracle_pi(limit: u64) -> u64 {
    const SMALL: [u64; 22] = [7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];
    const WHEEL: [u64; 8] = [1, 7, 11, 13, 17, 19, 23, 29];
    let blocks = limit / 30 + 1;
    let wheel_count: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            WHEEL
                .iter()
                .map(|r| b * 30 + r)
                .filter(|&n| n > 1 && n <= limit)
                .filter(|&n| if SMALL.iter().any(|&p| n % p == 0) { SMALL.contains(&n) } else { is_prime_small(n) })
                .count() as u64
        })
        .sum();
    wheel_count + [2, 3, 5].iter().filter(|&&p| p <= limit).count() as u64
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let (s8, s9) = (count_primes(0, 100_000_000).unwrap(), count_primes(0, 1_000_000_000).unwrap());
    let elapsed = started.elapsed();
    let (o8, o9) = (oracle_pi(100_000_000), oracle_pi(1_000_000_000));
    ensure(
        s8 == o8 && s9 == o9 && o8 == PI_1E8 && o9 == PI_1E9 && elapsed < SIEVE_BUDGET,
        format!("sieve π(1e8) = {s8}, π(1e9) = {s9}; oracle {o8}, {o9}; expected {PI_1E8}, {PI_1E9}; sieve time {elapsed:.2?} (< {SIEVE_BUDGET:?})"),
    )
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let mean = mean_window_count(100_000_000, 1.0).unwrap();
    let elapsed = started.elapsed();
    ensure(
        (MEAN_RANGE.0..=MEAN_RANGE.1).contains(&mean) && elapsed < MEAN_BUDGET,
        format!("mean window count at x = 1e8, λ = 1: {mean:.6} (in [{}, {}]); {elapsed:.2?} (< {MEAN_BUDGET:?})", MEAN_RANGE.0, MEAN_RANGE.1),
    )
}

fn criterion_3() -> Outcome {
    let h = window_histogram(100_000_000, 1.0).unwrap();
    let tv = tv_distance(&h, 1.0).unwrap();
    let chi = chi_square_poisson(&h, 1.0, 8).unwrap();
    let freqs: Vec<String> = (0..=5).map(|m| format!("{:.4}", h.frequency(m))).collect();
    ensure(
        tv <= TV_PRIMES_MAX,
        format!("TV(primes, Poisson(1)) at x = 1e8: {tv:.5} (≤ {TV_PRIMES_MAX}); chi-square over m = 0..8: {chi:.1}; frequencies m = 0..5: [{}]", freqs.join(", ")),
    )
}

fn criterion_4() -> Outcome {
    let h = gap_histogram(100_000_000, &[0.0, 1.0]).unwrap();
    let mass = h.mass(0);
    let expected = 1.0 - (-1.0f64).exp();
    ensure(
        (mass - expected).abs() <= GAP_MASS_TOLERANCE,
        format!("mass of d_n / log n in (0, 1] at x = 1e8: {mass:.5} vs 1 − 1/e = {expected:.5} (|diff| ≤ {GAP_MASS_TOLERANCE})"),
    )
}

fn criterion_5() -> Outcome {
    let run = simulate(1_000_000, 2.0, 42).unwrap();
    let tv = tv_distance(&run.histogram, 2.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let pslab = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_pslab")).args(args).current_dir(dir.path()).output().unwrap();
    let first = pslab(&["cramer", "--x", "1000000", "--lambda", "2", "--seed", "42", "--format", "csv", "--out", "model.csv"]);
    let replay = pslab(&["replay", "--manifest", "model.csv.manifest.json", "--out", "replay.csv"]);
    let identical = first.status.success()
        && replay.status.success()
        && fs::read(dir.path().join("model.csv")).unwrap() == fs::read(dir.path().join("replay.csv")).unwrap();
    ensure(
        tv <= TV_MODEL_MAX && identical,
        format!("TV(model, Poisson(2)) at x = 1e6, seed 42: {tv:.5} (≤ {TV_MODEL_MAX}); replay from manifest byte-identical: {identical}"),
    )
}

/// Brute force: a tuple is admissible iff no prime p ≤ 31 sees every residue.
fn brute_admissible(offsets: &[i64]) -> bool {
    [2i64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31].iter().all(|&p| {
        let mut seen = vec![false; p as usize];
        offsets.iter().for_each(|&h| seen[h.rem_euclid(p) as usize] = true);
        seen.contains(&false)
    })
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let tuples: Vec<Vec<i64>> = (0..1000)
        .map(|_| {
            let k = 1 + rng.next_u64() % 6;
            let mut set = std::collections::BTreeSet::new();
            while (set.len() as u64) < k {
                set.insert((rng.next_u64() % 31) as i64);
            }
            set.into_iter().collect()
        })
        .collect();
    let started = Instant::now();
    let mismatches = tuples
        .iter()
        .filter(|t| is_admissible_offsets(&OffsetTuple::new(t.to_vec()).unwrap()) != brute_admissible(t))
        .count();
    let elapsed = started.elapsed();
    let admissible = tuples.iter().filter(|t| brute_admissible(t)).count();
    ensure(
        mismatches == 0 && elapsed < ADMISSIBLE_BUDGET,
        format!("1000 tuples (k ≤ 6, offsets ≤ 30), {admissible} admissible: {mismatches} mismatches; {elapsed:.2?} (< {ADMISSIBLE_BUDGET:?})"),
    )
}

fn desk_construction() -> Construction {
    construct(&override_params(3, 29.0, 60.0, 1).unwrap(), DEFAULT_SEED).unwrap()
}

fn criterion_7() -> Outcome {
    let started = Instant::now();
    let c = desk_construction();
    let survivors_ok = verify_survivors(&c.residues, 60.0, &c.offsets);
    let admissible = is_admissible_offsets(&c.offsets);
    let primorial: BigUint = c.residues.primes().map(BigUint::from).product();
    let crt_ok = c.g == primorial && c.residues.iter().all(|(p, a)| (&c.h + a) % p == BigUint::from(0u32));
    let coprime = c.offsets.as_slice().iter().all(|&t| (&c.h + t as u64).gcd(&c.g) == BigUint::from(1u32));
    let worked = sieve_residues(7.0, 10.0, 1, 2, None, DEFAULT_SEED, DEFAULT_MAX_ATTEMPTS).unwrap();
    let worked_survivors = survivors(&worked.residues, 10.0);
    let elapsed = started.elapsed();
    ensure(
        survivors_ok && admissible && crt_ok && coprime && worked_survivors == [1, 7] && elapsed < CONSTRUCTION_BUDGET,
        format!(
            "(k=3, y=29, z=60, B=1, seed {DEFAULT_SEED}): offsets {:?}, survivors exact {survivors_ok}, admissible {admissible}, \
             CRT round-trip {crt_ok}, gcd(g, h + h_i) = 1 {coprime}; (y=7, z=10) survivors {worked_survivors:?}; {elapsed:.2?} (< {CONSTRUCTION_BUDGET:?})",
            c.offsets.as_slice()
        ),
    )
}

fn criterion_8() -> Outcome {
    let c = desk_construction();
    let ns = sample_ns(8, 100, 1_000_000).unwrap();
    let report = verify_window_identity(&c, &ns, DEFAULT_ROUNDS).unwrap();
    let z = c.z_floor();
    let mut failures = 0usize;
    for s in &report.samples {
        failures += s.failures.len();
        // recheck every certificate by exact division, and that none is missing
        let positions: Vec<i64> = s.certificates.iter().map(|cert| cert.t).collect();
        let expected: Vec<i64> = (1..=z).filter(|t| !c.offsets.contains(*t)).collect();
        if positions != expected {
            failures += 1;
        }
        for cert in &s.certificates {
            let value = &s.base + cert.t as u64;
            if cert.p < 2 || (&value % cert.p) != BigUint::from(0u32) || value == BigUint::from(cert.p) {
                failures += 1;
            }
        }
    }
    let checked: usize = report.samples.iter().map(|s| s.certificates.len()).sum();
    ensure(
        failures == 0 && report.samples.len() == 100,
        format!("{} samples n ≤ 1e6, {checked} divisor certificates rechecked: {failures} failures", report.samples.len()),
    )
}

fn criterion_9() -> Outcome {
    let params = override_params(3, 29.0, 60.0, 1)
        .and_then(|p| p.with_lambda(lambda_for(60.0, 1e6)))
        .and_then(|p| p.with_x(1e6))
        .and_then(|p| p.with_targets(vec![12.0, 18.0, 24.0]))
        .unwrap();
    let c = construct(&params, DEFAULT_SEED).unwrap();
    let lambda = c.params.lambda;
    let mut lines = vec![format!("offsets {:?}, λ = {lambda:.4}, windows disjoint {}", c.offsets.as_slice(), c.windows_disjoint())];
    let mut failures = usize::from(!c.windows_disjoint());
    for m in 0..=2u64 {
        let mut chosen = 0;
        let mut n = 0u64;
        let (mut m_fail, mut mean_j) = (0, 0.0);
        while chosen < 100 {
            n += 1;
            let base = c.base(&BigUint::from(n));
            let form_primes = c.offsets.as_slice().iter().filter(|&&t| is_prime_big(&(&base + t as u64), DEFAULT_ROUNDS).is_probably_prime()).count();
            if (form_primes as u64) < m {
                continue;
            }
            chosen += 1;
            let ok = match locate(&c, &BigUint::from(n), m) {
                Ok(r) => {
                    mean_j += r.j as f64 / 100.0;
                    // recount (N_j, N_j + ⌊λ log N_j⌋] from scratch
                    let n_j = &base + r.j;
                    let width = (lambda * pslab::numeric::ln_big(&n_j) + 1e-9).floor() as u64;
                    let recount = (1..=width).filter(|&t| is_prime_big(&(&n_j + t), DEFAULT_ROUNDS).is_probably_prime()).count() as u64;
                    check_step_property(&r.trace) && n_j == r.n_j && recount == m
                }
                Err(_) => false,
            };
            m_fail += usize::from(!ok);
        }
        failures += m_fail;
        lines.push(format!("m = {m}: 100 n (up to {n}), {m_fail} failures, mean j {mean_j:.1}"));
    }
    ensure(failures == 0, lines.join("; "))
}

fn naive_is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn naive_phi(q: u64) -> u64 {
    (1..=q).filter(|a| a.gcd(&q) == 1).count() as u64
}

fn criterion_10() -> Outcome {
    let started = Instant::now();
    let form = LinearForm::offset(1);
    let x = 10_000u64;
    let fp = FormPrimes::new(&form, x).and_then(|f| f.with_interval()).unwrap();
    let prime_n: Vec<u64> = (x..2 * x).filter(|n| naive_is_prime(n + 1)).collect();
    let interval = (x + 1..2 * x + 1).filter(|&v| naive_is_prime(v)).count() as u64;
    let mut mismatches = 0;
    let mut classes = 0;
    for q in 1..=50u64 {
        let main = interval as f64 / naive_phi(q) as f64;
        let mut best: Option<(u64, f64)> = None;
        for a in 0..q {
            if (a + 1).gcd(&q) != 1 {
                continue;
            }
            classes += 1;
            let d = prime_n.iter().filter(|&&n| n % q == a).count() as f64 - main;
            mismatches += usize::from(fp.delta(q, a).unwrap() != d);
            if best.is_none_or(|(_, b)| d.abs() > b.abs()) {
                best = Some((a, d));
            }
        }
        let md = fp.max_delta(q).unwrap();
        mismatches += usize::from(md.a_star != best.map(|b| b.0) || md.delta != best.map(|b| b.1));
    }
    let small = FormPrimes::new(&form, 10).and_then(|f| f.with_interval()).unwrap();
    let zeros: Vec<f64> = [(2, 0), (1, 0), (3, 0)].iter().map(|&(q, a)| small.delta(q, a).unwrap()).collect();
    let elapsed = started.elapsed();
    ensure(
        mismatches == 0 && zeros.iter().all(|&d| d == 0.0) && elapsed < DISCREPANCY_BUDGET,
        format!(
            "L = n + 1, x = 1e4, q ≤ 50: {classes} classes and 50 maxima, {mismatches} mismatches; Δ at x = 10 for (q, a) = (2,0), (1,0), (3,0): {zeros:?}; {elapsed:.2?} (< {DISCREPANCY_BUDGET:?})"
        ),
    )
}

fn criterion_11() -> Outcome {
    let r = lower_bound_check(&LinearForm::offset(1), 10_000, 1).unwrap();
    ensure(
        r.holds && r.count == LOWER_BOUND_COUNT && (r.rhs - LOWER_BOUND_RHS).abs() <= LOWER_BOUND_RHS_TOLERANCE,
        format!(
            "L = n + 1, x = 1e4, B = 1: left side {} (count {}, expected {LOWER_BOUND_COUNT}) vs right side {:.4} (expected {LOWER_BOUND_RHS} ± {LOWER_BOUND_RHS_TOLERANCE}); holds {}",
            r.lhs, r.count, r.rhs, r.holds
        ),
    )
}

fn main() {
    // `cargo test` passes harness flags such as --quiet; filters are not supported.
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("sieve exactness", criterion_1),
        ("mean window count", criterion_2),
        ("Poisson window counts", criterion_3),
        ("exponential gaps", criterion_4),
        ("random model", criterion_5),
        ("admissibility oracle", criterion_6),
        ("construction soundness", criterion_7),
        ("window identity", criterion_8),
        ("interval walk", criterion_9),
        ("discrepancy oracle", criterion_10),
        ("lower bound", criterion_11),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed.push(i + 1);
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {status} {name} [{:.1?}]: {detail}", i + 1, started.elapsed());
    }
    if failed.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: {} of 11 criteria fail: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
