//! Segmented, odd-only, bit-packed sieve of Eratosthenes over 64-bit ranges.
//!
//! Intervals follow the half-open convention `(lo, hi]` for counting, so
//! [`count_primes`] returns `pi(hi) - pi(lo)`; raw segments cover `[lo, hi)`.

mod cache;
mod primality;
mod segment;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use cache::{read_cache, write_cache, CACHE_MAGIC};
pub use primality::{is_prime_any, is_prime_big, is_prime_small, BigVerdict, Verdict, DEFAULT_ROUNDS};
pub use segment::PrimeSegment;

/// Largest admissible upper bound for a sieved range.
pub const MAX_BOUND: u64 = 1 << 63;

/// Default number of integers per segment.
pub const DEFAULT_SEGMENT_CAP: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SieveConfig {
    /// Integers per segment; rounded up to an even number.
    pub segment_cap: u64,
    /// Bytes the sieve may hold at once (base primes plus one segment).
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_cap: DEFAULT_SEGMENT_CAP,
            memory_budget: 1 << 30,
        }
    }
}

impl SieveConfig {
    pub fn with_segment_cap(segment_cap: u64) -> Self {
        SieveConfig {
            segment_cap,
            ..Default::default()
        }
    }

    fn cap(&self) -> u64 {
        (self.segment_cap.max(2) + 1) & !1
    }

    fn check(&self, lo: u64, hi: u64) -> Result<()> {
        if hi > MAX_BOUND {
            return Err(Error::Argument(format!("upper bound {hi} exceeds 2^63")));
        }
        if lo > hi {
            return Err(Error::Argument(format!("empty range: lo {lo} > hi {hi}")));
        }
        let root = isqrt(hi);
        // pi(t) < 1.26 t / ln t; a bit table up to the root is built first
        let est_primes = if root < 17 { 8.0 } else { 1.26 * root as f64 / (root as f64).ln() };
        let bytes = est_primes * 4.0 + (root / 16) as f64 + (self.cap() / 16) as f64;
        if bytes > self.memory_budget as f64 {
            return Err(Error::Resource(format!(
                "sieving up to {hi} needs about {:.0} MiB, budget is {} MiB",
                bytes / (1u64 << 20) as f64,
                self.memory_budget >> 20
            )));
        }
        Ok(())
    }
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Odd primes up to and including `limit`.
pub fn odd_primes_upto(limit: u64) -> Vec<u32> {
    if limit < 3 {
        return Vec::new();
    }
    assert!(limit <= u32::MAX as u64);
    if limit <= 1 << 24 {
        return simple_odd_primes(limit);
    }
    let small = simple_odd_primes(isqrt(limit));
    let mut out = Vec::with_capacity((1.26 * limit as f64 / (limit as f64).ln()) as usize);
    let mut a = 3;
    while a <= limit {
        let b = (limit + 1).min(a + DEFAULT_SEGMENT_CAP);
        out.extend(PrimeSegment::sieve(a, b, &small).primes().map(|p| p as u32));
        a = b;
    }
    out
}

fn simple_odd_primes(limit: u64) -> Vec<u32> {
    if limit < 3 {
        return Vec::new();
    }
    let n = (limit - 1) / 2; // index i -> 2i + 1, for i in 1..=n
    let mut composite = vec![false; n as usize + 1];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit {
        if !composite[i as usize] {
            let p = 2 * i + 1;
            let mut j = (p * p - 1) / 2;
            while j <= n {
                composite[j as usize] = true;
                j += p;
            }
        }
        i += 1;
    }
    (1..=n).filter(|&i| !composite[i as usize]).map(|i| (2 * i + 1) as u32).collect()
}

/// Lazy stream of consecutive segments covering `[lo, hi)`.
pub struct SegmentStream {
    next: u64,
    hi: u64,
    cap: u64,
    base_primes: Arc<Vec<u32>>,
}

impl SegmentStream {
    /// Segment boundaries, without sieving.
    pub fn bounds(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut a = self.next;
        while a < self.hi {
            let b = self.hi.min(a + self.cap);
            out.push((a, b));
            a = b;
        }
        out
    }

    pub fn base_primes(&self) -> &Arc<Vec<u32>> {
        &self.base_primes
    }

    /// Sieves every remaining segment in parallel; output order is fixed.
    pub fn collect_parallel(self) -> Vec<PrimeSegment> {
        let primes = self.base_primes.clone();
        self.bounds().into_par_iter().map(|(a, b)| PrimeSegment::sieve(a, b, &primes)).collect()
    }
}

impl Iterator for SegmentStream {
    type Item = PrimeSegment;

    fn next(&mut self) -> Option<PrimeSegment> {
        if self.next >= self.hi {
            return None;
        }
        let a = self.next;
        let b = self.hi.min(a + self.cap);
        self.next = b;
        Some(PrimeSegment::sieve(a, b, &self.base_primes))
    }
}

/// Segments covering `[lo, hi)` exactly.
pub fn sieve_range(lo: u64, hi: u64, config: &SieveConfig) -> Result<SegmentStream> {
    config.check(lo, hi)?;
    let root = if hi == 0 { 0 } else { isqrt(hi - 1) };
    Ok(SegmentStream {
        next: lo,
        hi,
        cap: config.cap(),
        base_primes: Arc::new(odd_primes_upto(root)),
    })
}

/// `pi(hi) - pi(lo)`: the number of primes `p` with `lo < p <= hi`.
pub fn count_primes(lo: u64, hi: u64) -> Result<u64> {
    count_primes_with(lo, hi, &SieveConfig::default())
}

pub fn count_primes_with(lo: u64, hi: u64, config: &SieveConfig) -> Result<u64> {
    if lo > hi {
        return Err(Error::Argument(format!("empty interval ({lo}, {hi}]")));
    }
    if hi >= MAX_BOUND {
        return Err(Error::Argument(format!("upper bound {hi} exceeds 2^63 - 1")));
    }
    let stream = sieve_range(lo + 1, hi + 1, config)?;
    let primes = stream.base_primes().clone();
    Ok(stream
        .bounds()
        .into_par_iter()
        .map(|(a, b)| PrimeSegment::sieve(a, b, &primes).count())
        .sum())
}

/// The primes in `(lo, hi]`, ascending.
pub fn primes_in(lo: u64, hi: u64) -> Result<impl Iterator<Item = u64>> {
    primes_in_with(lo, hi, &SieveConfig::default())
}

pub fn primes_in_with(lo: u64, hi: u64, config: &SieveConfig) -> Result<impl Iterator<Item = u64>> {
    if lo > hi {
        return Err(Error::Argument(format!("empty interval ({lo}, {hi}]")));
    }
    if hi >= MAX_BOUND {
        return Err(Error::Argument(format!("upper bound {hi} exceeds 2^63 - 1")));
    }
    let stream = sieve_range(lo + 1, hi + 1, config)?;
    Ok(stream.flat_map(|seg| seg.primes().collect::<Vec<_>>()))
}

/// A sieved window `[lo, hi)` answering primality queries in O(1).
#[derive(Clone, Debug)]
pub struct PrimeTable {
    segments: Vec<PrimeSegment>,
    lo: u64,
    hi: u64,
    cap: u64,
}

impl PrimeTable {
    pub fn new(lo: u64, hi: u64, config: &SieveConfig) -> Result<Self> {
        let stream = sieve_range(lo, hi, config)?;
        let cap = stream.cap;
        Ok(PrimeTable {
            segments: stream.collect_parallel(),
            lo,
            hi,
            cap,
        })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn contains(&self, n: u64) -> bool {
        self.lo <= n && n < self.hi
    }

    pub fn is_prime(&self, n: u64) -> bool {
        self.segments[((n - self.lo) / self.cap) as usize].is_prime(n)
    }

    /// Primes in `[a, b)`, restricted to the table.
    pub fn count_in(&self, a: u64, b: u64) -> u64 {
        self.segments.iter().map(|s| s.count_in(a, b)).sum()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.segments.iter().flat_map(|s| s.primes())
    }

    pub fn segments(&self) -> &[PrimeSegment] {
        &self.segments
    }
}
