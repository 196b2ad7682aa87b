use serde::{Deserialize, Serialize};

/// Bit-packed primality table for a contiguous range of integers.
///
/// Only odd integers are stored: bit `i` is set iff `base + 2i + 1` is prime.
/// The even prime 2 is answered from the covered range directly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSegment {
    base: u64,
    span: u64,
    // First integer actually covered; `base` is `lo` rounded down to even.
    lo: u64,
    bits: Vec<u64>,
}

// Residues mod 30 coprime to 30 and the gap to the next one.
const WHEEL: [u64; 8] = [1, 7, 11, 13, 17, 19, 23, 29];
const WHEEL_GAP: [u64; 8] = [6, 4, 2, 4, 2, 4, 6, 2];
// Bits per marking block; 32 KiB of table stays in L1.
const BLOCK_BITS: u64 = 1 << 18;

impl PrimeSegment {
    /// Sieves `[lo, hi)` with the given odd base primes, which must include
    /// every odd prime up to `sqrt(hi)`.
    pub(crate) fn sieve(lo: u64, hi: u64, base_primes: &[u32]) -> Self {
        debug_assert!(lo < hi);
        let base = lo & !1;
        let span = hi - base;
        let nbits = span / 2;
        let mut bits = vec![u64::MAX; nbits.div_ceil(64) as usize];
        if !nbits.is_multiple_of(64) {
            let last = bits.len() - 1;
            bits[last] = (1u64 << (nbits % 64)) - 1;
        }
        if base == 0 && nbits > 0 {
            bits[0] &= !1; // 1 is not prime
        }

        let mut block_lo = 0;
        while block_lo < nbits {
            let block_hi = (block_lo + BLOCK_BITS).min(nbits);
            // integer range of this block: [first, last]
            let first = base + 2 * block_lo + 1;
            let last = base + 2 * (block_hi - 1) + 1;
            for &p in base_primes {
                let p = p as u64;
                if p * p > last {
                    break;
                }
                if p < 7 {
                    mark_stride(&mut bits, base, first, last, p);
                } else {
                    mark_wheel(&mut bits, base, first, last, p);
                }
            }
            block_lo = block_hi;
        }

        PrimeSegment { base, span, lo, bits }
    }

    /// Rebuilds a segment from raw parts (used by the cache reader).
    pub(crate) fn from_raw(base: u64, span: u64, bits: Vec<u64>) -> Self {
        PrimeSegment { base, span, lo: base, bits }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn span(&self) -> u64 {
        self.span
    }

    pub fn bits(&self) -> &[u64] {
        &self.bits
    }

    /// First integer covered.
    pub fn lo(&self) -> u64 {
        self.lo
    }

    /// One past the last integer covered.
    pub fn hi(&self) -> u64 {
        self.base + self.span
    }

    pub fn contains(&self, n: u64) -> bool {
        self.lo <= n && n < self.hi()
    }

    /// Primality of `n`; `n` must lie in the covered range.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(self.contains(n), "{n} outside [{}, {})", self.lo, self.hi());
        if n == 2 {
            return true;
        }
        if n & 1 == 0 {
            return false;
        }
        let i = (n - self.base - 1) / 2;
        self.bits[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Number of primes in the covered range.
    pub fn count(&self) -> u64 {
        let odd: u64 = self.bits.iter().map(|w| w.count_ones() as u64).sum();
        odd + u64::from(self.contains(2))
    }

    /// Number of primes in `[a, b)` intersected with the covered range.
    pub fn count_in(&self, a: u64, b: u64) -> u64 {
        let a = a.max(self.lo);
        let b = b.min(self.hi());
        if a >= b {
            return 0;
        }
        let two = u64::from(a <= 2 && 2 < b);
        // odd integers in [a, b) map to bit indices [ia, ib)
        let ia = (a.max(self.base + 1) - self.base) / 2;
        let ib = (b - self.base) / 2;
        two + count_bits(&self.bits, ia, ib)
    }

    /// Primes in the covered range, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = self.contains(2).then_some(2);
        let base = self.base;
        two.into_iter().chain(
            self.bits
                .iter()
                .enumerate()
                .flat_map(move |(wi, &w)| SetBits(w).map(move |b| base + 2 * (wi as u64 * 64 + b as u64) + 1)),
        )
    }
}

struct SetBits(u64);

impl Iterator for SetBits {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let t = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(t)
    }
}

fn count_bits(bits: &[u64], ia: u64, ib: u64) -> u64 {
    if ia >= ib {
        return 0;
    }
    let (wa, wb) = ((ia / 64) as usize, (ib / 64) as usize);
    let lo_mask = !0u64 << (ia % 64);
    if wa == wb {
        let hi_mask = (1u64 << (ib % 64)) - 1;
        return (bits[wa] & lo_mask & hi_mask).count_ones() as u64;
    }
    let mut total = (bits[wa] & lo_mask).count_ones() as u64;
    total += bits[wa + 1..wb].iter().map(|w| w.count_ones() as u64).sum::<u64>();
    if !ib.is_multiple_of(64) {
        total += (bits[wb] & ((1u64 << (ib % 64)) - 1)).count_ones() as u64;
    }
    total
}

#[inline]
fn clear(bits: &mut [u64], base: u64, m: u64) {
    let i = (m - base - 1) / 2;
    bits[(i / 64) as usize] &= !(1u64 << (i % 64));
}

// Clears odd multiples m >= p*p of p with first <= m <= last.
fn mark_stride(bits: &mut [u64], base: u64, first: u64, last: u64, p: u64) {
    let mut m = (p * p).max(first.div_ceil(p) * p);
    if m & 1 == 0 {
        m += p;
    }
    while m <= last {
        clear(bits, base, m);
        m += 2 * p;
    }
}

// Same as `mark_stride` but visits only multiples p*k with gcd(k, 30) = 1;
// the others were already cleared by 2, 3 or 5.
fn mark_wheel(bits: &mut [u64], base: u64, first: u64, last: u64, p: u64) {
    let k0 = p.max(first.div_ceil(p));
    let (mut k, mut w) = next_wheel(k0);
    loop {
        let m = p * k;
        if m > last {
            break;
        }
        clear(bits, base, m);
        k += WHEEL_GAP[w];
        w = (w + 1) & 7;
    }
}

// Smallest k' >= k coprime to 30, with its wheel index.
fn next_wheel(k: u64) -> (u64, usize) {
    let r = k % 30;
    match WHEEL.iter().position(|&x| x >= r) {
        Some(w) => (k - r + WHEEL[w], w),
        None => (k - r + 31, 0),
    }
}
