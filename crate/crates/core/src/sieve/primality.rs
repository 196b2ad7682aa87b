//! Miller–Rabin primality for single integers.
//!
//! Below 2^64 the witness set is deterministic, so [`is_prime_small`] is
//! exact. Above 2^64 [`is_prime_big`] runs a trial-division stage (which
//! yields divisor certificates) followed by Miller–Rabin with random bases
//! drawn from a pinned ChaCha8 stream.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// Default number of random rounds above 64 bits.
pub const DEFAULT_ROUNDS: u32 = 40;

const SMALL_PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

// Deterministic for n < 2^32 (Jaeschke).
const BASES_32: [u64; 3] = [2, 7, 61];
// Deterministic for all n < 2^64 (Sinclair).
const BASES_64: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

// Bound of the trial-division stage in `is_prime_big`.
const TRIAL_BOUND: u64 = 1000;

/// Montgomery arithmetic modulo an odd 64-bit modulus, R = 2^64.
#[derive(Clone, Copy, Debug)]
struct Montgomery {
    n: u64,
    n_inv: u64, // -n^{-1} mod 2^64
    r2: u64,    // R^2 mod n
}

impl Montgomery {
    fn new(n: u64) -> Self {
        debug_assert!(n & 1 == 1);
        // Newton iteration: each step doubles the number of correct bits.
        let mut inv = n;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(n.wrapping_mul(inv)));
        }
        let r2 = ((u128::MAX % n as u128) + 1) % n as u128;
        Montgomery {
            n,
            n_inv: inv.wrapping_neg(),
            r2: r2 as u64,
        }
    }

    #[inline]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.n_inv);
        let (sum, carry) = t.overflowing_add(m as u128 * self.n as u128);
        let mut r = (sum >> 64) as u64;
        if carry {
            r = r.wrapping_add(((1u128 << 64) % self.n as u128) as u64);
        }
        if r >= self.n {
            r -= self.n;
        }
        r
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.n, self.r2)
    }

    fn one(&self) -> u64 {
        self.to_mont(1)
    }

    fn pow(&self, base: u64, mut e: u64) -> u64 {
        let mut acc = self.one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }
}

fn strong_probable_prime(mont: &Montgomery, d: u64, s: u32, a: u64) -> bool {
    let n = mont.n;
    let a = a % n;
    if a == 0 {
        return true;
    }
    let one = mont.one();
    let minus_one = mont.to_mont(n - 1);
    let mut x = mont.pow(mont.to_mont(a), d);
    if x == one || x == minus_one {
        return true;
    }
    for _ in 1..s {
        x = mont.mul(x, x);
        if x == minus_one {
            return true;
        }
        if x == one {
            return false;
        }
    }
    false
}

/// Exact primality for any 64-bit integer.
pub fn is_prime_small(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 59 * 59 {
        return true;
    }
    let mont = Montgomery::new(n);
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let bases: &[u64] = if n < (1 << 32) { &BASES_32 } else { &BASES_64 };
    bases.iter().all(|&a| strong_probable_prime(&mont, d, s, a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Composite,
    ProbablyPrime,
}

/// Result of [`is_prime_big`].
///
/// When `witness` is present it is a proper divisor of `value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigVerdict {
    pub value: BigUint,
    pub verdict: Verdict,
    pub witness: Option<BigUint>,
}

impl BigVerdict {
    pub fn is_probably_prime(&self) -> bool {
        self.verdict == Verdict::ProbablyPrime
    }

    fn composite(value: &BigUint, witness: Option<BigUint>) -> Self {
        BigVerdict {
            value: value.clone(),
            verdict: Verdict::Composite,
            witness,
        }
    }

    fn prime(value: &BigUint) -> Self {
        BigVerdict {
            value: value.clone(),
            verdict: Verdict::ProbablyPrime,
            witness: None,
        }
    }
}

/// Primality for arbitrary-precision integers.
///
/// Composite verdicts are certain. A probably-prime verdict above 2^64 is
/// wrong with probability at most `4^-rounds`; below 2^64 it is exact.
pub fn is_prime_big(n: &BigUint, rounds: u32) -> BigVerdict {
    let rounds = rounds.max(1);
    if n < &BigUint::from(2u32) {
        return BigVerdict::composite(n, None);
    }
    let mut p = 2u64;
    while p < TRIAL_BOUND {
        if is_prime_small(p) && (n % p).is_zero() {
            return if *n == BigUint::from(p) {
                BigVerdict::prime(n)
            } else {
                BigVerdict::composite(n, Some(BigUint::from(p)))
            };
        }
        p += 1;
    }
    if let Some(small) = n.to_u64() {
        return if is_prime_small(small) {
            BigVerdict::prime(n)
        } else {
            BigVerdict::composite(n, None)
        };
    }

    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let span = n - 3u32; // bases drawn from [2, n - 2]
    let mut rng = ChaCha8Rng::seed_from_u64(0x7073_6c61_625f_6d72);
    let limbs = (n.bits() as usize).div_ceil(64) + 1;

    'rounds: for _ in 0..rounds {
        let mut words = Vec::with_capacity(limbs * 2);
        for _ in 0..limbs {
            let w = rng.next_u64();
            words.push(w as u32);
            words.push((w >> 32) as u32);
        }
        let a = BigUint::new(words).mod_floor(&span) + 2u32;
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'rounds;
            }
            if x == one {
                break;
            }
        }
        return BigVerdict::composite(n, None);
    }
    BigVerdict::prime(n)
}

/// Exact below 2^64, probabilistic with [`DEFAULT_ROUNDS`] above.
pub fn is_prime_any(n: &BigUint) -> bool {
    match n.to_u64() {
        Some(v) => is_prime_small(v),
        None => is_prime_big(n, DEFAULT_ROUNDS).is_probably_prime(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn small_examples() {
        assert!(!is_prime_small(0));
        assert!(!is_prime_small(1));
        assert!(is_prime_small(97));
        assert!(!is_prime_small(91));
        assert!(is_prime_small((1 << 61) - 1));
        assert!(is_prime_small(18446744073709551557)); // largest 64-bit prime
        assert!(!is_prime_small(u64::MAX));
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // strong pseudoprimes to several small bases
        for n in [2047u64, 1373653, 25326001, 3215031751, 2152302898747, 3474749660383, 341550071728321, 3825123056546413051] {
            assert!(!is_prime_small(n), "{n}");
        }
    }

    #[test]
    fn agrees_with_trial_division_below_1e5() {
        for n in 0..100_000u64 {
            assert_eq!(is_prime_small(n), trial_division(n), "{n}");
        }
    }

    #[test]
    fn big_examples() {
        let v = is_prime_big(&BigUint::zero(), 10);
        assert_eq!(v.verdict, Verdict::Composite);
        let v = is_prime_big(&BigUint::from((1u64 << 61) - 1), 10);
        assert_eq!(v.verdict, Verdict::ProbablyPrime);
        let v = is_prime_big(&BigUint::from(217u32), 10);
        assert_eq!(v.verdict, Verdict::Composite);
        assert_eq!(v.witness, Some(BigUint::from(7u32)));
    }

    #[test]
    fn big_above_64_bits() {
        // 2^89 - 1 and 2^127 - 1 are Mersenne primes; 2^67 - 1 is not.
        let m = |e: u32| (BigUint::one() << e) - 1u32;
        assert!(is_prime_big(&m(89), 20).is_probably_prime());
        assert!(is_prime_big(&m(127), 20).is_probably_prime());
        let c = is_prime_big(&m(67), 20);
        assert_eq!(c.verdict, Verdict::Composite);
        // product of two 40-bit primes has no small witness
        let semi = BigUint::from(1099511627791u64) * BigUint::from(1099511627689u64);
        assert_eq!(is_prime_big(&semi, 20).verdict, Verdict::Composite);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn big_agrees_with_small(n in any::<u64>()) {
            let v = is_prime_big(&BigUint::from(n), 4);
            prop_assert_eq!(v.is_probably_prime(), is_prime_small(n));
            if let Some(w) = v.witness {
                prop_assert!(w > BigUint::one() && w < v.value);
                prop_assert!((&v.value % &w).is_zero());
            }
        }
    }
}
