//! Linear forms `L(n) = g·n + h` and admissibility of finite sets of them.
//!
//! A set of forms is admissible when, for every prime `p`, the solutions of
//! `L_1(n)⋯L_k(n) ≡ 0 (mod p)` miss at least one residue class. Only two
//! kinds of prime can obstruct this:
//!
//! * a prime dividing both `g_i` and `h_i` for some form, since that form
//!   vanishes identically mod `p`;
//! * a prime `p <= k`. Every other form contributes at most one root mod `p`
//!   (none when `p | g_i`, exactly `−h_i/g_i` otherwise), so `k < p` forms
//!   cannot cover all `p` classes.
//!
//! [`is_admissible`] therefore tests `gcd(g_i, h_i) = 1` and then the primes
//! up to `k`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::sieve::{is_prime_big, is_prime_small, DEFAULT_ROUNDS};

/// `L(n) = g·n + h` with `g >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinearForm {
    #[serde(with = "decimal_uint")]
    g: BigUint,
    #[serde(with = "decimal_int")]
    h: BigInt,
}

impl LinearForm {
    /// Builds the form, flipping the sign of both coefficients when `g < 0`.
    /// `L` and `−L` take the same prime values up to sign.
    pub fn new(g: impl Into<BigInt>, h: impl Into<BigInt>) -> Result<Self> {
        let (g, h) = (g.into(), h.into());
        if g.is_zero() {
            return arg("linear form with g = 0");
        }
        let (g, h) = if g.is_negative() { (-g, -h) } else { (g, h) };
        Ok(LinearForm {
            g: g.to_biguint().expect("positive"),
            h,
        })
    }

    /// The shifted monic form `n + h`.
    pub fn offset(h: i64) -> Self {
        LinearForm {
            g: BigUint::one(),
            h: BigInt::from(h),
        }
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn h(&self) -> &BigInt {
        &self.h
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        BigInt::from(self.g.clone()) * n + &self.h
    }

    /// `L(n)` for `n >= 0`, or `None` when the value is negative.
    pub fn eval_unsigned(&self, n: u64) -> Option<BigUint> {
        self.eval(&BigInt::from(n)).to_biguint()
    }

    /// Residues `n mod p` with `p | L(n)`.
    fn roots_mod(&self, p: u64) -> Vec<u64> {
        let g = (&self.g % p).to_u64().unwrap();
        let h = self.h.mod_floor(&BigInt::from(p)).to_u64().unwrap();
        if g == 0 {
            return if h == 0 { (0..p).collect() } else { Vec::new() };
        }
        let inv = mod_inverse(g, p).expect("p prime, g nonzero");
        let root = ((p - h) % p) as u128 * inv as u128 % p as u128;
        vec![root as u64]
    }

    /// `gcd(g, h)`.
    pub fn content(&self) -> BigUint {
        self.g.gcd(self.h.magnitude())
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.g, self.h)
    }
}

impl FromStr for LinearForm {
    type Err = Error;

    /// Parses `"g h"` in decimal.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let (Some(g), Some(h), None) = (parts.next(), parts.next(), parts.next()) else {
            return arg(format!("expected \"g h\", got {s:?}"));
        };
        let parse = |t: &str| t.parse::<BigInt>().map_err(|e| Error::Argument(format!("{t:?}: {e}")));
        LinearForm::new(parse(g)?, parse(h)?)
    }
}

/// Extended Euclid; `a^{-1} mod m` when `gcd(a, m) = 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// An ordered list of pairwise distinct linear forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    forms: Vec<LinearForm>,
}

impl LinearSystem {
    /// Fails when the list is empty or two forms are proportional.
    pub fn new(forms: Vec<LinearForm>) -> Result<Self> {
        if forms.is_empty() {
            return arg("a linear system needs at least one form");
        }
        if let Some((i, j)) = first_collision(&forms) {
            return arg(format!("forms {i} and {j} are not distinct (g_i h_j = g_j h_i)"));
        }
        Ok(LinearSystem { forms })
    }

    /// The forms `n + h_i`.
    pub fn from_offsets(offsets: &OffsetTuple) -> Self {
        LinearSystem {
            forms: offsets.as_slice().iter().map(|&h| LinearForm::offset(h)).collect(),
        }
    }

    pub fn forms(&self) -> &[LinearForm] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// One form per line, `"g h"`.
    pub fn to_text(&self) -> String {
        self.forms.iter().map(|f| format!("{f}\n")).collect()
    }

    /// Inverse of [`LinearSystem::to_text`]; blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let forms = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        LinearSystem::new(forms)
    }
}

fn first_collision(forms: &[LinearForm]) -> Option<(usize, usize)> {
    for i in 0..forms.len() {
        for j in i + 1..forms.len() {
            let lhs = BigInt::from(forms[i].g.clone()) * &forms[j].h;
            let rhs = BigInt::from(forms[j].g.clone()) * &forms[i].h;
            if lhs == rhs {
                return Some((i, j));
            }
        }
    }
    None
}

/// True iff `g_i h_j − g_j h_i ≠ 0` for every pair.
pub fn are_distinct(forms: &[LinearForm]) -> bool {
    first_collision(forms).is_none()
}

/// Strictly increasing integer offsets `h_1 < … < h_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct OffsetTuple(Vec<i64>);

impl OffsetTuple {
    pub fn new(offsets: Vec<i64>) -> Result<Self> {
        if offsets.is_empty() {
            return arg("offset tuple must be nonempty");
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return arg(format!("offsets must be strictly increasing: {offsets:?}"));
        }
        Ok(OffsetTuple(offsets))
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> i64 {
        self.0[0]
    }

    pub fn last(&self) -> i64 {
        *self.0.last().unwrap()
    }

    pub fn contains(&self, t: i64) -> bool {
        self.0.binary_search(&t).is_ok()
    }
}

impl TryFrom<Vec<i64>> for OffsetTuple {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        OffsetTuple::new(v)
    }
}

impl From<OffsetTuple> for Vec<i64> {
    fn from(t: OffsetTuple) -> Vec<i64> {
        t.0
    }
}

impl FromStr for OffsetTuple {
    type Err = Error;

    /// Parses the comma-separated shorthand `"0,2,6"`.
    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Argument(format!("offset {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        OffsetTuple::new(v)
    }
}

/// Residues `n mod p` for which `p` divides some form of the system.
pub fn occupied_residues(system: &LinearSystem, p: u64) -> Result<BTreeSet<u64>> {
    if !is_prime_small(p) {
        return arg(format!("{p} is not prime"));
    }
    let mut set = BTreeSet::new();
    for form in &system.forms {
        set.extend(form.roots_mod(p));
        if set.len() as u64 == p {
            break;
        }
    }
    Ok(set)
}

/// The smallest prime obstructing admissibility, if any.
///
/// A nontrivial content `gcd(g_i, h_i)` is reported through its smallest
/// prime factor when trial division finds one.
pub fn obstruction(system: &LinearSystem) -> Option<BigUint> {
    let mut best: Option<BigUint> = None;
    for form in &system.forms {
        let c = form.content();
        if !c.is_one() {
            let p = smallest_prime_factor(&c);
            if best.as_ref().is_none_or(|b| &p < b) {
                best = Some(p);
            }
        }
    }
    let k = system.len() as u64;
    for p in (2..=k).filter(|&p| is_prime_small(p)) {
        if best.as_ref().is_some_and(|b| *b <= BigUint::from(p)) {
            break;
        }
        let occupied = occupied_residues(system, p).expect("p is prime");
        if occupied.len() as u64 == p {
            best = Some(BigUint::from(p));
            break;
        }
    }
    best
}

/// True iff no prime obstructs the system.
pub fn is_admissible(system: &LinearSystem) -> bool {
    obstruction(system).is_none()
}

pub fn is_admissible_offsets(tuple: &OffsetTuple) -> bool {
    is_admissible(&LinearSystem::from_offsets(tuple))
}

const FACTOR_TRIAL_BOUND: u64 = 1 << 20;

fn smallest_prime_factor(n: &BigUint) -> BigUint {
    let mut d = 2u64;
    while d < FACTOR_TRIAL_BOUND {
        if BigUint::from(d) * d > *n {
            return n.clone();
        }
        if (n % d).is_zero() {
            return BigUint::from(d);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    // No small factor: either prime or a product of large primes. In the
    // latter case the cofactor itself is returned; it still divides g and h.
    n.clone()
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs.
///
/// Fails when a cofactor above the trial bound is not a probable prime.
pub fn factorize(n: &BigUint) -> Result<Vec<(BigUint, u32)>> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut d = 2u64;
    while d < FACTOR_TRIAL_BOUND && BigUint::from(d) * d <= n {
        let mut e = 0;
        while (&n % d).is_zero() {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((BigUint::from(d), e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > BigUint::one() {
        if BigUint::from(d) * d <= n && !is_prime_big(&n, DEFAULT_ROUNDS).is_probably_prime() {
            return Err(Error::Resource(format!("cofactor {n} has no factor below {FACTOR_TRIAL_BOUND}")));
        }
        out.push((n, 1));
    }
    Ok(out)
}

/// Euler's totient from a known factorization.
pub fn euler_phi_from_factors(factors: &[(BigUint, u32)]) -> BigUint {
    factors.iter().fold(BigUint::one(), |acc, (p, e)| acc * (p - 1u32) * p.pow(e - 1))
}

pub fn euler_phi(n: &BigUint) -> Result<BigUint> {
    if n.is_zero() {
        return arg("phi(0) is undefined");
    }
    Ok(euler_phi_from_factors(&factorize(n)?))
}

/// Distinct prime factors of `q`, ascending, by trial division.
pub fn factor_u64(mut q: u64) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            primes.push(d);
            while q.is_multiple_of(d) {
                q /= d;
            }
        }
        d += 1;
    }
    if q > 1 {
        primes.push(q);
    }
    primes
}

/// `φ_L(q) = φ(g·q)/φ(g)`.
///
/// Computed as `q · ∏ (1 − 1/p)` over primes `p | q` with `p ∤ g`, which only
/// needs the factorization of `q`.
pub fn phi_l(form: &LinearForm, q: u64) -> Result<BigUint> {
    if q == 0 {
        return arg("phi_L needs q >= 1");
    }
    let mut out = BigUint::from(q);
    for p in factor_u64(q) {
        if !(form.g() % p).is_zero() {
            out = out / p * (p - 1);
        }
    }
    Ok(out)
}

pub(crate) mod decimal_uint {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

pub(crate) mod decimal_int {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}
