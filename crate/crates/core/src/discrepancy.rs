//! How evenly the prime values of a linear form `L(n) = g·n + h` spread over
//! residue classes of `n`, measured on `n ∈ [x, 2x)`.
//!
//! For `q >= 1` and `a` with `gcd(L(a), q) = 1`,
//!
//! ```text
//! Δ_L(x; q, a) = #{n ∈ [x, 2x) : n ≡ a (q), L(n) prime} − π(I_L) / φ(g·q)
//! ```
//!
//! where `π(I_L)` counts the primes of `I_L = [g·x + h, 2g·x + h)`. These are
//! measurements only; nothing here verifies an asymptotic bound.

use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissible::{factor_u64, LinearForm};
use crate::error::{arg, Error, Result};
use crate::sieve::{count_primes, is_prime_small, MAX_BOUND};

/// Largest `x` accepted (the form is evaluated at every `n ∈ [x, 2x)`).
pub const X_BUDGET: u64 = 100_000_000;

/// Largest `q` accepted; `φ(q)` comes from trial division.
pub const Q_BUDGET: u64 = 10_000_000;

/// Longest interval `I_L` whose primes are counted.
pub const INTERVAL_BUDGET: u64 = 100_000_000_000;

/// Shared precomputation for one `(L, x)`.
#[derive(Clone, Debug)]
pub struct FormPrimes {
    pub form: LinearForm,
    pub x: u64,
    g: u64,
    h: i64,
    /// The `n ∈ [x, 2x)` with `L(n)` prime, ascending.
    pub prime_n: Vec<u64>,
    g_primes: Vec<u64>,
    interval_count: Option<u64>,
}

fn coefficients(form: &LinearForm, x: u64) -> Result<(u64, i64)> {
    if x == 0 || x > X_BUDGET {
        return Err(Error::Resource(format!("x must lie in 1..={X_BUDGET}, got {x}")));
    }
    let (Some(g), Some(h)) = (form.g().to_u64(), form.h().to_i64()) else {
        return arg(format!("form {form} has coefficients beyond 64 bits"));
    };
    let top = g as i128 * 2 * x as i128 + h as i128;
    if top >= MAX_BOUND as i128 {
        return arg(format!("2gx + h = {top} must stay below 2^63"));
    }
    Ok((g, h))
}

impl FormPrimes {
    /// Tests `L(n)` for every `n ∈ [x, 2x)`; `π(I_L)` is deferred until a
    /// statistic needs it.
    pub fn new(form: &LinearForm, x: u64) -> Result<Self> {
        let (g, h) = coefficients(form, x)?;
        let prime_n = (x..2 * x)
            .into_par_iter()
            .filter(|&n| {
                let v = g as i128 * n as i128 + h as i128;
                v > 1 && is_prime_small(v as u64)
            })
            .collect();
        Ok(FormPrimes {
            form: form.clone(),
            x,
            g,
            h,
            prime_n,
            g_primes: factor_u64(g),
            interval_count: None,
        })
    }

    /// Also counts the primes of `I_L`.
    pub fn with_interval(mut self) -> Result<Self> {
        let lo = self.g as i128 * self.x as i128 + self.h as i128;
        let hi = lo + self.g as i128 * self.x as i128;
        if (hi - lo) as u64 > INTERVAL_BUDGET {
            return Err(Error::Resource(format!("I_L has length {} > {INTERVAL_BUDGET}", hi - lo)));
        }
        // [lo, hi) as (lo − 1, hi − 1], clipped at 0
        let (a, b) = ((lo - 1).max(0) as u64, (hi - 1).max(0) as u64);
        self.interval_count = Some(count_primes(a, b)?);
        Ok(self)
    }

    /// `Σ_{n ∈ [x, 2x)} 1_P(L(n))`.
    pub fn form_count(&self) -> u64 {
        self.prime_n.len() as u64
    }

    /// `π(I_L)`, if computed.
    pub fn interval_count(&self) -> Option<u64> {
        self.interval_count
    }

    /// `L(a) mod q`.
    fn eval_mod(&self, a: u64, q: u64) -> u64 {
        ((self.g as u128 % q as u128 * (a % q) as u128) as i128 + self.h as i128).rem_euclid(q as i128) as u64
    }

    /// `φ(g·q)`.
    pub fn phi_gq(&self, q: u64) -> f64 {
        let mut primes = self.g_primes.clone();
        primes.extend(factor_u64(q));
        primes.sort_unstable();
        primes.dedup();
        let mut phi = self.g as u128 * q as u128;
        for p in primes {
            phi = phi / p as u128 * (p as u128 - 1);
        }
        phi as f64
    }

    fn require_interval(&self) -> Result<u64> {
        self.interval_count.ok_or_else(|| Error::Internal("interval count not computed".into()))
    }

    /// `Δ_L(x; q, a)`.
    pub fn delta(&self, q: u64, a: u64) -> Result<f64> {
        check_q(q)?;
        if self.eval_mod(a, q).gcd(&q) != 1 {
            return arg(format!("gcd(L({a}), {q}) != 1"));
        }
        let first = self.prime_n.iter().filter(|&&n| n % q == a % q).count() as u64;
        Ok(first as f64 - self.require_interval()? as f64 / self.phi_gq(q))
    }

    /// The residue maximizing `|Δ_L(x; q, a)|` over `a ∈ [0, q)` with
    /// `gcd(L(a), q) = 1`, from one pass over the prime values.
    pub fn max_delta(&self, q: u64) -> Result<MaxDelta> {
        check_q(q)?;
        let main = self.require_interval()? as f64 / self.phi_gq(q);
        let mut buckets = vec![0u64; q as usize];
        for &n in &self.prime_n {
            buckets[(n % q) as usize] += 1;
        }
        let mut best: Option<(u64, f64)> = None;
        for a in 0..q {
            if self.eval_mod(a, q).gcd(&q) != 1 {
                continue;
            }
            let d = buckets[a as usize] as f64 - main;
            if best.is_none_or(|(_, b)| d.abs() > b.abs()) {
                best = Some((a, d));
            }
        }
        Ok(MaxDelta {
            q,
            a_star: best.map(|b| b.0),
            delta: best.map(|b| b.1),
            max_abs_delta: best.map(|b| b.1.abs()),
        })
    }
}

fn check_q(q: u64) -> Result<()> {
    if q == 0 || q > Q_BUDGET {
        return Err(Error::Resource(format!("q must lie in 1..={Q_BUDGET}, got {q}")));
    }
    Ok(())
}

/// `Δ_L(x; q, a)` for a single class.
pub fn delta(form: &LinearForm, x: u64, q: u64, a: u64) -> Result<f64> {
    FormPrimes::new(form, x)?.with_interval()?.delta(q, a)
}

/// One row of a discrepancy table. All of `a_star`, `delta`, `max_abs_delta`
/// are `None` when no residue `a` has `gcd(L(a), q) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxDelta {
    pub q: u64,
    pub a_star: Option<u64>,
    /// Signed `Δ` at `a_star`.
    pub delta: Option<f64>,
    pub max_abs_delta: Option<f64>,
}

pub fn max_delta(form: &LinearForm, x: u64, q: u64) -> Result<MaxDelta> {
    FormPrimes::new(form, x)?.with_interval()?.max_delta(q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub form: LinearForm,
    pub x: u64,
    pub q_max: u64,
    pub b: u64,
    /// Rows for `q <= q_max` with `gcd(q, B) = 1`, ascending.
    pub rows: Vec<MaxDelta>,
    /// Sum of the row maxima (empty rows contribute nothing).
    pub total: f64,
    /// `Σ_{n ∈ [x, 2x)} 1_P(L(n))`.
    pub main_count: u64,
    /// `π(I_L)`.
    pub interval_count: u64,
    /// Exponent `E` of the reference size `main_count / (log x)^E`.
    pub exponent: f64,
    /// `total / (main_count / (log x)^E)`; `None` when `main_count = 0`.
    pub reference_ratio: Option<f64>,
    /// `100k²`, the exponent in the asymptotic bound, when `k` is supplied.
    pub asymptotic_exponent: Option<f64>,
}

/// `Σ_{q <= Q, gcd(q, B) = 1} max_a |Δ_L(x; q, a)|` with `E = 1`.
pub fn discrepancy_sum(form: &LinearForm, x: u64, q_max: u64, b: u64) -> Result<DiscrepancyReport> {
    discrepancy_sum_with(form, x, q_max, b, 1.0, None)
}

pub fn discrepancy_sum_with(form: &LinearForm, x: u64, q_max: u64, b: u64, exponent: f64, k: Option<usize>) -> Result<DiscrepancyReport> {
    if q_max == 0 {
        return arg("Q must be at least 1");
    }
    if b == 0 {
        return arg("B must be a positive integer");
    }
    if !exponent.is_finite() {
        return arg(format!("exponent must be finite, got {exponent}"));
    }
    check_q(q_max)?;
    let fp = FormPrimes::new(form, x)?.with_interval()?;
    let qs: Vec<u64> = (1..=q_max).filter(|q| q.gcd(&b) == 1).collect();
    let rows = qs.par_iter().map(|&q| fp.max_delta(q)).collect::<Result<Vec<_>>>()?;
    let total: f64 = rows.iter().filter_map(|r| r.max_abs_delta).sum();
    let main_count = fp.form_count();
    let scale = (x as f64).ln().powf(exponent);
    Ok(DiscrepancyReport {
        form: form.clone(),
        x,
        q_max,
        b,
        rows,
        total,
        main_count,
        interval_count: fp.interval_count().unwrap(),
        exponent,
        reference_ratio: (main_count > 0).then(|| total / (main_count as f64 / scale)),
        asymptotic_exponent: k.map(|k| 100.0 * (k * k) as f64),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub form: LinearForm,
    pub x: u64,
    pub b: u64,
    /// `Σ_{n ∈ [x, 2x)} 1_P(L(n))`.
    pub count: u64,
    /// `φ(B)/B`.
    pub phi_b_ratio: f64,
    /// `φ(g)/g`.
    pub phi_g_ratio: f64,
    /// `(φ(B)/B)·(φ(g)/g)·count`.
    pub lhs: f64,
    /// `x / (2 log x)`.
    pub rhs: f64,
    pub holds: bool,
}

fn phi_ratio(n: u64) -> f64 {
    factor_u64(n).iter().fold(1.0, |r, &p| r * (1.0 - 1.0 / p as f64))
}

/// Compares `(φ(B)/B)·(φ(g)/g)·Σ 1_P(L(n))` with `x / (2 log x)`.
pub fn lower_bound_check(form: &LinearForm, x: u64, b: u64) -> Result<LowerBoundReport> {
    if b == 0 {
        return arg("B must be a positive integer");
    }
    if x < 2 {
        return arg("x must be at least 2");
    }
    let fp = FormPrimes::new(form, x)?;
    let count = fp.form_count();
    let phi_b_ratio = phi_ratio(b);
    let phi_g_ratio = phi_ratio(fp.g);
    let lhs = phi_b_ratio * phi_g_ratio * count as f64;
    let rhs = x as f64 / (2.0 * (x as f64).ln());
    Ok(LowerBoundReport {
        form: form.clone(),
        x,
        b,
        count,
        phi_b_ratio,
        phi_g_ratio,
        lhs,
        rhs,
        holds: lhs > rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn form(g: i64, h: i64) -> LinearForm {
        LinearForm::new(g, h).unwrap()
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    // Independent recomputation: direct loops, totient by counting.
    fn naive_delta(g: i64, h: i64, x: u64, q: u64, a: u64) -> Option<f64> {
        let la = g as i128 * a as i128 + h as i128;
        if gcd(la.rem_euclid(q as i128) as u64, q) != 1 {
            return None;
        }
        let prime = |v: i128| v > 1 && is_prime_small(v as u64);
        let mut first = 0u64;
        for n in x..2 * x {
            if n % q == a % q && prime(g as i128 * n as i128 + h as i128) {
                first += 1;
            }
        }
        let lo = g as i128 * x as i128 + h as i128;
        let main = (lo..lo + g as i128 * x as i128).filter(|&v| prime(v)).count() as u64;
        let gq = g as u64 * q;
        let phi = (1..=gq).filter(|&r| gcd(r, gq) == 1).count() as u64;
        Some(first as f64 - main as f64 / phi as f64)
    }

    fn naive_max(g: i64, h: i64, x: u64, q: u64) -> Option<(u64, f64)> {
        let mut best: Option<(u64, f64)> = None;
        for a in 0..q {
            if let Some(d) = naive_delta(g, h, x, q, a) {
                if best.is_none_or(|(_, b)| d.abs() > b.abs()) {
                    best = Some((a, d));
                }
            }
        }
        best
    }

    #[test]
    fn hand_examples() {
        let l = form(1, 1);
        assert_eq!(delta(&l, 10, 2, 0).unwrap(), 0.0);
        assert_eq!(delta(&l, 10, 1, 0).unwrap(), 0.0);
        assert_eq!(delta(&l, 10, 3, 0).unwrap(), 0.0);
        assert!(matches!(delta(&l, 10, 2, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn max_delta_examples() {
        let l = form(1, 1);
        let r = max_delta(&l, 10, 2).unwrap();
        assert_eq!((r.a_star, r.max_abs_delta), (Some(0), Some(0.0)));
        let r = max_delta(&l, 10, 1).unwrap();
        assert_eq!(r.max_abs_delta.unwrap(), delta(&l, 10, 1, 0).unwrap().abs());
        // 2n + 2 is even for every n: no admissible class mod 2
        let r = max_delta(&form(2, 2), 10, 2).unwrap();
        assert_eq!((r.a_star, r.delta, r.max_abs_delta), (None, None, None));
    }

    #[test]
    fn oracle_equivalence_n_plus_one() {
        let fp = FormPrimes::new(&form(1, 1), 1000).unwrap().with_interval().unwrap();
        for q in 1..=20 {
            let got = fp.max_delta(q).unwrap();
            let want = naive_max(1, 1, 1000, q);
            assert_eq!(got.a_star.zip(got.delta), want, "q = {q}");
            for a in 0..q {
                assert_eq!(fp.delta(q, a).ok(), naive_delta(1, 1, 1000, q, a));
            }
        }
    }

    #[test]
    fn symmetry_in_a() {
        let fp = FormPrimes::new(&form(3, 2), 2000).unwrap().with_interval().unwrap();
        for q in [4u64, 7, 12] {
            for a in 0..q {
                assert_eq!(fp.delta(q, a).ok(), fp.delta(q, a + q).ok());
            }
        }
    }

    #[test]
    fn partition_identity() {
        for (g, h) in [(1i64, 1i64), (2, 1), (6, 5), (1, 0)] {
            let fp = FormPrimes::new(&form(g, h), 3000).unwrap();
            for q in 1..=30u64 {
                let admissible: u64 = (0..q)
                    .filter(|&a| fp.eval_mod(a, q).gcd(&q) == 1)
                    .map(|a| fp.prime_n.iter().filter(|&&n| n % q == a).count() as u64)
                    .sum();
                let rest = fp.form_count() - admissible;
                let omega = {
                    let mut ps = factor_u64(g as u64);
                    ps.extend(factor_u64(q));
                    ps.sort_unstable();
                    ps.dedup();
                    ps.len() as u64
                };
                assert!(rest <= omega, "g={g} h={h} q={q}: {rest} > {omega}");
            }
        }
    }

    #[test]
    fn sum_examples() {
        let l = form(1, 1);
        let r = discrepancy_sum(&l, 1000, 1, 1).unwrap();
        assert_eq!(r.total, delta(&l, 1000, 1, 0).unwrap().abs());
        let r = discrepancy_sum(&l, 10_000, 10, 1).unwrap();
        assert_eq!(r.rows.len(), 10);
        assert!(r.total.is_finite());
        assert_eq!(r.main_count, 1033);
        let odd = discrepancy_sum(&l, 10_000, 10, 2).unwrap();
        assert_eq!(odd.rows.iter().map(|r| r.q).collect::<Vec<_>>(), vec![1, 3, 5, 7, 9]);
        let with_k = discrepancy_sum_with(&l, 10_000, 10, 1, 2.0, Some(3)).unwrap();
        assert_eq!(with_k.asymptotic_exponent, Some(900.0));
        assert_eq!(with_k.total, r.total);
    }

    #[test]
    fn lower_bound_examples() {
        let r = lower_bound_check(&form(1, 1), 10_000, 1).unwrap();
        assert_eq!(r.count, 1033);
        assert!((r.rhs - 542.868).abs() < 1e-3);
        assert!(r.holds);
        let r = lower_bound_check(&form(2, 4), 10_000, 1).unwrap();
        assert_eq!(r.count, 0);
        assert!(!r.holds);
        let r = lower_bound_check(&form(1, 1), 10_000, 6).unwrap();
        assert!((r.phi_b_ratio - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn budgets() {
        assert!(matches!(FormPrimes::new(&form(1, 1), X_BUDGET + 1), Err(Error::Resource(_))));
        assert!(matches!(max_delta(&form(1, 1), 100, 0), Err(Error::Resource(_))));
        assert!(FormPrimes::new(&form(1 << 40, 0), 1 << 22).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn oracle_equivalence_random_forms(g in 1i64..8, h in -5i64..30, x in 50u64..1500) {
            let fp = FormPrimes::new(&form(g, h), x).unwrap().with_interval().unwrap();
            for q in 1..=50u64 {
                let got = fp.max_delta(q).unwrap();
                prop_assert_eq!(got.a_star.zip(got.delta), naive_max(g, h, x, q));
            }
        }
    }
}
