use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// `log_k x`: the natural logarithm applied `k` times, or `None` as soon as
/// an intermediate value is not positive.
pub fn iterated_log(x: f64, k: u32) -> Option<f64> {
    let mut v = x;
    for _ in 0..k {
        if !(v > 0.0) {
            return None;
        }
        v = v.ln();
    }
    Some(v)
}

/// Natural logarithm of a big integer (`-inf` for zero).
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
