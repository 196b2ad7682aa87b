use num_bigint::BigUint;
use proptest::prelude::*;

use pslab::admissible::is_admissible;
use pslab::erdos_rankin::{construct, override_params, sample_ns, theorem_report, verify_window_identity, Construction, DEFAULT_SEED};
use pslab::interval_stats::{window_count, window_histogram};
use pslab::interval_walk::{check_step_property, locate_batch, LocateOptions};
use pslab::sieve::{count_primes, read_cache, sieve_range, write_cache, SieveConfig, DEFAULT_ROUNDS};

#[test]
fn construction_survives_a_json_round_trip_and_walks() {
    let c = construct(&override_params(3, 29.0, 60.0, 1).unwrap(), DEFAULT_SEED).unwrap();
    let back = Construction::from_json(&c.to_json()).unwrap();
    assert_eq!(back, c);
    assert!(is_admissible(&back.system()));

    let ns = sample_ns(3, 30, 100_000).unwrap();
    assert!(verify_window_identity(&back, &ns, DEFAULT_ROUNDS).unwrap().certified);

    for r in locate_batch(&back, &(1..=40).collect::<Vec<_>>(), 0, &LocateOptions::default()) {
        let r = r.unwrap();
        assert!(check_step_property(&r.trace));
        assert!(r.primes_in_window.is_empty());
    }
    assert!(theorem_report(&back, 1e6).unwrap().log_g > 22.0);
}

#[test]
fn tampered_construction_is_rejected() {
    let c = construct(&override_params(3, 29.0, 60.0, 1).unwrap(), DEFAULT_SEED).unwrap();
    let text = c.to_json().replacen(&format!("\"h\": \"{}\"", c.h), &format!("\"h\": \"{}\"", &c.h + BigUint::from(1u32)), 1);
    assert!(Construction::from_json(&text).is_err());
}

#[test]
fn cached_segments_count_like_the_sieve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.bin");
    let segs = sieve_range(0, 2_000_000, &SieveConfig::with_segment_cap(1 << 16)).unwrap().collect_parallel();
    write_cache(&path, &segs).unwrap();
    let total: u64 = read_cache(&path).unwrap().iter().map(|s| s.count()).sum();
    assert_eq!(total, count_primes(0, 1_999_999).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn histogram_agrees_with_single_windows(x in 10u64..3000, lambda in 0.3f64..3.0) {
        let h = window_histogram(x, lambda).unwrap();
        let mut counts = vec![0u64; h.counts.len()];
        for n in 1..=x {
            counts[window_count(n, lambda).unwrap() as usize] += 1;
        }
        prop_assert_eq!(h.counts, counts);
    }
}
