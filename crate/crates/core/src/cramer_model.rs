//! Monte Carlo simulation of Cramér's random model: the prime indicator on
//! `n <= x` is replaced by independent Bernoulli variables with success
//! probability `1 / log x`.
//!
//! Random bits come from ChaCha8. Positions are split into fixed chunks of
//! [`CHUNK_POSITIONS`]; chunk `c` draws from stream `c` of the generator
//! seeded with `seed`, one `u64` per position, and a position is set when the
//! draw is below `p · 2^64`. Output is therefore independent of how chunks
//! are scheduled.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::interval_stats::{chi_square_two_sample, tv_distance, window_histogram, window_width, WindowHistogram, DEFAULT_M_MAX};

/// Positions per RNG substream.
pub const CHUNK_POSITIONS: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// Probability `1/log x` everywhere, window length `⌊λ log x⌋`.
    #[default]
    Fixed,
    /// Probability `1/log n` at position `n >= 3` (`X_1 = 0`, `X_2 = 1`),
    /// window `(n, n + λ log n]` as for the primes.
    PerN,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRun {
    pub x: u64,
    pub lambda: f64,
    pub seed: u64,
    pub variant: ModelVariant,
    /// `1 / log x`.
    pub p: f64,
    /// Window length `⌊λ log x⌋` of the fixed variant.
    pub window: u64,
    pub histogram: WindowHistogram,
}

fn threshold(p: f64) -> u64 {
    (p * 18_446_744_073_709_551_616.0).min(u64::MAX as f64) as u64
}

// Bits X_1..X_len, position i stored at bit index i - 1.
fn draw_bits(len: u64, seed: u64, variant: ModelVariant, p: f64) -> Vec<u64> {
    let words = len.div_ceil(64) as usize;
    let per_chunk = (CHUNK_POSITIONS / 64) as usize;
    let mut bits = vec![0u64; words];
    let fixed = threshold(p);
    bits.par_chunks_mut(per_chunk).enumerate().for_each(|(c, out)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let first = c as u64 * CHUNK_POSITIONS + 1;
        for k in 0..(out.len() as u64 * 64) {
            let i = first + k;
            if i > len {
                break;
            }
            let u = rng.next_u64();
            let hit = match variant {
                ModelVariant::Fixed => u < fixed,
                ModelVariant::PerN => match i {
                    1 => false,
                    2 => true,
                    _ => u < threshold(1.0 / (i as f64).ln()),
                },
            };
            if hit {
                out[(k / 64) as usize] |= 1 << (k % 64);
            }
        }
    });
    bits
}

#[inline]
fn bit(bits: &[u64], i: u64) -> u64 {
    let k = i - 1;
    bits[(k / 64) as usize] >> (k % 64) & 1
}

/// Runs the model with the fixed probability `1/log x`.
pub fn simulate(x: u64, lambda: f64, seed: u64) -> Result<ModelRun> {
    simulate_with(x, lambda, seed, ModelVariant::Fixed, DEFAULT_M_MAX)
}

pub fn simulate_with(x: u64, lambda: f64, seed: u64, variant: ModelVariant, m_max: usize) -> Result<ModelRun> {
    if x < 8 {
        return arg(format!("the random model needs x >= 8, got {x}"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return arg(format!("lambda must be a positive real, got {lambda}"));
    }
    let log_x = (x as f64).ln();
    let p = 1.0 / log_x;
    let window = window_width(x, lambda);
    let len = x + (lambda * log_x).ceil() as u64;
    let bits = draw_bits(len, seed, variant, p);

    let chunks: Vec<(u64, u64)> = (0..x.div_ceil(CHUNK_POSITIONS))
        .map(|c| (1 + c * CHUNK_POSITIONS, x.min((c + 1) * CHUNK_POSITIONS)))
        .collect();
    let partials: Vec<WindowHistogram> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut h = WindowHistogram::empty(x, lambda, m_max);
            match variant {
                ModelVariant::Fixed => {
                    // S_n = X_{n+1} + … + X_{n+w}, rolled forward one n at a time
                    let mut sum: u64 = (a + 1..=a + window).map(|i| bit(&bits, i)).sum();
                    for n in a..=b {
                        if n > a {
                            sum = sum + bit(&bits, n + window) - bit(&bits, n);
                        }
                        h.record(sum);
                    }
                }
                ModelVariant::PerN => {
                    let mut sum = 0u64;
                    let mut end = a; // sum covers positions (a, end]
                    let mut start = a;
                    for n in a..=b {
                        while start < n {
                            start += 1;
                            if start <= end {
                                sum -= bit(&bits, start);
                            } else {
                                end = start;
                            }
                        }
                        let target = n + window_width(n, lambda);
                        while end < target {
                            end += 1;
                            sum += bit(&bits, end);
                        }
                        h.record(sum);
                    }
                }
            }
            h
        })
        .collect();
    let mut histogram = WindowHistogram::empty(x, lambda, m_max);
    for part in &partials {
        histogram.merge(part);
    }
    Ok(ModelRun {
        x,
        lambda,
        seed,
        variant,
        p,
        window,
        histogram,
    })
}

/// Model and prime histograms side by side, each compared with Poisson(λ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub model: ModelRun,
    pub primes: WindowHistogram,
    pub tv_model: f64,
    pub tv_primes: f64,
    pub chi_square: f64,
}

pub fn compare_model_vs_primes(x: u64, lambda: f64, seed: u64) -> Result<ModelComparison> {
    let model = simulate(x, lambda, seed)?;
    let primes = window_histogram(x, lambda)?;
    Ok(ModelComparison {
        tv_model: tv_distance(&model.histogram, lambda)?,
        tv_primes: tv_distance(&primes, lambda)?,
        chi_square: chi_square_two_sample(&model.histogram, &primes),
        model,
        primes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_length_windows() {
        // λ log 8 < 1
        let run = simulate(8, 0.4, 123).unwrap();
        assert_eq!(run.window, 0);
        assert_eq!(run.histogram.count(0), 8);
        assert_eq!(run.histogram.n_total, 8);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(simulate(7, 1.0, 1).is_err());
        assert!(simulate(100, -1.0, 1).is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = simulate(200_000, 1.5, 9).unwrap();
        let b = simulate(200_000, 1.5, 9).unwrap();
        assert_eq!(a, b);
        let c = simulate(200_000, 1.5, 10).unwrap();
        assert_ne!(a.histogram, c.histogram);
    }

    #[test]
    fn rolling_sum_matches_direct_recount() {
        let (x, lambda, seed) = (70_000u64, 2.0, 5);
        let run = simulate(x, lambda, seed).unwrap();
        let len = x + (lambda * (x as f64).ln()).ceil() as u64;
        let bits = draw_bits(len, seed, ModelVariant::Fixed, run.p);
        let mut naive = WindowHistogram::empty(x, lambda, DEFAULT_M_MAX);
        for n in 1..=x {
            naive.record((n + 1..=n + run.window).map(|i| bit(&bits, i)).sum());
        }
        assert_eq!(run.histogram, naive);
    }

    #[test]
    fn per_n_variant_matches_direct_recount() {
        let (x, lambda, seed) = (70_000u64, 1.0, 3);
        let run = simulate_with(x, lambda, seed, ModelVariant::PerN, DEFAULT_M_MAX).unwrap();
        let len = x + (lambda * (x as f64).ln()).ceil() as u64;
        let bits = draw_bits(len, seed, ModelVariant::PerN, 0.0);
        assert_eq!(bit(&bits, 1), 0);
        assert_eq!(bit(&bits, 2), 1);
        let mut naive = WindowHistogram::empty(x, lambda, DEFAULT_M_MAX);
        for n in 1..=x {
            naive.record((n + 1..=n + window_width(n, lambda)).map(|i| bit(&bits, i)).sum());
        }
        assert_eq!(run.histogram, naive);
    }

    #[test]
    fn mean_within_four_standard_errors() {
        let (x, lambda) = (1_000_000u64, 1.0);
        for seed in 0..10 {
            let run = simulate(x, lambda, seed).unwrap();
            let w = run.window as f64;
            let expected = w * run.p;
            let se = w * (run.p * (1.0 - run.p) / x as f64).sqrt();
            let mean = run.histogram.mean();
            assert!((mean - expected).abs() <= 4.0 * se, "seed {seed}: {mean} vs {expected} ± {se}");
            assert_eq!(run.histogram.n_total, x);
        }
    }

    #[test]
    fn comparison_smoke() {
        let report = compare_model_vs_primes(10_000, 5.0, 7).unwrap();
        assert!(report.tv_model.is_finite() && report.tv_primes.is_finite() && report.chi_square.is_finite());
        assert_eq!(report.model.histogram.n_total, report.primes.n_total);
    }
}
