//! Prime counts in short windows `(n, n + λ log n]` and normalized gaps
//! between consecutive primes, with their Poisson and exponential reference
//! laws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::sieve::{count_primes_with, primes_in_with, SieveConfig};

/// Slack added to `λ log n` when deciding whether a prime lies in a window.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Largest window count kept in its own bucket; larger counts overflow.
pub const DEFAULT_M_MAX: usize = 64;

// Values of n handled by one parallel task.
const CHUNK: u64 = 1 << 24;

/// Number of integers `t >= 1` with `t <= λ log n` (up to the tie tolerance),
/// i.e. the length of the integer part of the window `(n, n + λ log n]`.
pub fn window_width(n: u64, lambda: f64) -> u64 {
    if n <= 1 {
        return 0;
    }
    let w = lambda * (n as f64).ln() + TIE_TOLERANCE;
    if w < 1.0 {
        0
    } else {
        w.floor() as u64
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return arg(format!("lambda must be a positive real, got {lambda}"));
    }
    Ok(())
}

/// `π(n + λ log n) − π(n)`.
pub fn window_count(n: u64, lambda: f64) -> Result<u64> {
    check_lambda(lambda)?;
    if n == 0 {
        return arg("window_count needs n >= 1");
    }
    let w = window_width(n, lambda);
    count_primes_with(n, n + w, &SieveConfig::default())
}

/// Counts of `n <= x` by the number of primes in `(n, n + λ log n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowHistogram {
    pub x: u64,
    pub lambda: f64,
    /// `counts[m]` for `m <= m_max`.
    pub counts: Vec<u64>,
    /// Number of `n` whose window held more than `m_max` primes.
    pub overflow: u64,
    pub n_total: u64,
    /// Exact sum of all window counts, overflow included.
    pub window_sum: u64,
}

impl WindowHistogram {
    pub fn empty(x: u64, lambda: f64, m_max: usize) -> Self {
        WindowHistogram {
            x,
            lambda,
            counts: vec![0; m_max + 1],
            overflow: 0,
            n_total: 0,
            window_sum: 0,
        }
    }

    /// Builds a histogram from explicit per-`m` counts.
    pub fn from_counts(x: u64, lambda: f64, counts: &[u64]) -> Self {
        let mut h = WindowHistogram::empty(x, lambda, DEFAULT_M_MAX.max(counts.len().saturating_sub(1)));
        for (m, &c) in counts.iter().enumerate() {
            h.counts[m] = c;
            h.n_total += c;
            h.window_sum += m as u64 * c;
        }
        h
    }

    pub fn m_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn record(&mut self, m: u64) {
        if m as usize <= self.m_max() {
            self.counts[m as usize] += 1;
        } else {
            self.overflow += 1;
        }
        self.n_total += 1;
        self.window_sum += m;
    }

    /// Pointwise sum; both sides must share `m_max`.
    pub fn merge(&mut self, other: &WindowHistogram) {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        self.n_total += other.n_total;
        self.window_sum += other.window_sum;
    }

    pub fn count(&self, m: usize) -> u64 {
        self.counts.get(m).copied().unwrap_or(0)
    }

    pub fn frequency(&self, m: usize) -> f64 {
        self.count(m) as f64 / self.n_total as f64
    }

    /// Largest `m` with a nonzero count (ignoring overflow).
    pub fn max_observed(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.window_sum as f64 / self.n_total as f64
    }

    /// Per-`m` rows: `(m, count, frequency, poisson_pmf, abs_error)`.
    pub fn rows(&self) -> Vec<HistogramRow> {
        (0..=self.max_observed())
            .map(|m| {
                let frequency = self.frequency(m);
                let pmf = poisson_pmf(self.lambda, m as u64);
                HistogramRow {
                    m: m as u64,
                    count: self.count(m),
                    frequency,
                    poisson_pmf: pmf,
                    abs_error: (frequency - pmf).abs(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub m: u64,
    pub count: u64,
    pub frequency: f64,
    pub poisson_pmf: f64,
    pub abs_error: f64,
}

// Histogram of n in [a, b] given every prime in (a, b + width(b)], ascending.
fn histogram_chunk(a: u64, b: u64, lambda: f64, primes: &[u64], m_max: usize) -> WindowHistogram {
    let mut h = WindowHistogram::empty(0, lambda, m_max);
    let (mut left, mut right) = (0usize, 0usize);
    for n in a..=b {
        let end = n + window_width(n, lambda);
        while left < primes.len() && primes[left] <= n {
            left += 1;
        }
        right = right.max(left);
        while right < primes.len() && primes[right] <= end {
            right += 1;
        }
        h.record((right - left) as u64);
    }
    h
}

/// Histogram of `π(n + λ log n) − π(n)` over `1 <= n <= x`.
pub fn window_histogram(x: u64, lambda: f64) -> Result<WindowHistogram> {
    window_histogram_with(x, lambda, DEFAULT_M_MAX, &SieveConfig::default())
}

pub fn window_histogram_with(x: u64, lambda: f64, m_max: usize, config: &SieveConfig) -> Result<WindowHistogram> {
    check_lambda(lambda)?;
    if x < 2 {
        return arg(format!("window_histogram needs x >= 2, got {x}"));
    }
    let chunks: Vec<(u64, u64)> = (0..x.div_ceil(CHUNK)).map(|i| (1 + i * CHUNK, x.min((i + 1) * CHUNK))).collect();
    let partials: Vec<Result<WindowHistogram>> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let primes: Vec<u64> = primes_in_with(a, b + window_width(b, lambda), config)?.collect();
            Ok(histogram_chunk(a, b, lambda, &primes, m_max))
        })
        .collect();
    let mut hist = WindowHistogram::empty(x, lambda, m_max);
    for part in partials {
        hist.merge(&part?);
    }
    Ok(hist)
}

/// Exact sample mean of the window counts over `n <= x`.
pub fn mean_window_count(x: u64, lambda: f64) -> Result<f64> {
    Ok(window_histogram(x, lambda)?.mean())
}

/// `λ^m e^{−λ} / m!`.
pub fn poisson_pmf(lambda: f64, m: u64) -> f64 {
    if m <= 20 {
        let mut term = (-lambda).exp();
        for k in 1..=m {
            term *= lambda / k as f64;
        }
        term
    } else {
        let ln_fact: f64 = (2..=m).map(|k| (k as f64).ln()).sum();
        (m as f64 * lambda.ln() - lambda - ln_fact).exp()
    }
}

/// Total variation distance between the histogram's empirical law and
/// Poisson(λ). The pmf tail beyond `m_max` is compared with the overflow
/// bucket.
pub fn tv_distance(hist: &WindowHistogram, lambda: f64) -> Result<f64> {
    if hist.n_total == 0 {
        return arg("tv_distance of an empty histogram");
    }
    let mut acc = 0.0;
    let mut pmf_mass = 0.0;
    for m in 0..=hist.m_max() {
        let pmf = poisson_pmf(lambda, m as u64);
        pmf_mass += pmf;
        acc += (hist.frequency(m) - pmf).abs();
    }
    let tail = (1.0 - pmf_mass).max(0.0);
    acc += (hist.overflow as f64 / hist.n_total as f64 - tail).abs();
    Ok(0.5 * acc)
}

/// Pearson chi-square of the histogram against Poisson(λ), with cells
/// `m = 0, …, last − 1` and a final cell `m >= last`.
pub fn chi_square_poisson(hist: &WindowHistogram, lambda: f64, last: usize) -> Result<f64> {
    if hist.n_total == 0 {
        return arg("chi-square of an empty histogram");
    }
    let n = hist.n_total as f64;
    let mut stat = 0.0;
    let mut head_pmf = 0.0;
    let mut head_count = 0u64;
    for m in 0..last {
        let pmf = poisson_pmf(lambda, m as u64);
        head_pmf += pmf;
        head_count += hist.count(m);
        let expected = n * pmf;
        stat += (hist.count(m) as f64 - expected).powi(2) / expected;
    }
    let tail_expected = n * (1.0 - head_pmf).max(f64::MIN_POSITIVE);
    let tail_observed = (hist.n_total - head_count) as f64;
    stat += (tail_observed - tail_expected).powi(2) / tail_expected;
    Ok(stat)
}

/// Two-sample chi-square statistic for homogeneity of two histograms.
/// Identical histograms give 0.
pub fn chi_square_two_sample(a: &WindowHistogram, b: &WindowHistogram) -> f64 {
    let (na, nb) = (a.n_total as f64, b.n_total as f64);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let cells = a.counts.len().max(b.counts.len());
    let mut stat = 0.0;
    let mut cell = |x: f64, y: f64| {
        if x + y > 0.0 {
            stat += (ka * x - kb * y).powi(2) / (x + y);
        }
    };
    for m in 0..cells {
        cell(a.count(m) as f64, b.count(m) as f64);
    }
    cell(a.overflow as f64, b.overflow as f64);
    stat
}

/// `∫_a^b e^{−t} dt`.
pub fn exponential_mass(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0) || !(b >= a) {
        return arg(format!("exponential_mass needs 0 <= a <= b, got ({a}, {b})"));
    }
    Ok((-a).exp() - (-b).exp())
}

/// Which logarithm normalizes the gap `d_n = p_{n+1} − p_n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapNormalization {
    /// `log n`, with `n` the index of the prime.
    #[default]
    PrimeIndex,
    /// `log p_n`.
    PrimeValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapHistogram {
    pub x: u64,
    pub normalization: GapNormalization,
    pub bin_edges: Vec<f64>,
    /// `bin_counts[i]` counts values in `(edge_i, edge_{i+1}]`.
    pub bin_counts: Vec<u64>,
    pub out_of_range: u64,
    pub n_total: u64,
    /// `p_{π(x)}`, the largest prime up to `x`.
    pub last_prime: u64,
    /// `Σ d_n` over `1 <= n < π(x)`, including the excluded first gap.
    pub gap_sum: u64,
}

impl GapHistogram {
    /// Empirical fraction of normalized gaps in `(edge_i, edge_{i+1}]`.
    pub fn mass(&self, bin: usize) -> f64 {
        self.bin_counts[bin] as f64 / self.n_total as f64
    }
}

fn bin_index(edges: &[f64], v: f64) -> Option<usize> {
    if v <= edges[0] || v > *edges.last()? {
        return None;
    }
    Some(edges.partition_point(|&e| e < v) - 1)
}

/// Histogram of `d_n / log n` for `2 <= n <= π(x) − 1`.
pub fn gap_histogram(x: u64, bin_edges: &[f64]) -> Result<GapHistogram> {
    gap_histogram_with(x, bin_edges, GapNormalization::PrimeIndex, &SieveConfig::default())
}

pub fn gap_histogram_with(x: u64, bin_edges: &[f64], normalization: GapNormalization, config: &SieveConfig) -> Result<GapHistogram> {
    if x < 3 {
        return arg(format!("gap_histogram needs x >= 3, got {x}"));
    }
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return arg("bin edges must be strictly ascending with at least two entries");
    }
    let mut hist = GapHistogram {
        x,
        normalization,
        bin_edges: bin_edges.to_vec(),
        bin_counts: vec![0; bin_edges.len() - 1],
        out_of_range: 0,
        n_total: 0,
        last_prime: 2,
        gap_sum: 0,
    };
    let mut primes = primes_in_with(0, x, config)?;
    let mut prev = primes.next().expect("x >= 3 has a prime");
    // index of `prev`
    let mut n = 1u64;
    for p in primes {
        let d = p - prev;
        hist.gap_sum += d;
        if n >= 2 {
            let norm = match normalization {
                GapNormalization::PrimeIndex => (n as f64).ln(),
                GapNormalization::PrimeValue => (prev as f64).ln(),
            };
            match bin_index(bin_edges, d as f64 / norm) {
                Some(i) => hist.bin_counts[i] += 1,
                None => hist.out_of_range += 1,
            }
            hist.n_total += 1;
        }
        prev = p;
        n += 1;
    }
    hist.last_prime = prev;
    Ok(hist)
}
