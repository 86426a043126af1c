//! Streaming statistics and confidence intervals used by the estimators.

use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

/// Welford's online mean/variance accumulator.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Welford::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (n - 1 denominator).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Two-sided confidence interval, `[low, high]` containing `estimate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }

    pub fn overlaps(&self, other: &ConfidenceInterval) -> bool {
        self.low <= other.high && other.low <= self.high
    }
}

/// Normal quantile for the standard 95% two-sided level.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion. Valid at small counts,
/// never escapes `[0, 1]`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> ConfidenceInterval {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * ((p * (1.0 - p) / n) + z2 / (4.0 * n * n)).sqrt();
    // Clamp into [0, 1] and onto the point estimate: at p = 0 or 1 the
    // closed form meets p only up to rounding.
    ConfidenceInterval {
        estimate: p,
        low: (centre - half).max(0.0).min(p),
        high: (centre + half).min(1.0).max(p),
    }
}

/// Basic bootstrap interval for the mean of `samples`.
///
/// Uses the reflected percentile form `2*mean - q_{1-a/2}, 2*mean - q_{a/2}`
/// with `resamples` bootstrap replicates, then widens to contain the point
/// estimate (degenerate resamples of tiny inputs can otherwise exclude it).
pub fn bootstrap_mean_ci(
    samples: &[f64],
    resamples: usize,
    confidence: f64,
    rng: &mut RngStream,
) -> ConfidenceInterval {
    assert!(!samples.is_empty(), "bootstrap needs at least one sample");
    assert!(confidence > 0.0 && confidence < 1.0);
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return ConfidenceInterval { estimate: mean, low: mean, high: mean };
    }
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = 0.0;
        for _ in 0..n {
            let idx = (rng.uniform01() * n as f64) as usize;
            acc += samples[idx.min(n - 1)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = 1.0 - confidence;
    let lo_q = quantile_sorted(&means, alpha / 2.0);
    let hi_q = quantile_sorted(&means, 1.0 - alpha / 2.0);
    let low = (2.0 * mean - hi_q).min(mean);
    let high = (2.0 * mean - lo_q).max(mean);
    ConfidenceInterval { estimate: mean, low, high }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi.min(n - 1)] * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_direct_formulas() {
        let data = [1.0, 2.0, 4.0, 8.0];
        let mut w = Welford::new();
        for x in data {
            w.push(x);
        }
        let mean = 15.0 / 4.0;
        let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
        assert!((w.mean() - mean).abs() < 1e-14);
        assert!((w.variance() - var).abs() < 1e-14);
        assert!((w.standard_error() - (var / 4.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn wilson_is_inside_unit_interval_and_contains_estimate() {
        for (s, n) in [(0u64, 10u64), (10, 10), (3, 7), (500, 1000)] {
            let ci = wilson_interval(s, n, Z_95);
            assert!(ci.low >= 0.0 && ci.high <= 1.0);
            assert!(ci.contains(ci.estimate));
        }
    }

    #[test]
    fn wilson_narrows_with_more_trials() {
        let wide = wilson_interval(5, 10, Z_95);
        let narrow = wilson_interval(500, 1000, Z_95);
        assert!(narrow.high - narrow.low < wide.high - wide.low);
    }

    #[test]
    fn bootstrap_contains_mean_and_is_deterministic() {
        let samples: Vec<f64> = (0..200).map(|i| (i % 7) as f64).collect();
        let mut rng = RngStream::new(5, 99);
        let ci = bootstrap_mean_ci(&samples, 1000, 0.95, &mut rng);
        assert!(ci.contains(ci.estimate));
        let mut rng2 = RngStream::new(5, 99);
        let ci2 = bootstrap_mean_ci(&samples, 1000, 0.95, &mut rng2);
        assert_eq!(ci, ci2);
    }
}
