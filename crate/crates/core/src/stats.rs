//! Summary statistics shared by the Monte Carlo harnesses.

use serde::{Deserialize, Serialize};

/// Width of every confidence interval reported by this crate, in standard
/// errors (normal approximation) or as the Wilson `z`.
pub const CI_SIGMAS: f64 = 3.0;

/// Pairwise summation. The result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Neumaier-compensated sum, used where a total must be accurate to a few ulps.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
}

/// Sample mean with a normal-approximation interval of `CI_SIGMAS` standard errors.
pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    let mean = if n == 0 {
        0.0
    } else {
        pairwise_sum(xs) / n as f64
    };
    let var = sample_variance_about(xs, mean);
    let std_err = if n > 0 { (var / n as f64).sqrt() } else { 0.0 };
    MeanEstimate {
        mean,
        std_err,
        ci_low: mean - CI_SIGMAS * std_err,
        ci_high: mean + CI_SIGMAS * std_err,
        samples: n as u64,
    }
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mean = pairwise_sum(xs) / xs.len() as f64;
    sample_variance_about(xs, mean)
}

fn sample_variance_about(xs: &[f64], mean: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Median of a slice (copies and sorts).
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
