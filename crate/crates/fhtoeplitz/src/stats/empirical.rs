use super::mcmc::SampleBatch;
use crate::asymptotics::classical_locations;
use crate::error::{Error, Result};
use crate::trig::{cdf_mu, EquilibriumDensity};
use std::f64::consts::PI;

pub const RIGIDITY_EPSILONS: [f64; 3] = [0.05, 0.1, 0.2];
const GRID_POINTS: usize = 64;
const HIST_BINS: usize = 16;
const HIST_RANGE: f64 = 4.0;

/// A Monte-Carlo estimate with a standard error from chain-level means.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub theta: f64,
    pub expected: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidityRow {
    pub epsilon: f64,
    /// P(sup_θ |N_n(θ) − n·cdf(θ)| ≤ (1+ε) log n/π)
    pub counting: Estimate,
    /// P(max_k ψ(η_k)|ξ_k − η_k| ≤ (1+ε) log n/(πn))
    pub ordered: Estimate,
    /// P(max_k |n·cdf(ξ_k) − k| ≤ (1+ε) log n/π + 1)
    pub cdf_deviation: Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderedStats {
    pub k_theta: usize,
    pub eta: f64,
    /// moments of n·ψ(η)(ξ − η)·π/√log n
    pub mean: f64,
    pub variance: f64,
    pub kurtosis: f64,
    /// (lower edge, upper edge, count) on [−4, 4]; outliers are clamped into the end bins
    pub histogram: Vec<(f64, f64, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalReport {
    pub n: usize,
    pub theta: f64,
    pub total_samples: usize,
    pub expected_count: f64,
    pub count_mean: Estimate,
    pub count_variance: Estimate,
    pub grid: Vec<GridPoint>,
    pub sup_deviation: Estimate,
    pub max_cdf_deviation: f64,
    pub rigidity: Vec<RigidityRow>,
    pub ordered: OrderedStats,
}

/// sup_θ |N(θ) − F(θ)| for sorted angles, F = n·cdf. N jumps only at the ξ_k
/// and F is increasing, so the sup is attained at a jump from either side.
pub fn sup_counting_deviation(sorted: &[f64], eq: &EquilibriumDensity) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = n * cdf_mu(eq, x);
            let k = (i + 1) as f64;
            (k - f).abs().max((k - 1.0 - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Number of angles in [0, θ] of a sorted sample.
pub fn count_up_to(sorted: &[f64], theta: f64) -> usize {
    sorted.partition_point(|&x| x <= theta)
}

/// ⌊x + 1/2⌋, ties rounded up.
pub fn nearest_index(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

fn chain_estimate(per_chain: &[f64]) -> Estimate {
    let c = per_chain.len() as f64;
    let value = per_chain.iter().sum::<f64>() / c;
    let stderr = if per_chain.len() > 1 {
        (per_chain.iter().map(|x| (x - value).powi(2)).sum::<f64>() / (c - 1.0) / c).sqrt()
    } else {
        f64::NAN
    };
    Estimate { value, stderr }
}

/// Per-chain means of a per-sample quantity.
fn chain_means(batch: &SampleBatch, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..batch.chains)
        .map(|c| (0..batch.samples).map(|s| f(batch.sample(c, s))).sum::<f64>() / batch.samples as f64)
        .collect()
}

pub fn empirical_statistics(batch: &SampleBatch, eq: &EquilibriumDensity, theta: f64) -> Result<EmpiricalReport> {
    if batch.chains == 0 || batch.samples == 0 || batch.n < 2 {
        return Err(Error::domain("empty sample batch"));
    }
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(Error::domain("theta must lie in (0, 2pi)"));
    }
    let n = batch.n;
    let nf = n as f64;
    let log_n = nf.ln();
    let total = batch.chains * batch.samples;

    let count = |s: &[f64]| count_up_to(s, theta) as f64;
    let count_mean = chain_estimate(&chain_means(batch, count));
    let grand = count_mean.value;
    let count_variance = chain_estimate(&chain_means(batch, |s| (count(s) - grand).powi(2)));
    let count_variance = Estimate { value: count_variance.value * total as f64 / (total - 1).max(1) as f64, ..count_variance };

    let grid = (1..GRID_POINTS)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / GRID_POINTS as f64;
            let vals: Vec<f64> = batch.iter().map(|s| count_up_to(s, t) as f64).collect();
            let mean = vals.iter().sum::<f64>() / total as f64;
            let variance = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (total - 1).max(1) as f64;
            GridPoint { theta: t, expected: nf * cdf_mu(eq, t), mean, variance }
        })
        .collect();

    let eta = classical_locations(eq, n);
    let ordered_dev = |s: &[f64]| {
        s.iter().zip(&eta).map(|(x, e)| eq.at(*e) * (x - e).abs()).fold(0.0, f64::max)
    };
    let cdf_dev = |s: &[f64]| {
        s.iter()
            .enumerate()
            .map(|(i, &x)| (nf * cdf_mu(eq, x) - (i + 1) as f64).abs())
            .fold(0.0, f64::max)
    };
    let sup_deviation = chain_estimate(&chain_means(batch, |s| sup_counting_deviation(s, eq)));
    let max_cdf_deviation = batch.iter().map(cdf_dev).fold(0.0, f64::max);

    let rigidity = RIGIDITY_EPSILONS
        .iter()
        .map(|&eps| {
            let count_bound = (1.0 + eps) * log_n / PI;
            let ordered_bound = count_bound / nf;
            let indicator = |b: bool| if b { 1.0 } else { 0.0 };
            RigidityRow {
                epsilon: eps,
                counting: chain_estimate(&chain_means(batch, |s| indicator(sup_counting_deviation(s, eq) <= count_bound))),
                ordered: chain_estimate(&chain_means(batch, |s| indicator(ordered_dev(s) <= ordered_bound))),
                cdf_deviation: chain_estimate(&chain_means(batch, |s| indicator(cdf_dev(s) <= count_bound + 1.0))),
            }
        })
        .collect();

    let k_theta = nearest_index(nf * cdf_mu(eq, theta)).clamp(1, n as i64) as usize;
    let eta_k = eta[k_theta - 1];
    let norm = nf * eq.at(eta_k) * PI / log_n.sqrt();
    let z: Vec<f64> = batch.iter().map(|s| norm * (s[k_theta - 1] - eta_k)).collect();
    let mean = z.iter().sum::<f64>() / total as f64;
    let m2 = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / total as f64;
    let m4 = z.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / total as f64;
    let width = 2.0 * HIST_RANGE / HIST_BINS as f64;
    let mut counts = vec![0usize; HIST_BINS];
    for x in &z {
        let b = ((x + HIST_RANGE) / width).floor().clamp(0.0, (HIST_BINS - 1) as f64) as usize;
        counts[b] += 1;
    }
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (-HIST_RANGE + b as f64 * width, -HIST_RANGE + (b + 1) as f64 * width, c))
        .collect();
    let ordered = OrderedStats {
        k_theta,
        eta: eta_k,
        mean,
        variance: m2 * total as f64 / (total - 1).max(1) as f64,
        kurtosis: m4 / (m2 * m2),
        histogram,
    };

    Ok(EmpiricalReport {
        n,
        theta,
        total_samples: total,
        expected_count: nf * cdf_mu(eq, theta),
        count_mean,
        count_variance,
        grid,
        sup_deviation,
        max_cdf_deviation,
        rigidity,
        ordered,
    })
}
