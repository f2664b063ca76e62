//! Monte-Carlo sample-coverage statistics per sampler.
//!
//! "Utilized with sufficient frequency" is measured two ways: the fraction of
//! samples never drawn (`untouched_fraction`) and the smallest per-sample draw
//! count (`min_count`). A chi-square statistic against uniform expected counts
//! is reported alongside.

use rayon::prelude::*;
use thiserror::Error;

use crate::rng::RngStream;
use crate::sampling::{Sampler, SamplerKind, SamplingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("chi-square needs at least one draw (T*B = 0)")]
    NoDraws,
    #[error("draw counts sum to {got}, expected T*B = {expected}")]
    CountMismatch { got: u64, expected: u64 },
    #[error("replicas must be at least 1")]
    NoReplicas,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
}

/// `sum_i (c_i - e)^2 / e` with `e = T*B/N`, on `N - 1` degrees of freedom.
pub fn chi_square_uniform(
    draw_counts: &[u64],
    iterations: u64,
    batch_size: usize,
) -> Result<ChiSquare, CoverageError> {
    let total = iterations * batch_size as u64;
    if total == 0 || draw_counts.is_empty() {
        return Err(CoverageError::NoDraws);
    }
    let got: u64 = draw_counts.iter().sum();
    if got != total {
        return Err(CoverageError::CountMismatch {
            got,
            expected: total,
        });
    }
    let expected = total as f64 / draw_counts.len() as f64;
    let statistic = draw_counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    Ok(ChiSquare {
        statistic,
        degrees_of_freedom: draw_counts.len() - 1,
    })
}

/// `(1 - B/N)^T`: the probability a given sample is never drawn in `T`
/// batched-replacement draws.
pub fn expected_untouched_replacement(dataset_size: usize, batch_size: usize, iterations: u64) -> f64 {
    let miss = 1.0 - batch_size as f64 / dataset_size as f64;
    if iterations == 0 {
        return 1.0;
    }
    if miss == 0.0 {
        return 0.0;
    }
    miss.powf(iterations as f64)
}

/// Visit statistics of one simulation replica.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitStats {
    pub draw_counts: Vec<u64>,
    pub iterations: u64,
    pub min_count: u64,
    pub max_count: u64,
    pub mean_count: f64,
    pub untouched_fraction: f64,
    /// `None` when nothing was drawn.
    pub chi_square: Option<f64>,
}

impl VisitStats {
    pub fn from_counts(draw_counts: Vec<u64>, iterations: u64, batch_size: usize) -> Self {
        let n = draw_counts.len();
        let min_count = draw_counts.iter().copied().min().unwrap_or(0);
        let max_count = draw_counts.iter().copied().max().unwrap_or(0);
        let total: u64 = draw_counts.iter().sum();
        let untouched = draw_counts.iter().filter(|&&c| c == 0).count();
        let chi_square = chi_square_uniform(&draw_counts, iterations, batch_size)
            .ok()
            .map(|c| c.statistic);
        Self {
            iterations,
            min_count,
            max_count,
            mean_count: total as f64 / n as f64,
            untouched_fraction: untouched as f64 / n as f64,
            chi_square,
            draw_counts,
        }
    }
}

/// Runs `iterations` draws of one sampler and tallies per-sample draw counts.
pub fn simulate_replica(
    kind: SamplerKind,
    dataset_size: usize,
    batch_size: usize,
    iterations: u64,
    rng: &mut RngStream,
) -> Result<VisitStats, SamplingError> {
    let mut sampler = Sampler::new(kind, dataset_size, batch_size, rng)?;
    let mut counts = vec![0u64; dataset_size];
    for _ in 0..iterations {
        for &i in sampler.next_batch(rng).indices() {
            counts[i] += 1;
        }
    }
    Ok(VisitStats::from_counts(counts, iterations, batch_size))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaReport {
    pub kind: SamplerKind,
    pub dataset_size: usize,
    pub batch_size: usize,
    pub iterations: u64,
    pub seed: u64,
    /// Indexed by replica; replica `r` used stream id `r`.
    pub replicas: Vec<VisitStats>,
    pub median_min_count: f64,
    pub median_max_count: f64,
    pub median_mean_count: f64,
    pub median_untouched_fraction: f64,
    pub median_chi_square: Option<f64>,
}

/// Median of a nonempty sample; the mean of the two middle values for even
/// lengths.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub fn simulate_coverage(
    kind: SamplerKind,
    dataset_size: usize,
    batch_size: usize,
    iterations: u64,
    seed: u64,
    replicas: usize,
) -> Result<ReplicaReport, CoverageError> {
    if replicas == 0 {
        return Err(CoverageError::NoReplicas);
    }
    let stats = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r);
            simulate_replica(kind, dataset_size, batch_size, iterations, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let med = |f: fn(&VisitStats) -> f64| median(&stats.iter().map(f).collect::<Vec<_>>());
    let chi: Option<Vec<f64>> = stats.iter().map(|s| s.chi_square).collect();
    Ok(ReplicaReport {
        kind,
        dataset_size,
        batch_size,
        iterations,
        seed,
        median_min_count: med(|s| s.min_count as f64),
        median_max_count: med(|s| s.max_count as f64),
        median_mean_count: med(|s| s.mean_count),
        median_untouched_fraction: med(|s| s.untouched_fraction),
        median_chi_square: chi.map(|c| median(&c)),
        replicas: stats,
    })
}
