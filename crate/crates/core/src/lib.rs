//! Sequenced-replacement sampling (SRS) for mini-batch SGD.
//!
//! SRS draws a mini-batch from a pool of `N` slots and refills the drawn
//! slots with the next samples of a fixed dataset order, so every sample is
//! re-entered at a steady rate while batches still vary like replacement
//! sampling. This crate provides:
//!
//! * [`sampling`]: SRS, epoch-shuffle and batched-replacement samplers
//! * [`combinatorics`]: exact configuration counts for both regimes
//! * [`coverage`]: Monte-Carlo coverage statistics per sampler
//! * [`training`]: a small from-scratch SGD stack for end-to-end comparison
//! * [`harness`]: config files, CSV output and the experiment commands

pub mod combinatorics;
pub mod coverage;
pub mod harness;
pub mod rng;
pub mod sampling;
pub mod training;

use thiserror::Error;

pub use rng::RngStream;
pub use sampling::{MiniBatch, SamplerKind};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Sampling(#[from] sampling::SamplingError),
    #[error(transparent)]
    Count(#[from] combinatorics::CountError),
    #[error(transparent)]
    Coverage(#[from] coverage::CoverageError),
    #[error(transparent)]
    Train(#[from] training::TrainError),
    #[error(transparent)]
    Config(#[from] harness::ConfigError),
    #[error(transparent)]
    Csv(#[from] harness::CsvError),
}
