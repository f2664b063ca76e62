//! Desk-scale training loop used to compare samplers end to end.

pub mod dataset;
pub mod model;
pub mod optim;
pub mod schedule;

use thiserror::Error;

use crate::rng::{streams, RngStream};
use crate::sampling::{Sampler, SamplerKind, SamplingError};

pub use dataset::{gen_blobs, BlobParams, Split, SyntheticDataset};
pub use model::{Batch, Evaluation, ForwardCache, Model, Params};
pub use optim::{sgd_step, sgd_update, OptimState};
pub use schedule::{effective_epoch, EffectiveEpoch, LrSchedule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("gradient or velocity shape does not match the model")]
    ShapeMismatch,
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Everything one training run needs. Defaults follow the reference
/// protocol (batch 64, lr 0.1, momentum 0.9, weight decay 5e-4, decay by 10
/// at each milestone) with milestones and epoch count halved to a 100-epoch
/// budget, on a small blob dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub sampler: SamplerKind,
    pub data: BlobParams,
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub lr_milestones: Vec<f64>,
    pub lr_decay: f64,
    pub total_effective_epochs: u64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerKind::Srs,
            data: BlobParams {
                classes: 10,
                ipc_train: 50,
                ipc_test: 20,
                dim: 16,
                sigma_means: 1.0,
                sigma_noise: 1.0,
            },
            hidden: 64,
            learning_rate: 0.1,
            momentum: 0.9,
            weight_decay: 0.0005,
            lr_milestones: vec![60.0, 75.0, 87.0],
            lr_decay: 0.1,
            total_effective_epochs: 100,
            batch_size: 64,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn train_size(&self) -> usize {
        self.data.classes * self.data.ipc_train
    }

    pub fn schedule(&self) -> Result<LrSchedule, TrainError> {
        LrSchedule::new(self.learning_rate, self.lr_milestones.clone(), self.lr_decay)
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        self.data.validate()?;
        self.schedule()?;
        if self.hidden == 0 {
            return Err(TrainError::InvalidConfig("hidden must be at least 1".into()));
        }
        if self.total_effective_epochs == 0 {
            return Err(TrainError::InvalidConfig("total_effective_epochs must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(TrainError::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(TrainError::InvalidConfig(format!(
                "weight_decay must be nonnegative, got {}",
                self.weight_decay
            )));
        }
        let n = self.train_size();
        if self.batch_size == 0 || self.batch_size > n {
            return Err(TrainError::InvalidConfig(format!(
                "batch_size must lie in [1, {n}] (classes * ipc_train), got {}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// One evaluation point, recorded after every completed effective epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub effective_epoch: f64,
    pub learning_rate: f64,
    /// Mean cross-entropy over the full training split.
    pub train_loss: f64,
    pub test_error: f64,
    pub wall_iterations: u64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub rows: Vec<MetricsRow>,
    pub model: Model,
    pub final_train: Evaluation,
    pub iterations_per_epoch: u64,
}

impl TrainReport {
    pub fn final_test_error(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.test_error)
    }

    pub fn best_test_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.test_error)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Runs `total_effective_epochs * floor(N / B)` SGD iterations. The learning rate of
/// iteration `t` is the schedule at effective epoch `t / floor(N / B)`.
pub fn train(config: &TrainConfig) -> Result<TrainReport, TrainError> {
    config.validate()?;
    let data = gen_blobs(&config.data, config.seed)?;
    train_on(config, &data)
}

/// Like [`train`], on a dataset the caller already generated.
pub fn train_on(config: &TrainConfig, data: &SyntheticDataset) -> Result<TrainReport, TrainError> {
    config.validate()?;
    let n = data.train.len();
    let b = config.batch_size;
    let per_epoch = effective_epoch(0, n, b)?.per_epoch;
    let schedule = config.schedule()?;

    let mut init_rng = RngStream::new(config.seed, streams::MODEL_INIT);
    let mut model = Model::new(data.train.dim, config.hidden, data.params.classes, &mut init_rng);
    let mut opt = OptimState::new(&model, config.momentum, config.weight_decay)?;
    let mut rng = RngStream::new(config.seed, streams::SAMPLER);
    let mut sampler = Sampler::new(config.sampler, n, b, &mut rng)?;

    let total = config.total_effective_epochs * per_epoch;
    let mut rows = Vec::with_capacity(config.total_effective_epochs as usize);
    for t in 0..total {
        let lr = schedule.lr_at(effective_epoch(t, n, b)?.value());
        let mb = sampler.next_batch(&mut rng);
        let batch = Batch::gather(&data.train, mb.indices());
        let (_, cache) = model.forward(&batch)?;
        let grad = model.backward(&cache);
        sgd_step(&mut model, &grad, lr, &mut opt)?;

        let done = t + 1;
        if done % per_epoch == 0 {
            let epoch = effective_epoch(done, n, b)?.value();
            let train_eval = model.evaluate(&data.train)?;
            let test_eval = model.evaluate(&data.test)?;
            rows.push(MetricsRow {
                effective_epoch: epoch,
                learning_rate: schedule.lr_at(epoch),
                train_loss: train_eval.loss,
                test_error: test_eval.error,
                wall_iterations: done,
            });
        }
    }
    let final_train = model.evaluate(&data.train)?;
    Ok(TrainReport {
        rows,
        model,
        final_train,
        iterations_per_epoch: per_epoch,
    })
}
