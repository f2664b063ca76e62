//! Milestone learning-rate schedules and effective-epoch accounting.

use super::TrainError;

/// Piecewise-constant rate: `initial_rate * decay_factor^m`, where `m` is the
/// number of milestones at or below the current effective epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    initial_rate: f64,
    milestones: Vec<f64>,
    decay_factor: f64,
}

impl LrSchedule {
    pub fn new(initial_rate: f64, milestones: Vec<f64>, decay_factor: f64) -> Result<Self, TrainError> {
        if !(initial_rate > 0.0 && initial_rate.is_finite()) {
            return Err(TrainError::InvalidConfig(format!(
                "initial learning rate must be positive, got {initial_rate}"
            )));
        }
        if !(decay_factor > 0.0 && decay_factor < 1.0) {
            return Err(TrainError::InvalidConfig(format!(
                "decay factor must lie in (0, 1), got {decay_factor}"
            )));
        }
        if milestones.iter().any(|m| !(m.is_finite() && *m >= 0.0))
            || milestones.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(TrainError::InvalidConfig(format!(
                "milestones must be finite, nonnegative and strictly increasing, got {milestones:?}"
            )));
        }
        Ok(Self {
            initial_rate,
            milestones,
            decay_factor,
        })
    }

    pub fn initial_rate(&self) -> f64 {
        self.initial_rate
    }

    pub fn milestones(&self) -> &[f64] {
        &self.milestones
    }

    pub fn decay_factor(&self) -> f64 {
        self.decay_factor
    }

    pub fn lr_at(&self, effective_epoch: f64) -> f64 {
        let passed = self.milestones.iter().filter(|&&m| m <= effective_epoch).count();
        (0..passed).fold(self.initial_rate, |lr, _| lr * self.decay_factor)
    }
}

/// Iterations completed over iterations per non-replacement epoch, kept as
/// an exact ratio of integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffectiveEpoch {
    pub iterations: u64,
    pub per_epoch: u64,
}

impl EffectiveEpoch {
    pub fn value(&self) -> f64 {
        self.iterations as f64 / self.per_epoch as f64
    }
}

/// `n_I / floor(N / B)`.
pub fn effective_epoch(
    iterations: u64,
    dataset_size: usize,
    batch_size: usize,
) -> Result<EffectiveEpoch, TrainError> {
    let per_epoch = if batch_size == 0 { 0 } else { dataset_size / batch_size };
    if per_epoch == 0 {
        return Err(TrainError::InvalidConfig(format!(
            "floor(N / B) is zero for N={dataset_size}, B={batch_size}"
        )));
    }
    Ok(EffectiveEpoch {
        iterations,
        per_epoch: per_epoch as u64,
    })
}
