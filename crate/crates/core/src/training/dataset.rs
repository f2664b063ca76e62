//! Gaussian-blob classification data with a controllable images-per-class.

use rand_distr::{Distribution, StandardNormal};

use super::TrainError;
use crate::rng::{streams, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct BlobParams {
    pub classes: usize,
    pub ipc_train: usize,
    pub ipc_test: usize,
    pub dim: usize,
    /// Scale of the isotropic Gaussian the class means are drawn from.
    pub sigma_means: f64,
    /// Within-class noise scale.
    pub sigma_noise: f64,
}

impl BlobParams {
    pub fn validate(&self) -> Result<(), TrainError> {
        let counts = [
            ("classes", self.classes),
            ("ipc_train", self.ipc_train),
            ("ipc_test", self.ipc_test),
            ("dim", self.dim),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(TrainError::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        for (name, v) in [("sigma_means", self.sigma_means), ("sigma_noise", self.sigma_noise)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TrainError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Row-major feature matrix with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Split {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub params: BlobParams,
    pub seed: u64,
    pub means: Vec<f64>,
    pub train: Split,
    pub test: Split,
}

/// Samples are stored class-interleaved (sample `i` has label `i mod C`), so
/// the fixed sequence order used by SRS cycles through the classes.
pub fn gen_blobs(params: &BlobParams, seed: u64) -> Result<SyntheticDataset, TrainError> {
    params.validate()?;
    let mut rng = RngStream::new(seed, streams::DATASET);
    let (c, d) = (params.classes, params.dim);
    let mut normal = |scale: f64| -> f64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        scale * z
    };
    let means: Vec<f64> = (0..c * d).map(|_| normal(params.sigma_means)).collect();
    let mut split = |ipc: usize| {
        let n = c * ipc;
        let mut features = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = i % c;
            let mean = &means[label * d..(label + 1) * d];
            features.extend(mean.iter().map(|&m| m + normal(params.sigma_noise)));
            labels.push(label);
        }
        Split {
            dim: d,
            features,
            labels,
        }
    };
    let train = split(params.ipc_train);
    let test = split(params.ipc_test);
    Ok(SyntheticDataset {
        params: params.clone(),
        seed,
        means,
        train,
        test,
    })
}
