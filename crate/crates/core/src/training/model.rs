//! One-hidden-layer rectifier network with a softmax cross-entropy loss.

use rand_distr::{Distribution, StandardNormal};

use super::dataset::Split;
use super::TrainError;
use crate::rng::RngStream;

/// The four parameter tensors, row-major. Also used for gradients and
/// momentum buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// `hidden x input`
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `classes x hidden`
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Params {
    pub fn zeros(input: usize, hidden: usize, classes: usize) -> Self {
        Self {
            w1: vec![0.0; hidden * input],
            b1: vec![0.0; hidden],
            w2: vec![0.0; classes * hidden],
            b2: vec![0.0; classes],
        }
    }

    pub fn zeros_like(other: &Params) -> Self {
        Self {
            w1: vec![0.0; other.w1.len()],
            b1: vec![0.0; other.b1.len()],
            w2: vec![0.0; other.w2.len()],
            b2: vec![0.0; other.b2.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_shape(&self, other: &Params) -> bool {
        self.w1.len() == other.w1.len()
            && self.b1.len() == other.b1.len()
            && self.w2.len() == other.w2.len()
            && self.b2.len() == other.b2.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .chain(&mut self.b1)
            .chain(&mut self.w2)
            .chain(&mut self.b2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    input: usize,
    hidden: usize,
    classes: usize,
    pub params: Params,
}

/// Rows of features with labels and per-row loss weights. The loss is
/// `sum_r weight_r * CE_r`, so uniform weights `1/B` give the batch mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Batch {
    /// Gathers `indices` from `split` with weight `1/len` each. Repeated
    /// indices become repeated rows.
    pub fn gather(split: &Split, indices: &[usize]) -> Self {
        let w = 1.0 / indices.len() as f64;
        let mut features = Vec::with_capacity(indices.len() * split.dim);
        for &i in indices {
            features.extend_from_slice(split.row(i));
        }
        Self {
            dim: split.dim,
            features,
            labels: indices.iter().map(|&i| split.labels[i]).collect(),
            weights: vec![w; indices.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.features[r * self.dim..(r + 1) * self.dim]
    }
}

/// Activations kept from [`Model::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: Batch,
    hidden_pre: Vec<f64>,
    hidden_act: Vec<f64>,
    probs: Vec<f64>,
}

impl ForwardCache {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub error: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Softmax of `logits` written into `out`; returns `log(sum(exp(logits)))`.
fn softmax_into(logits: &[f64], out: &mut [f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    max + sum.ln()
}

impl Model {
    /// Gaussian weights scaled by `1/sqrt(fan_in)`, zero biases.
    pub fn new(input: usize, hidden: usize, classes: usize, rng: &mut RngStream) -> Self {
        let mut params = Params::zeros(input, hidden, classes);
        let s1 = 1.0 / (input as f64).sqrt();
        for w in &mut params.w1 {
            let z: f64 = StandardNormal.sample(rng);
            *w = s1 * z;
        }
        let s2 = 1.0 / (hidden as f64).sqrt();
        for w in &mut params.w2 {
            let z: f64 = StandardNormal.sample(rng);
            *w = s2 * z;
        }
        Self {
            input,
            hidden,
            classes,
            params,
        }
    }

    pub fn zeros(input: usize, hidden: usize, classes: usize) -> Self {
        Self {
            input,
            hidden,
            classes,
            params: Params::zeros(input, hidden, classes),
        }
    }

    pub fn layer_sizes(&self) -> [usize; 3] {
        [self.input, self.hidden, self.classes]
    }

    fn hidden_row(&self, x: &[f64], pre: &mut [f64], act: &mut [f64]) {
        let p = &self.params;
        for j in 0..self.hidden {
            let z = p.b1[j] + dot(&p.w1[j * self.input..(j + 1) * self.input], x);
            pre[j] = z;
            act[j] = z.max(0.0);
        }
    }

    fn logits_row(&self, act: &[f64], logits: &mut [f64]) {
        let p = &self.params;
        for c in 0..self.classes {
            logits[c] = p.b2[c] + dot(&p.w2[c * self.hidden..(c + 1) * self.hidden], act);
        }
    }

    fn check_batch(&self, batch: &Batch) -> Result<(), TrainError> {
        if batch.dim != self.input || batch.features.len() != batch.len() * batch.dim {
            return Err(TrainError::DimensionMismatch {
                expected: self.input,
                got: batch.dim,
            });
        }
        if batch.weights.len() != batch.len() {
            return Err(TrainError::InvalidConfig(
                "batch weights and labels differ in length".into(),
            ));
        }
        if let Some(&l) = batch.labels.iter().find(|&&l| l >= self.classes) {
            return Err(TrainError::InvalidConfig(format!(
                "label {l} out of range for {} classes",
                self.classes
            )));
        }
        Ok(())
    }

    /// Weighted cross-entropy over the batch, plus the activations needed by
    /// [`Model::backward`].
    pub fn forward(&self, batch: &Batch) -> Result<(f64, ForwardCache), TrainError> {
        self.check_batch(batch)?;
        let (h, c, n) = (self.hidden, self.classes, batch.len());
        let mut hidden_pre = vec![0.0; n * h];
        let mut hidden_act = vec![0.0; n * h];
        let mut probs = vec![0.0; n * c];
        let mut logits = vec![0.0; c];
        let mut loss = 0.0;
        for r in 0..n {
            let pre = &mut hidden_pre[r * h..(r + 1) * h];
            let act = &mut hidden_act[r * h..(r + 1) * h];
            self.hidden_row(batch.row(r), pre, act);
            self.logits_row(act, &mut logits);
            let lse = softmax_into(&logits, &mut probs[r * c..(r + 1) * c]);
            loss += batch.weights[r] * (lse - logits[batch.labels[r]]);
        }
        Ok((
            loss,
            ForwardCache {
                batch: batch.clone(),
                hidden_pre,
                hidden_act,
                probs,
            },
        ))
    }

    pub fn loss(&self, batch: &Batch) -> Result<f64, TrainError> {
        self.forward(batch).map(|(l, _)| l)
    }

    /// Gradient of the forward loss with respect to every parameter.
    pub fn backward(&self, cache: &ForwardCache) -> Params {
        let (d, h, c) = (self.input, self.hidden, self.classes);
        let p = &self.params;
        let mut g = Params::zeros(d, h, c);
        let mut dlogits = vec![0.0; c];
        let mut dhidden = vec![0.0; h];
        for r in 0..cache.batch.len() {
            let w = cache.batch.weights[r];
            let y = cache.batch.labels[r];
            let probs = &cache.probs[r * c..(r + 1) * c];
            for k in 0..c {
                dlogits[k] = w * (probs[k] - if k == y { 1.0 } else { 0.0 });
            }
            let act = &cache.hidden_act[r * h..(r + 1) * h];
            dhidden.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..c {
                let dl = dlogits[k];
                g.b2[k] += dl;
                let w2_row = &p.w2[k * h..(k + 1) * h];
                let g2_row = &mut g.w2[k * h..(k + 1) * h];
                for j in 0..h {
                    g2_row[j] += dl * act[j];
                    dhidden[j] += dl * w2_row[j];
                }
            }
            let pre = &cache.hidden_pre[r * h..(r + 1) * h];
            let x = cache.batch.row(r);
            for j in 0..h {
                if pre[j] <= 0.0 {
                    continue;
                }
                let dz = dhidden[j];
                g.b1[j] += dz;
                for (gw, &xi) in g.w1[j * d..(j + 1) * d].iter_mut().zip(x) {
                    *gw += dz * xi;
                }
            }
        }
        g
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut pre = vec![0.0; self.hidden];
        let mut act = vec![0.0; self.hidden];
        let mut logits = vec![0.0; self.classes];
        self.hidden_row(x, &mut pre, &mut act);
        self.logits_row(&act, &mut logits);
        argmax(&logits)
    }

    /// Mean cross-entropy and misclassification rate over a whole split.
    pub fn evaluate(&self, split: &Split) -> Result<Evaluation, TrainError> {
        if split.dim != self.input {
            return Err(TrainError::DimensionMismatch {
                expected: self.input,
                got: split.dim,
            });
        }
        let mut pre = vec![0.0; self.hidden];
        let mut act = vec![0.0; self.hidden];
        let mut logits = vec![0.0; self.classes];
        let mut probs = vec![0.0; self.classes];
        let mut loss = 0.0;
        let mut wrong = 0usize;
        for i in 0..split.len() {
            self.hidden_row(split.row(i), &mut pre, &mut act);
            self.logits_row(&act, &mut logits);
            let lse = softmax_into(&logits, &mut probs);
            let y = split.labels[i];
            loss += lse - logits[y];
            if argmax(&logits) != y {
                wrong += 1;
            }
        }
        let n = split.len() as f64;
        Ok(Evaluation {
            loss: loss / n,
            error: wrong as f64 / n,
        })
    }
}

/// First index of the maximum.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
