//! SGD with momentum and coupled weight decay.
//!
//! Per coordinate: `g' = g + wd * w`, `v = mu * v + g'`, `w = w - lr * v`.
//! With `mu = 0` and `wd = 0` this is the plain step `w - lr * g`. Decay is
//! applied to the weight matrices only, never to biases.

use super::model::{Model, Params};
use super::TrainError;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimState {
    momentum: f64,
    weight_decay: f64,
    velocity: Params,
}

impl OptimState {
    pub fn new(model: &Model, momentum: f64, weight_decay: f64) -> Result<Self, TrainError> {
        if !(0.0..1.0).contains(&momentum) {
            return Err(TrainError::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {momentum}"
            )));
        }
        if !(weight_decay >= 0.0 && weight_decay.is_finite()) {
            return Err(TrainError::InvalidConfig(format!(
                "weight_decay must be nonnegative, got {weight_decay}"
            )));
        }
        Ok(Self {
            momentum,
            weight_decay,
            velocity: Params::zeros_like(&model.params),
        })
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    pub fn weight_decay(&self) -> f64 {
        self.weight_decay
    }

    pub fn velocity(&self) -> &Params {
        &self.velocity
    }
}

/// One update of a single tensor.
pub fn sgd_update(
    weights: &mut [f64],
    grad: &[f64],
    velocity: &mut [f64],
    learning_rate: f64,
    momentum: f64,
    weight_decay: f64,
) {
    debug_assert!(weights.len() == grad.len() && weights.len() == velocity.len());
    for ((w, &g), v) in weights.iter_mut().zip(grad).zip(velocity.iter_mut()) {
        let g = g + weight_decay * *w;
        *v = momentum * *v + g;
        *w -= learning_rate * *v;
    }
}

pub fn sgd_step(
    model: &mut Model,
    grad: &Params,
    learning_rate: f64,
    opt: &mut OptimState,
) -> Result<(), TrainError> {
    if !(learning_rate > 0.0 && learning_rate.is_finite()) {
        return Err(TrainError::InvalidConfig(format!(
            "learning rate must be positive, got {learning_rate}"
        )));
    }
    if !model.params.same_shape(grad) || !model.params.same_shape(&opt.velocity) {
        return Err(TrainError::ShapeMismatch);
    }
    let (mu, wd) = (opt.momentum, opt.weight_decay);
    let p = &mut model.params;
    let v = &mut opt.velocity;
    sgd_update(&mut p.w1, &grad.w1, &mut v.w1, learning_rate, mu, wd);
    sgd_update(&mut p.b1, &grad.b1, &mut v.b1, learning_rate, mu, 0.0);
    sgd_update(&mut p.w2, &grad.w2, &mut v.w2, learning_rate, mu, wd);
    sgd_update(&mut p.b2, &grad.b2, &mut v.b2, learning_rate, mu, 0.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_step() {
        let mut w = [1.0];
        let mut v = [0.0];
        sgd_update(&mut w, &[2.0], &mut v, 0.1, 0.0, 0.0);
        assert_eq!(w, [0.8]);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut w = [0.3, -1.5];
        let mut v = [0.0, 0.0];
        sgd_update(&mut w, &[0.0, 0.0], &mut v, 0.1, 0.9, 0.0);
        assert_eq!(w, [0.3, -1.5]);
    }

    #[test]
    fn momentum_two_steps() {
        let mut w = [0.0];
        let mut v = [0.0];
        sgd_update(&mut w, &[1.0], &mut v, 0.1, 0.9, 0.0);
        assert!((w[0] + 0.1).abs() < 1e-12);
        sgd_update(&mut w, &[1.0], &mut v, 0.1, 0.9, 0.0);
        assert!((w[0] + 0.29).abs() < 1e-12);
        assert!((v[0] - 1.9).abs() < 1e-12);
    }

    #[test]
    fn decay_is_added_before_momentum() {
        let mut w = [2.0];
        let mut v = [0.0];
        sgd_update(&mut w, &[0.0], &mut v, 0.5, 0.9, 0.1);
        // g' = 0.2, v = 0.2, w = 2 - 0.1
        assert!((w[0] - 1.9).abs() < 1e-15);
    }

    #[test]
    fn biases_are_not_decayed() {
        let mut model = Model::zeros(1, 1, 1);
        model.params = Params {
            w1: vec![1.0],
            b1: vec![1.0],
            w2: vec![1.0],
            b2: vec![1.0],
        };
        let grad = Params::zeros_like(&model.params);
        let mut opt = OptimState::new(&model, 0.0, 0.5).unwrap();
        sgd_step(&mut model, &grad, 0.1, &mut opt).unwrap();
        assert_eq!(model.params.b1, vec![1.0]);
        assert_eq!(model.params.b2, vec![1.0]);
        assert!((model.params.w1[0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut model = Model::zeros(2, 2, 2);
        let grad = Params::zeros_like(&model.params);
        let mut opt = OptimState::new(&model, 0.9, 0.0).unwrap();
        assert!(sgd_step(&mut model, &grad, 0.0, &mut opt).is_err());
        assert!(sgd_step(&mut model, &grad, -0.1, &mut opt).is_err());
        let wrong = Params::zeros(3, 2, 2);
        assert!(matches!(
            sgd_step(&mut model, &wrong, 0.1, &mut opt),
            Err(TrainError::ShapeMismatch)
        ));
        assert!(OptimState::new(&model, 1.0, 0.0).is_err());
        assert!(OptimState::new(&model, 0.5, -1.0).is_err());
    }
}
