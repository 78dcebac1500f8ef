use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::optim::{gradient_descent, lbfgs, LbfgsSettings};
use super::{dot, hidden_layer_size, logit_cross_entropy, sigmoid, Prediction, Samples, TrainStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MlpOptimizer {
    Lbfgs,
    GradientDescent { learning_rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpConfig {
    /// Weight of `‖W‖²/2` over both weight layers (biases excluded),
    /// relative to the summed cross-entropy.
    pub l2_penalty: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub optimizer: MlpOptimizer,
    /// Overrides the `(dim + 1) / 3` hidden width.
    pub hidden_size: Option<usize>,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            l2_penalty: 1e-4,
            max_iterations: 200,
            tolerance: 1e-4,
            optimizer: MlpOptimizer::Lbfgs,
            hidden_size: None,
        }
    }
}

impl MlpConfig {
    pub fn hidden_for(&self, dim: usize) -> usize {
        self.hidden_size.unwrap_or_else(|| hidden_layer_size(dim, 1))
    }
}

/// ReLU hidden layer, sigmoid output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub dim: usize,
    pub hidden_size: usize,
    /// `hidden_size × dim`, row-major.
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
    pub seed: u64,
    pub config: MlpConfig,
    pub status: TrainStatus,
}

/// Number of trainable parameters for the flat layout
/// `[hidden_weights, hidden_bias, output_weights, output_bias]`.
pub fn parameter_count(dim: usize, hidden: usize) -> usize {
    hidden * dim + 2 * hidden + 1
}

/// Regularized mean cross-entropy of the network with flat parameters
/// `params`; writes the gradient into `grad`.
pub fn mlp_objective(
    params: &[f64],
    samples: &Samples,
    hidden: usize,
    l2_penalty: f64,
    grad: &mut [f64],
) -> f64 {
    let dim = samples.dim();
    let (w1, rest) = params.split_at(hidden * dim);
    let (b1, rest) = rest.split_at(hidden);
    let (w2, rest) = rest.split_at(hidden);
    let b2 = rest[0];

    grad.iter_mut().for_each(|g| *g = 0.0);
    let (gw1, grest) = grad.split_at_mut(hidden * dim);
    let (gb1, grest) = grest.split_at_mut(hidden);
    let (gw2, gb2) = grest.split_at_mut(hidden);

    let inv_n = 1.0 / samples.len() as f64;
    let mut act = vec![0.0; hidden];
    let mut loss = 0.0;
    for (x, y) in samples.rows() {
        for (j, a) in act.iter_mut().enumerate() {
            *a = (b1[j] + dot(&w1[j * dim..(j + 1) * dim], x)).max(0.0);
        }
        let z = b2 + dot(w2, &act);
        loss += logit_cross_entropy(z, y);
        let dz = (sigmoid(z) - if y { 1.0 } else { 0.0 }) * inv_n;
        gb2[0] += dz;
        for j in 0..hidden {
            gw2[j] += dz * act[j];
            if act[j] > 0.0 {
                let d = dz * w2[j];
                gb1[j] += d;
                for (g, xi) in gw1[j * dim..(j + 1) * dim].iter_mut().zip(x) {
                    *g += d * xi;
                }
            }
        }
    }
    loss *= inv_n;

    let mut penalty = 0.0;
    for (g, w) in gw1.iter_mut().zip(w1).chain(gw2.iter_mut().zip(w2)) {
        *g += l2_penalty * w;
        penalty += w * w;
    }
    loss + 0.5 * l2_penalty * penalty
}

/// Uniform Glorot-style initialization fully determined by `seed`.
pub fn initial_parameters(dim: usize, hidden: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Vec::with_capacity(parameter_count(dim, hidden));
    // ReLU layer uses the factor 6, the sigmoid output layer 2
    let hidden_bound = libm::sqrt(6.0 / (dim + hidden) as f64);
    let output_bound = libm::sqrt(2.0 / (hidden + 1) as f64);
    for _ in 0..hidden * dim + hidden {
        params.push(rng.random_range(-hidden_bound..hidden_bound));
    }
    for _ in 0..hidden + 1 {
        params.push(rng.random_range(-output_bound..output_bound));
    }
    params
}

pub fn train_mlp(samples: &Samples, config: &MlpConfig, seed: u64) -> Result<MlpModel> {
    samples.check_trainable()?;
    let dim = samples.dim();
    let hidden = config.hidden_for(dim);
    if hidden == 0 {
        return Err(Error::InvalidArgument("hidden layer must have at least one unit".into()));
    }
    let x0 = initial_parameters(dim, hidden, seed);
    let l2 = config.l2_penalty / samples.len() as f64;
    let objective = |p: &[f64], g: &mut [f64]| mlp_objective(p, samples, hidden, l2, g);
    let min = match config.optimizer {
        MlpOptimizer::Lbfgs => lbfgs(
            objective,
            x0,
            &LbfgsSettings {
                max_iterations: config.max_iterations,
                tolerance: config.tolerance,
                ..LbfgsSettings::default()
            },
        ),
        MlpOptimizer::GradientDescent { learning_rate } => gradient_descent(
            objective,
            x0,
            learning_rate,
            config.max_iterations,
            config.tolerance,
        ),
    };
    let mut p = min.params;
    let output_bias = p.pop().expect("non-empty parameter vector");
    let output_weights = p.split_off(hidden * dim + hidden);
    let hidden_bias = p.split_off(hidden * dim);
    Ok(MlpModel {
        dim,
        hidden_size: hidden,
        hidden_weights: p,
        hidden_bias,
        output_weights,
        output_bias,
        seed,
        config: *config,
        status: TrainStatus {
            converged: min.converged,
            iterations: min.iterations,
        },
    })
}

impl MlpModel {
    pub fn logit(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut z = self.output_bias;
        for j in 0..self.hidden_size {
            let row = &self.hidden_weights[j * self.dim..(j + 1) * self.dim];
            let a = (self.hidden_bias[j] + dot(row, x)).max(0.0);
            z += self.output_weights[j] * a;
        }
        Ok(z)
    }

    /// Label is positive iff the output logit is ≥ 0 (score ≥ 0.5).
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let z = self.logit(x)?;
        Ok(Prediction {
            label: z >= 0.0,
            score: sigmoid(z),
        })
    }
}

pub fn predict_mlp(model: &MlpModel, x: &[f64]) -> Result<Prediction> {
    model.predict(x)
}
