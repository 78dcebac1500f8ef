use alloc::vec;
use alloc::vec::Vec;

use super::optim::{lbfgs, LbfgsSettings};
use super::{dot, logit_cross_entropy, sigmoid, Prediction, Samples, TrainStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    /// Weight of `‖w‖²/2` added to the *summed* cross-entropy, so 1.0 is
    /// the conventional `C = 1` setting. The bias is not penalized.
    pub l2_penalty: f64,
    /// Largest absolute gradient component accepted as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2_penalty: 1.0,
            tolerance: 1e-4,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: LogisticConfig,
    pub status: TrainStatus,
}

/// Regularized mean cross-entropy at `params = [w.., b]`; writes the
/// gradient into `grad`.
pub fn logistic_objective(params: &[f64], samples: &Samples, l2_penalty: f64, grad: &mut [f64]) -> f64 {
    let dim = samples.dim();
    let (w, b) = (&params[..dim], params[dim]);
    grad.iter_mut().for_each(|g| *g = 0.0);
    let inv_n = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    for (x, y) in samples.rows() {
        let z = dot(w, x) + b;
        loss += logit_cross_entropy(z, y);
        let residual = (sigmoid(z) - if y { 1.0 } else { 0.0 }) * inv_n;
        for (g, xi) in grad[..dim].iter_mut().zip(x) {
            *g += residual * xi;
        }
        grad[dim] += residual;
    }
    loss *= inv_n;
    let mut penalty = 0.0;
    for (g, wi) in grad[..dim].iter_mut().zip(w) {
        *g += l2_penalty * wi;
        penalty += wi * wi;
    }
    loss + 0.5 * l2_penalty * penalty
}

/// Fits an L2-regularized logistic regression with L-BFGS from a zero start.
///
/// The optimizer works on the mean loss, `mean CE + (l2_penalty / n)‖w‖²/2`,
/// which has the same minimizer as the summed form.
pub fn train_logistic(samples: &Samples, config: &LogisticConfig) -> Result<LogisticModel> {
    samples.check_trainable()?;
    let dim = samples.dim();
    let l2 = config.l2_penalty / samples.len() as f64;
    let settings = LbfgsSettings {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        ..LbfgsSettings::default()
    };
    let min = lbfgs(
        |p, g| logistic_objective(p, samples, l2, g),
        vec![0.0; dim + 1],
        &settings,
    );
    let bias = min.params[dim];
    let mut weights = min.params;
    weights.truncate(dim);
    Ok(LogisticModel {
        weights,
        bias,
        config: *config,
        status: TrainStatus {
            converged: min.converged,
            iterations: min.iterations,
        },
    })
}

impl LogisticModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(dot(&self.weights, x) + self.bias)
    }

    /// `score = sigmoid(w·x + b)`; label is positive iff `w·x + b ≥ 0`,
    /// which is the same as `score ≥ 0.5`.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let z = self.decision(x)?;
        Ok(Prediction {
            label: z >= 0.0,
            score: sigmoid(z),
        })
    }
}

pub fn predict_logistic(model: &LogisticModel, x: &[f64]) -> Result<Prediction> {
    model.predict(x)
}
