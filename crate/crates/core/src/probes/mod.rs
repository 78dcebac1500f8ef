//! Property detectors: logistic regression, a single-hidden-layer MLP and
//! the centroid nearest-neighbor baseline.

pub mod centroid;
pub mod logistic;
pub mod mlp;
pub mod optim;

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use centroid::{
    default_n_grid, fit_centroid, predict_centroid, sweep_from_ranks, sweep_n, CentroidModel,
    SweepPoint, SweepResult,
};
pub use logistic::{logistic_objective, predict_logistic, train_logistic, LogisticConfig, LogisticModel};
pub use mlp::{mlp_objective, predict_mlp, train_mlp, MlpConfig, MlpModel, MlpOptimizer};

/// Any trained detector.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeModel {
    Logistic(LogisticModel),
    Mlp(MlpModel),
    Centroid(CentroidModel),
}

impl ProbeModel {
    pub fn kind(&self) -> &'static str {
        match self {
            ProbeModel::Logistic(_) => "logistic",
            ProbeModel::Mlp(_) => "mlp",
            ProbeModel::Centroid(_) => "centroid",
        }
    }
}

/// Hidden-layer width: `(d_in + d_out) / 3`, rounded down, at least 1.
pub fn hidden_layer_size(d_in: usize, d_out: usize) -> usize {
    ((d_in + d_out) / 3).max(1)
}

/// Binary decision and the probability-like score behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: bool,
    pub score: f64,
}

/// Whether an optimizer reached its tolerance or ran out of iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainStatus {
    pub converged: bool,
    pub iterations: usize,
}

/// Row-major feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<bool>,
}

impl Samples {
    pub fn new(dim: usize) -> Self {
        Samples {
            dim,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, rows: usize) -> Self {
        Samples {
            dim,
            features: Vec::with_capacity(dim * rows),
            labels: Vec::with_capacity(rows),
        }
    }

    pub fn push(&mut self, row: &[f64], label: bool) -> Result<()> {
        self.check_dim(row.len())?;
        self.features.extend_from_slice(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn push_f32(&mut self, row: &[f32], label: bool) -> Result<()> {
        self.check_dim(row.len())?;
        self.features.extend(row.iter().map(|&v| v as f64));
        self.labels.push(label);
        Ok(())
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], bool)> + '_ {
        self.features
            .chunks_exact(self.dim.max(1))
            .zip(self.labels.iter().copied())
    }

    /// Checks the shared training preconditions: at least two rows and both
    /// classes present.
    pub(crate) fn check_trainable(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::EmptySet("training needs at least two samples"));
        }
        let positives = self.labels.iter().filter(|&&l| l).count();
        if positives == 0 || positives == self.len() {
            return Err(Error::SingleClass);
        }
        Ok(())
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of logit `z` against `label`, i.e.
/// `log(1 + e^z) - y z`, evaluated without overflow.
pub(crate) fn logit_cross_entropy(z: f64, label: bool) -> f64 {
    let softplus = if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    };
    if label {
        softplus - z
    } else {
        softplus
    }
}

/// Four independent accumulators so the loop vectorizes; the summation
/// order is fixed, keeping results deterministic.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hidden_layer_sizes() {
        assert_eq!(hidden_layer_size(300, 1), 100);
        assert_eq!(hidden_layer_size(30, 1), 10);
        assert_eq!(hidden_layer_size(2, 1), 1);
        assert_eq!(hidden_layer_size(1, 1), 1);
    }

    #[test]
    fn cross_entropy_is_stable() {
        assert!((logit_cross_entropy(0.0, true) - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(logit_cross_entropy(800.0, true) < 1e-300);
        assert!((logit_cross_entropy(800.0, false) - 800.0).abs() < 1e-9);
        assert!((sigmoid(-800.0)).abs() < 1e-300);
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn single_class_is_rejected() {
        let mut s = Samples::new(1);
        s.push(&[1.0], true).unwrap();
        s.push(&[2.0], true).unwrap();
        assert_eq!(s.check_trainable(), Err(Error::SingleClass));
        assert!(s.push(&[1.0, 2.0], false).is_err());
    }
}
