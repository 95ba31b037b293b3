//! Linear SVM trained by stochastic gradient descent on the hinge loss.
//!
//! Objective, with labels mapped to `y ∈ {-1, +1}`:
//!
//! ```text
//! (λ/2)·‖w‖² + (1/n)·Σ max(0, 1 − y·(w·x + b))
//! ```
//!
//! Each epoch visits the samples in an order drawn by shuffling `0..n` with a
//! ChaCha8 generator seeded once from `seed`. At global step `t` (counting
//! sample visits from 0) the step size is `η = eta0 / (1 + eta0·λ·t)` and
//!
//! ```text
//! margin < 1:  w ← (1 − ηλ)·w + η·y·x,   b ← b + η·y
//! otherwise:   w ← (1 − ηλ)·w
//! ```
//!
//! The bias is not regularized. Training stops after `max_epochs` or as soon
//! as an epoch lowers the objective by less than `tol`. If that last epoch
//! raised the objective, the model from the epoch before it is returned, so
//! the objective over the returned trajectory never increases.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::corpus::Label;
use crate::vectorspace::{SparseVector, VectorError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmHyper {
    /// L2 regularization strength.
    pub lambda: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub tol: f64,
    pub eta0: f64,
}

impl Default for SvmHyper {
    fn default() -> Self {
        SvmHyper {
            lambda: 0.001,
            max_epochs: 5,
            seed: 42,
            tol: 1e-6,
            eta0: 0.1,
        }
    }
}

impl SvmHyper {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |msg: String| Err(ClassifierError::BadHyperparameter(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return bad(format!("eta0 must be positive, got {}", self.eta0));
        }
        if self.eta0 * self.lambda >= 1.0 {
            return bad("eta0 * lambda must be below 1 for the weight decay to stay positive".into());
        }
        if !self.tol.is_finite() {
            return bad(format!("tol must be finite, got {}", self.tol));
        }
        Ok(())
    }

    pub fn learning_rate(&self, step: u64) -> f64 {
        self.eta0 / (1.0 + self.eta0 * self.lambda * step as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    weights: Vec<f64>,
    bias: f64,
    hyper: SvmHyper,
    /// Epochs executed, counting a final epoch that was rolled back.
    epochs_run: usize,
}

impl SvmModel {
    pub fn from_parts(
        weights: Vec<f64>,
        bias: f64,
        hyper: SvmHyper,
        epochs_run: usize,
    ) -> Result<Self, ClassifierError> {
        hyper.validate()?;
        if !bias.is_finite() || !weights.iter().all(|w| w.is_finite()) {
            return Err(ClassifierError::InvalidModel("non-finite svm parameter".into()));
        }
        Ok(SvmModel {
            weights,
            bias,
            hyper,
            epochs_run,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn hyper(&self) -> &SvmHyper {
        &self.hyper
    }

    pub fn epochs_run(&self) -> usize {
        self.epochs_run
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }
}

/// Per-epoch record of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmTrace {
    /// Objective after each accepted epoch; the model is the last of these.
    pub objective: Vec<f64>,
    /// Objective of a final epoch that was rolled back for raising it.
    pub discarded: Option<f64>,
}

fn sign(label: Label) -> f64 {
    match label {
        Label::NonBullying => -1.0,
        Label::Bullying => 1.0,
    }
}

/// Primal objective `(λ/2)‖w‖² + mean hinge`.
pub fn objective(weights: &[f64], bias: f64, lambda: f64, matrix: &[SparseVector], labels: &[Label]) -> f64 {
    let reg = 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>();
    let hinge: f64 = matrix
        .iter()
        .zip(labels)
        .map(|(x, &l)| {
            let f: f64 = x.entries().iter().map(|&(i, v)| v * weights[i]).sum::<f64>() + bias;
            (1.0 - sign(l) * f).max(0.0)
        })
        .sum();
    reg + hinge / matrix.len() as f64
}

pub fn train_svm_sgd(
    matrix: &[SparseVector],
    labels: &[Label],
    hyper: &SvmHyper,
) -> Result<SvmModel, ClassifierError> {
    train_svm_sgd_traced(matrix, labels, hyper).map(|(model, _)| model)
}

/// Like [`train_svm_sgd`], also returning the per-epoch objective.
pub fn train_svm_sgd_traced(
    matrix: &[SparseVector],
    labels: &[Label],
    hyper: &SvmHyper,
) -> Result<(SvmModel, SvmTrace), ClassifierError> {
    hyper.validate()?;
    let first = matrix.first().ok_or(ClassifierError::EmptyMatrix)?;
    if matrix.len() != labels.len() {
        return Err(ClassifierError::LengthMismatch {
            rows: matrix.len(),
            labels: labels.len(),
        });
    }
    let dimension = first.dimension();
    if let Some(row) = matrix.iter().find(|r| r.dimension() != dimension) {
        return Err(VectorError::DimensionMismatch {
            expected: dimension,
            actual: row.dimension(),
        }
        .into());
    }
    if !(labels.contains(&Label::NonBullying) && labels.contains(&Label::Bullying)) {
        return Err(ClassifierError::SingleClassCorpus);
    }

    // w = scale · v, so the per-step decay is O(1) instead of O(V).
    let mut v = vec![0.0f64; dimension];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut step: u64 = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = Vec::with_capacity(matrix.len());
    let mut trace = SvmTrace {
        objective: Vec::new(),
        discarded: None,
    };
    let mut epochs_run = 0;

    // (weights, bias, objective) after the latest accepted epoch
    let mut accepted: Option<(Vec<f64>, f64, f64)> = None;
    for _ in 0..hyper.max_epochs {
        order.clear();
        order.extend(0..matrix.len());
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &matrix[i];
            let y = sign(labels[i]);
            let eta = hyper.learning_rate(step);
            let dot: f64 = x.entries().iter().map(|&(j, xv)| xv * v[j]).sum();
            let margin = y * (scale * dot + bias);
            scale *= 1.0 - eta * hyper.lambda;
            if margin < 1.0 {
                let g = eta * y / scale;
                for &(j, xv) in x.entries() {
                    v[j] += g * xv;
                }
                bias += eta * y;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
            step += 1;
        }
        epochs_run += 1;

        let weights: Vec<f64> = v.iter().map(|w| w * scale).collect();
        let value = objective(&weights, bias, hyper.lambda, matrix, labels);
        if let Some((_, _, prev)) = &accepted {
            if prev - value < hyper.tol {
                if value > *prev {
                    trace.discarded = Some(value);
                } else {
                    trace.objective.push(value);
                    accepted = Some((weights, bias, value));
                }
                break;
            }
        }
        trace.objective.push(value);
        accepted = Some((weights, bias, value));
    }

    let (weights, bias, _) = accepted.expect("max_epochs >= 1");
    Ok((
        SvmModel {
            weights,
            bias,
            hyper: *hyper,
            epochs_run,
        },
        trace,
    ))
}

/// `w·x + b`.
pub fn decision_function(model: &SvmModel, vec: &SparseVector) -> Result<f64, VectorError> {
    Ok(vec.dot_dense(&model.weights)? + model.bias)
}

/// Positive margin means bullying; zero delivers.
pub fn decide(margin: f64) -> Label {
    if margin > 0.0 {
        Label::Bullying
    } else {
        Label::NonBullying
    }
}
