use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LearnError, LogregParams, Prepared, SvmParams};
use crate::linalg::dot;

/// Weights over standardized features plus a bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(d: usize) -> Self {
        LinearModel {
            weights: vec![0.0; d],
            bias: 0.0,
        }
    }

    pub fn score(&self, z: &[f64]) -> f64 {
        dot(&self.weights, z) + self.bias
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Mean log-loss of a linear model on 0/1 targets, plus `l2/2 · ‖w‖²`.
pub fn logistic_loss(m: &LinearModel, z: &[Vec<f64>], y: &[f64], l2: f64) -> f64 {
    let data: f64 = z
        .iter()
        .zip(y)
        .map(|(x, &t)| {
            let s = m.score(x);
            // -[t log σ(s) + (1-t) log(1-σ(s))]
            softplus(s) - t * s
        })
        .sum::<f64>()
        / z.len() as f64;
    data + 0.5 * l2 * dot(&m.weights, &m.weights)
}

/// `λ/2 · ‖w‖² + mean hinge loss` with ±1 targets derived from 0/1 `y`.
pub fn svm_objective(m: &LinearModel, z: &[Vec<f64>], y: &[f64], lambda: f64) -> f64 {
    let hinge: f64 = z
        .iter()
        .zip(y)
        .map(|(x, &t)| (1.0 - (2.0 * t - 1.0) * m.score(x)).max(0.0))
        .sum::<f64>()
        / z.len() as f64;
    0.5 * lambda * dot(&m.weights, &m.weights) + hinge
}

fn check_common(lr: f64, batch: usize) -> Result<(), LearnError> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(LearnError::Hyperparameter(format!("learning_rate must be positive, got {lr}")));
    }
    if batch == 0 {
        return Err(LearnError::Hyperparameter("batch_size must be at least 1".into()));
    }
    Ok(())
}

/// Mini-batch gradient descent on the log-loss.
pub(crate) fn train_logreg(
    p: &LogregParams,
    data: &Prepared,
    seed: u64,
) -> Result<(LinearModel, Vec<f64>), LearnError> {
    check_common(p.learning_rate, p.batch_size)?;
    let d = data.z[0].len();
    let n = data.z.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = LinearModel::zeros(d);
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = Vec::with_capacity(p.epochs);
    let mut grad = vec![0.0; d];
    for _ in 0..p.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(p.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for &i in batch {
                let err = sigmoid(m.score(&data.z[i])) - data.y[i];
                for (g, x) in grad.iter_mut().zip(&data.z[i]) {
                    *g += err * x;
                }
                grad_b += err;
            }
            let k = batch.len() as f64;
            for (w, g) in m.weights.iter_mut().zip(&grad) {
                *w -= p.learning_rate * (g / k + p.l2 * *w);
            }
            m.bias -= p.learning_rate * grad_b / k;
        }
        log.push(logistic_loss(&m, &data.z, &data.y, p.l2));
    }
    Ok((m, log))
}

/// Mini-batch subgradient descent on the L2-regularized hinge loss. Returns
/// the iterate with the lowest full objective seen at an epoch boundary,
/// starting from the zero vector.
pub(crate) fn train_svm(
    p: &SvmParams,
    data: &Prepared,
    seed: u64,
) -> Result<(LinearModel, Vec<f64>), LearnError> {
    check_common(p.learning_rate, p.batch_size)?;
    if p.lambda < 0.0 {
        return Err(LearnError::Hyperparameter("lambda must be non-negative".into()));
    }
    let d = data.z[0].len();
    let n = data.z.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = LinearModel::zeros(d);
    let mut best = m.clone();
    let mut best_obj = svm_objective(&m, &data.z, &data.y, p.lambda);
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = Vec::with_capacity(p.epochs);
    let mut grad = vec![0.0; d];
    for epoch in 0..p.epochs {
        let step = p.learning_rate / (1.0 + epoch as f64).sqrt();
        order.shuffle(&mut rng);
        for batch in order.chunks(p.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for &i in batch {
                let t = 2.0 * data.y[i] - 1.0;
                if t * m.score(&data.z[i]) < 1.0 {
                    for (g, x) in grad.iter_mut().zip(&data.z[i]) {
                        *g -= t * x;
                    }
                    grad_b -= t;
                }
            }
            let k = batch.len() as f64;
            for (w, g) in m.weights.iter_mut().zip(&grad) {
                *w -= step * (p.lambda * *w + g / k);
            }
            m.bias -= step * grad_b / k;
        }
        let obj = svm_objective(&m, &data.z, &data.y, p.lambda);
        log.push(obj);
        if obj < best_obj {
            best_obj = obj;
            best = m.clone();
        }
    }
    Ok((best, log))
}
