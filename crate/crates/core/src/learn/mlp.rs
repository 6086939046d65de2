//! Fully connected ReLU networks with a sigmoid output, trained with Adam.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::{sigmoid, softplus};
use super::{LearnError, MlpParams, Prepared};

/// `out = W x + b` with `weights` stored as `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    /// He-uniform initialization `U(±√(6/fan_in))`, zero bias.
    pub fn init(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> DenseLayer {
        let limit = (6.0 / fan_in.max(1) as f64).sqrt();
        DenseLayer {
            weights: (0..fan_out)
                .map(|_| (0..fan_in).map(|_| rng.random_range(-limit..limit)).collect())
                .collect(),
            bias: vec![0.0; fan_out],
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| crate::linalg::dot(w, x) + b)
            .collect()
    }

    fn n_params(&self) -> usize {
        self.bias.len() * (1 + self.weights.first().map_or(0, Vec::len))
    }
}

/// Hidden layers use ReLU; the last layer has a single unit passed through a
/// sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<DenseLayer>,
}

impl Network {
    pub fn new(input: usize, hidden: &[usize], rng: &mut ChaCha8Rng) -> Network {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Network {
            layers: sizes.windows(2).map(|w| DenseLayer::init(w[0], w[1], rng)).collect(),
        }
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.layers.first().and_then(|l| l.weights.first()).map(Vec::len)
    }

    /// Layer shapes chain together and end in a single output.
    pub fn is_consistent(&self) -> bool {
        let Some(mut width) = self.input_dim() else {
            return false;
        };
        for l in &self.layers {
            if l.weights.is_empty() || l.weights.len() != l.bias.len() || l.weights.iter().any(|r| r.len() != width) {
                return false;
            }
            width = l.weights.len();
        }
        width == 1
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(DenseLayer::n_params).sum()
    }

    /// Pre-activations of every layer.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        for (k, l) in self.layers.iter().enumerate() {
            let z = l.forward(&a);
            if k + 1 < self.layers.len() {
                a = z.iter().map(|v| v.max(0.0)).collect();
            }
            pre.push(z);
        }
        pre
    }

    /// Output logit.
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.forward(x).last().map_or(0.0, |z| z[0])
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Mean binary cross-entropy over `rows` and its gradient, flattened in
    /// layer order (each layer's weights row by row, then its bias).
    pub fn loss_and_gradient(&self, x: &[Vec<f64>], y: &[f64], rows: &[usize]) -> (f64, Vec<f64>) {
        let mut grads: Vec<DenseLayer> = self
            .layers
            .iter()
            .map(|l| DenseLayer {
                weights: vec![vec![0.0; l.weights[0].len()]; l.weights.len()],
                bias: vec![0.0; l.bias.len()],
            })
            .collect();
        let mut loss = 0.0;
        for &i in rows {
            let pre = self.forward(&x[i]);
            let s = pre.last().unwrap()[0];
            loss += softplus(s) - y[i] * s;
            let mut delta = vec![sigmoid(s) - y[i]];
            for k in (0..self.layers.len()).rev() {
                let input: Vec<f64> = if k == 0 {
                    x[i].clone()
                } else {
                    pre[k - 1].iter().map(|v| v.max(0.0)).collect()
                };
                let g = &mut grads[k];
                for (o, d) in delta.iter().enumerate() {
                    for (w, a) in g.weights[o].iter_mut().zip(&input) {
                        *w += d * a;
                    }
                    g.bias[o] += d;
                }
                if k > 0 {
                    let l = &self.layers[k];
                    delta = (0..input.len())
                        .map(|j| {
                            if pre[k - 1][j] > 0.0 {
                                delta.iter().enumerate().map(|(o, d)| d * l.weights[o][j]).sum()
                            } else {
                                0.0
                            }
                        })
                        .collect();
                }
            }
        }
        let n = rows.len().max(1) as f64;
        let flat = grads
            .iter()
            .flat_map(|g| g.weights.iter().flatten().chain(&g.bias).copied().collect::<Vec<_>>())
            .map(|v| v / n)
            .collect();
        (loss / n, flat)
    }

    /// Parameters flattened in the same order as [`Network::loss_and_gradient`].
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().flatten().chain(&l.bias).copied().collect::<Vec<_>>())
            .collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            for v in l.weights.iter_mut().flatten().chain(l.bias.iter_mut()) {
                *v = it.next().expect("flat parameter length");
            }
        }
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Adam {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

pub(crate) fn train_mlp(p: &MlpParams, data: &Prepared, seed: u64) -> Result<(Network, Vec<f64>), LearnError> {
    if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) {
        return Err(LearnError::Hyperparameter("learning_rate must be positive".into()));
    }
    if p.batch_size == 0 {
        return Err(LearnError::Hyperparameter("batch_size must be at least 1".into()));
    }
    if p.hidden.contains(&0) {
        return Err(LearnError::Hyperparameter("hidden layers must have at least one unit".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::new(data.z[0].len(), &p.hidden, &mut rng);
    let mut params = net.flat_params();
    let mut adam = Adam::new(params.len());
    let n = data.z.len();
    let mut order: Vec<usize> = (0..n).collect();
    let all: Vec<usize> = (0..n).collect();
    let mut log = Vec::with_capacity(p.epochs);
    for _ in 0..p.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(p.batch_size) {
            let (_, grad) = net.loss_and_gradient(&data.z, &data.y, batch);
            adam.step(&mut params, &grad, p.learning_rate);
            net.set_flat_params(&params);
        }
        log.push(net.loss_and_gradient(&data.z, &data.y, &all).0);
    }
    Ok((net, log))
}
