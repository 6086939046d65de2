//! CART trees, bagged forests and gradient-boosted trees.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear::{sigmoid, softplus};
use super::{FeatureSampling, ForestParams, GbtParams, LearnError, Prepared};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    /// Rows with `x[feature] <= threshold` go left.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub(crate) fn max_feature(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split {
                feature, left, right, ..
            } => (*feature).max(left.max_feature()).max(right.max_feature()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Binary Gini impurity on 0/1 targets.
    Gini,
    /// Sum of squared errors.
    Mse,
}

impl Criterion {
    /// Total impurity of a node from its count, sum and sum of squares.
    fn impurity(self, n: f64, s: f64, ss: f64) -> f64 {
        if n == 0.0 {
            return 0.0;
        }
        match self {
            Criterion::Gini => {
                let p = s / n;
                n * 2.0 * p * (1.0 - p)
            }
            Criterion::Mse => (ss - s * s / n).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub criterion: Criterion,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features examined at each split; `None` examines all of them.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    cfg: TreeConfig,
    /// Candidate features for this tree.
    features: Vec<usize>,
}

impl DecisionTree {
    /// Grows a tree on the given row indices (repeats allowed, as from a
    /// bootstrap sample).
    pub fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        rows: Vec<usize>,
        cfg: TreeConfig,
        rng: &mut ChaCha8Rng,
    ) -> DecisionTree {
        let d = x.first().map_or(0, Vec::len);
        Self::fit_with_features(x, y, rows, cfg, (0..d).collect(), rng)
    }

    fn fit_with_features(
        x: &[Vec<f64>],
        y: &[f64],
        rows: Vec<usize>,
        cfg: TreeConfig,
        features: Vec<usize>,
        rng: &mut ChaCha8Rng,
    ) -> DecisionTree {
        let b = Builder { x, y, cfg, features };
        DecisionTree {
            root: b.grow(rows, 0, rng),
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.root.predict(x)
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn grow(&self, rows: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> Node {
        let n = rows.len() as f64;
        let s: f64 = rows.iter().map(|&i| self.y[i]).sum();
        let ss: f64 = rows.iter().map(|&i| self.y[i] * self.y[i]).sum();
        let leaf = Node::Leaf {
            value: if rows.is_empty() { 0.0 } else { s / n },
            samples: rows.len(),
        };
        let impurity = self.cfg.criterion.impurity(n, s, ss);
        if depth >= self.cfg.max_depth || rows.len() < self.cfg.min_samples_split.max(2) || impurity <= 1e-12 {
            return leaf;
        }
        let candidates: Vec<usize> = match self.cfg.max_features {
            Some(k) if k < self.features.len() => sample(rng, self.features.len(), k)
                .into_iter()
                .map(|i| self.features[i])
                .collect(),
            _ => self.features.clone(),
        };
        let Some(best) = self.best_split(&rows, &candidates, impurity) else {
            return leaf;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x[i][best.feature] <= best.threshold);
        Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(left, depth + 1, rng)),
            right: Box::new(self.grow(right, depth + 1, rng)),
        }
    }

    fn best_split(&self, rows: &[usize], candidates: &[usize], parent: f64) -> Option<Split> {
        let n = rows.len() as f64;
        let total_s: f64 = rows.iter().map(|&i| self.y[i]).sum();
        let total_ss: f64 = rows.iter().map(|&i| self.y[i] * self.y[i]).sum();
        let mut best: Option<Split> = None;
        let mut sorted = rows.to_vec();
        for &f in candidates {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let (mut ls, mut lss) = (0.0, 0.0);
            for k in 0..sorted.len() - 1 {
                let yi = self.y[sorted[k]];
                ls += yi;
                lss += yi * yi;
                let (lo, hi) = (self.x[sorted[k]][f], self.x[sorted[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let nl = (k + 1) as f64;
                let child = self.cfg.criterion.impurity(nl, ls, lss)
                    + self.cfg.criterion.impurity(n - nl, total_s - ls, total_ss - lss);
                let gain = parent - child;
                if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(Split {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
}

impl Forest {
    /// Fraction of trees voting chatbot.
    pub fn vote_share(&self, z: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.predict(z) >= 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}

pub(crate) fn train_forest(p: &ForestParams, data: &Prepared, seed: u64) -> Result<Forest, LearnError> {
    if p.n_trees == 0 {
        return Err(LearnError::Hyperparameter("n_trees must be at least 1".into()));
    }
    let n = data.z.len();
    let d = data.z[0].len();
    let k = p.max_features.resolve(d);
    let trees = (0..p.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            let rows: Vec<usize> = if p.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let (features, per_node) = match p.feature_sampling {
                FeatureSampling::PerNode => ((0..d).collect(), Some(k)),
                FeatureSampling::PerTree => {
                    let mut f = sample(&mut rng, d, k).into_vec();
                    f.sort_unstable();
                    (f, None)
                }
            };
            let cfg = TreeConfig {
                criterion: Criterion::Gini,
                max_depth: p.max_depth,
                min_samples_split: p.min_samples_split,
                max_features: per_node,
            };
            DecisionTree::fit_with_features(&data.z, &data.y, rows, cfg, features, &mut rng)
        })
        .collect();
    Ok(Forest { trees })
}

/// Additive logit model: `base_score + shrinkage · Σ tree(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    pub base_score: f64,
    pub shrinkage: f64,
    pub trees: Vec<DecisionTree>,
}

impl Boosted {
    pub fn logit(&self, z: &[f64]) -> f64 {
        self.base_score + self.shrinkage * self.trees.iter().map(|t| t.predict(z)).sum::<f64>()
    }
}

/// Gradient boosting on the logistic loss: each round fits a regression tree
/// to the residuals `y − σ(F)` and adds it with shrinkage.
pub(crate) fn train_gbt(p: &GbtParams, data: &Prepared) -> Result<(Boosted, Vec<f64>), LearnError> {
    if !(p.shrinkage > 0.0 && p.shrinkage.is_finite()) {
        return Err(LearnError::Hyperparameter("shrinkage must be positive".into()));
    }
    let n = data.z.len();
    let prior = (data.y.iter().sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let base_score = (prior / (1.0 - prior)).ln();
    let mut f = vec![base_score; n];
    let cfg = TreeConfig {
        criterion: Criterion::Mse,
        max_depth: p.max_depth,
        min_samples_split: p.min_samples_split,
        max_features: None,
    };
    // unused: trees here see every feature and every row
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut trees = Vec::with_capacity(p.n_trees);
    let mut log = Vec::with_capacity(p.n_trees);
    for _ in 0..p.n_trees {
        let residual: Vec<f64> = f.iter().zip(&data.y).map(|(fi, yi)| yi - sigmoid(*fi)).collect();
        let tree = DecisionTree::fit(&data.z, &residual, (0..n).collect(), cfg, &mut rng);
        for (fi, z) in f.iter_mut().zip(&data.z) {
            *fi += p.shrinkage * tree.predict(z);
        }
        trees.push(tree);
        let loss = f.iter().zip(&data.y).map(|(fi, yi)| softplus(*fi) - yi * fi).sum::<f64>() / n as f64;
        log.push(loss);
    }
    Ok((
        Boosted {
            base_score,
            shrinkage: p.shrinkage,
            trees,
        },
        log,
    ))
}
