//! Feature selection and reduction: PCA, binary LDA, permutation importance
//! and L1-regularized logistic regression.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::features::FeatureMatrix;
use crate::learn::{self, LearnError, TrainedModel};
use crate::linalg::{cholesky_solve, dot, symmetric_eigen, Standardizer};
use crate::seed::derive_seed;

pub const PROJECTION_SCHEMA_VERSION: u32 = 1;

/// Features kept by permutation importance.
pub const RF_TOP_K: usize = 15;

#[derive(Debug, thiserror::Error)]
pub enum SelectError {
    #[error("need at least {need} rows, have {have}")]
    TooFewRows { need: usize, have: usize },
    #[error("covariance is degenerate: every column is constant")]
    Degenerate,
    #[error("both classes are required")]
    SingleClass,
    #[error("variance target must lie in (0, 1], got {0}")]
    VarianceTarget(f64),
    #[error("component count must lie in 1..={max}, got {got}")]
    ComponentCount { got: usize, max: usize },
    #[error("projection schema does not match the matrix columns")]
    SchemaMismatch,
    #[error("trials must be at least 1")]
    Trials,
    #[error("lambda list must be non-increasing and non-negative (position {0})")]
    LambdaOrder(usize),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    None,
    Pca,
    Lda,
    Rf,
    Lasso,
}

impl SelectionMethod {
    pub const ALL: [SelectionMethod; 5] = [
        SelectionMethod::None,
        SelectionMethod::Pca,
        SelectionMethod::Lda,
        SelectionMethod::Rf,
        SelectionMethod::Lasso,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMethod::None => "none",
            SelectionMethod::Pca => "pca",
            SelectionMethod::Lda => "lda",
            SelectionMethod::Rf => "rf",
            SelectionMethod::Lasso => "lasso",
        }
    }
}

impl fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        SelectionMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown selection method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    Pca,
    Lda,
}

/// A fitted linear projection `((x − mean) / scale) · componentsᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub schema_version: u32,
    pub kind: ProjectionKind,
    pub feature_names: Vec<String>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// `k × d`, one component per row.
    pub components: Vec<Vec<f64>>,
    /// Variance captured by each component (PCA only).
    pub explained_variance: Option<Vec<f64>>,
    /// Total variance of the standardized data (PCA only).
    pub total_variance: Option<f64>,
    /// Between-class over within-class scatter along the component (LDA only).
    pub fisher_ratio: Option<f64>,
    /// LDA found no class separation.
    pub degenerate: bool,
}

impl Projection {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn output_names(&self) -> Vec<String> {
        let prefix = match self.kind {
            ProjectionKind::Pca => "pc",
            ProjectionKind::Lda => "ld",
        };
        (1..=self.components.len()).map(|i| format!("{prefix}{i}")).collect()
    }

    pub fn standardizer(&self) -> Standardizer {
        Standardizer {
            mean: self.mean.clone(),
            scale: self.scale.clone(),
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        let z = self.standardizer().transform_row(row);
        self.components.iter().map(|c| dot(c, &z)).collect()
    }

    /// Projects every row; labels and ids carry over.
    pub fn transform(&self, m: &FeatureMatrix) -> Result<FeatureMatrix, SelectError> {
        if m.feature_names != self.feature_names {
            return Err(SelectError::SchemaMismatch);
        }
        let s = self.standardizer();
        let rows = m
            .rows
            .iter()
            .map(|r| {
                let z = s.transform_row(r);
                self.components.iter().map(|c| dot(c, &z)).collect()
            })
            .collect();
        Ok(FeatureMatrix::new(self.output_names(), rows, m.labels.clone(), m.ids.clone()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("projection serializes")
    }
}

fn need_rows(m: &FeatureMatrix, need: usize) -> Result<(), SelectError> {
    if m.n_rows() < need {
        return Err(SelectError::TooFewRows {
            need,
            have: m.n_rows(),
        });
    }
    Ok(())
}

/// Covariance (population normalization) of already-centred rows.
fn covariance(z: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = z.first().map_or(0, Vec::len);
    let mut c = vec![vec![0.0; d]; d];
    for r in z {
        for i in 0..d {
            for j in i..d {
                c[i][j] += r[i] * r[j];
            }
        }
    }
    let n = z.len() as f64;
    for i in 0..d {
        for j in i..d {
            c[i][j] /= n;
            c[j][i] = c[i][j];
        }
    }
    c
}

enum ComponentRule {
    Variance(f64),
    Count(usize),
}

fn pca(m: &FeatureMatrix, rule: ComponentRule) -> Result<Projection, SelectError> {
    need_rows(m, 2)?;
    let s = Standardizer::fit(&m.rows);
    let z = s.transform(&m.rows);
    let cov = covariance(&z);
    let total: f64 = (0..cov.len()).map(|i| cov[i][i]).sum();
    if total <= 1e-12 {
        return Err(SelectError::Degenerate);
    }
    let eig = symmetric_eigen(&cov);
    let values: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let d = values.len();
    let k = match rule {
        ComponentRule::Count(k) => {
            if k == 0 || k > d {
                return Err(SelectError::ComponentCount { got: k, max: d });
            }
            k
        }
        ComponentRule::Variance(target) => {
            if !(target > 0.0 && target <= 1.0) {
                return Err(SelectError::VarianceTarget(target));
            }
            let mut acc = 0.0;
            let mut k = d;
            for (i, v) in values.iter().enumerate() {
                acc += v;
                if acc / total >= target - 1e-12 {
                    k = i + 1;
                    break;
                }
            }
            k
        }
    };
    Ok(Projection {
        schema_version: PROJECTION_SCHEMA_VERSION,
        kind: ProjectionKind::Pca,
        feature_names: m.feature_names.clone(),
        mean: s.mean,
        scale: s.scale,
        components: eig.vectors.into_iter().take(k).collect(),
        explained_variance: Some(values.into_iter().take(k).collect()),
        total_variance: Some(total),
        fisher_ratio: None,
        degenerate: false,
    })
}

/// PCA on standardized columns keeping the fewest components whose
/// cumulative variance reaches `variance_target`.
pub fn pca_fit(m: &FeatureMatrix, variance_target: f64) -> Result<Projection, SelectError> {
    pca(m, ComponentRule::Variance(variance_target))
}

/// PCA keeping exactly `k` components.
pub fn pca_fit_components(m: &FeatureMatrix, k: usize) -> Result<Projection, SelectError> {
    pca(m, ComponentRule::Count(k))
}

pub fn pca_transform(p: &Projection, m: &FeatureMatrix) -> Result<FeatureMatrix, SelectError> {
    p.transform(m)
}

/// Fisher discriminant for two classes on standardized columns. The
/// within-class scatter gets a ridge of `1e-6 · trace / d`.
pub fn lda_fit(m: &FeatureMatrix) -> Result<Projection, SelectError> {
    need_rows(m, 2)?;
    let s = Standardizer::fit(&m.rows);
    let z = s.transform(&m.rows);
    let d = m.n_cols();
    let mut means = [vec![0.0; d], vec![0.0; d]];
    let mut counts = [0usize; 2];
    for (r, l) in z.iter().zip(&m.labels) {
        let c = *l as usize;
        counts[c] += 1;
        for (acc, x) in means[c].iter_mut().zip(r) {
            *acc += x;
        }
    }
    if counts.contains(&0) {
        return Err(SelectError::SingleClass);
    }
    for c in 0..2 {
        means[c].iter_mut().for_each(|x| *x /= counts[c] as f64);
    }
    let centred: Vec<Vec<f64>> = z
        .iter()
        .zip(&m.labels)
        .map(|(r, l)| r.iter().zip(&means[*l as usize]).map(|(x, mu)| x - mu).collect())
        .collect();
    let mut sw = covariance(&centred);
    let trace: f64 = (0..d).map(|i| sw[i][i]).sum();
    let eps = (1e-6 * trace / d as f64).max(1e-12);
    for (i, row) in sw.iter_mut().enumerate() {
        row[i] += eps;
    }
    let diff: Vec<f64> = means[1].iter().zip(&means[0]).map(|(a, b)| a - b).collect();
    let w = cholesky_solve(&sw, &diff).ok_or(SelectError::Degenerate)?;
    let norm = dot(&w, &w).sqrt();
    let separation = dot(&diff, &diff).sqrt();
    let (component, fisher, degenerate) = if norm < 1e-12 || separation < 1e-9 {
        (vec![0.0; d], 0.0, true)
    } else {
        let u: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let between = dot(&u, &diff).powi(2);
        let within: f64 = (0..d).map(|i| u[i] * dot(&sw[i], &u)).sum();
        (u, between / within, false)
    };
    Ok(Projection {
        schema_version: PROJECTION_SCHEMA_VERSION,
        kind: ProjectionKind::Lda,
        feature_names: m.feature_names.clone(),
        mean: s.mean,
        scale: s.scale,
        components: vec![component],
        explained_variance: None,
        total_variance: None,
        fisher_ratio: Some(fisher),
        degenerate,
    })
}

pub fn lda_transform(p: &Projection, m: &FeatureMatrix) -> Result<FeatureMatrix, SelectError> {
    p.transform(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub method: SelectionMethod,
    /// Surviving feature names; empty for projections.
    pub kept: Vec<String>,
    /// Importance or coefficient per feature. Ranked for `rf`, schema order
    /// for `lasso`.
    pub scores: Vec<FeatureScore>,
    pub baseline_accuracy: Option<f64>,
    pub lambda: Option<f64>,
    pub projection: Option<Projection>,
}

impl SelectionReport {
    pub fn none(m: &FeatureMatrix) -> SelectionReport {
        SelectionReport {
            method: SelectionMethod::None,
            kept: m.feature_names.clone(),
            scores: Vec::new(),
            baseline_accuracy: None,
            lambda: None,
            projection: None,
        }
    }

    pub fn from_projection(p: Projection) -> SelectionReport {
        let method = match p.kind {
            ProjectionKind::Pca => SelectionMethod::Pca,
            ProjectionKind::Lda => SelectionMethod::Lda,
        };
        SelectionReport {
            method,
            kept: Vec::new(),
            scores: Vec::new(),
            baseline_accuracy: None,
            lambda: None,
            projection: Some(p),
        }
    }

    /// Reduces a matrix the way this report prescribes.
    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix, SelectError> {
        match &self.projection {
            Some(p) => p.transform(m),
            None => m.select_columns(&self.kept).ok_or(SelectError::SchemaMismatch),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn accuracy(model: &TrainedModel, rows: &[Vec<f64>], labels: &[Label]) -> Result<f64, LearnError> {
    let mut correct = 0usize;
    for (r, l) in rows.iter().zip(labels) {
        if model.label_for(model.score_row(r)?) == *l {
            correct += 1;
        }
    }
    Ok(correct as f64 / rows.len() as f64)
}

/// Permutation importance on held-out rows: baseline accuracy minus the mean
/// accuracy after shuffling one column, over `trials` shuffles. Every
/// (feature, trial) pair has its own seed, so results do not depend on
/// scheduling.
pub fn rf_importance(
    model: &TrainedModel,
    heldout: &FeatureMatrix,
    trials: usize,
    seed: u64,
) -> Result<SelectionReport, SelectError> {
    if trials < 1 {
        return Err(SelectError::Trials);
    }
    model.check_schema(&heldout.feature_names)?;
    if heldout.n_rows() == 0 {
        return Err(LearnError::EmptyTest.into());
    }
    let baseline = accuracy(model, &heldout.rows, &heldout.labels)?;
    let importances: Vec<f64> = (0..heldout.n_cols())
        .into_par_iter()
        .map(|j| -> Result<f64, LearnError> {
            let mut rows = heldout.rows.clone();
            let mut column = heldout.column(j);
            let mut total = 0.0;
            for t in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(seed, j as u64), t as u64));
                column.shuffle(&mut rng);
                for (r, v) in rows.iter_mut().zip(&column) {
                    r[j] = *v;
                }
                total += accuracy(model, &rows, &heldout.labels)?;
            }
            Ok(baseline - total / trials as f64)
        })
        .collect::<Result<_, _>>()?;
    let mut order: Vec<usize> = (0..importances.len()).collect();
    order.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
    let scores: Vec<FeatureScore> = order
        .iter()
        .map(|&j| FeatureScore {
            feature: heldout.feature_names[j].clone(),
            score: importances[j],
        })
        .collect();
    Ok(SelectionReport {
        method: SelectionMethod::Rf,
        kept: scores.iter().take(RF_TOP_K).map(|s| s.feature.clone()).collect(),
        scores,
        baseline_accuracy: Some(baseline),
        lambda: None,
        projection: None,
    })
}

/// Coefficients along a regularization path, in standardized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPath {
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub lambdas: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
}

impl LassoPath {
    pub fn nonzero_counts(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .map(|c| c.iter().filter(|w| **w != 0.0).count())
            .collect()
    }
}

struct LassoProblem {
    z: Vec<Vec<f64>>,
    /// Column-major copy of `z`.
    cols: Vec<Vec<f64>>,
    /// ±1 targets.
    t: Vec<f64>,
}

impl LassoProblem {
    fn new(z: Vec<Vec<f64>>, labels: &[Label]) -> LassoProblem {
        let d = z.first().map_or(0, Vec::len);
        let cols = (0..d).map(|j| z.iter().map(|r| r[j]).collect()).collect();
        LassoProblem {
            z,
            cols,
            t: labels.iter().map(|l| l.as_signed()).collect(),
        }
    }

    /// Mean logistic loss gradient with respect to `(w, b)`.
    fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let mut gw = vec![0.0; w.len()];
        let mut gb = 0.0;
        for (x, t) in self.z.iter().zip(&self.t) {
            // d/ds log(1 + e^{-ts}) = −t σ(−ts)
            let g = -t * sigmoid(-t * (dot(w, x) + b));
            for (a, xi) in gw.iter_mut().zip(x) {
                *a += g * xi;
            }
            gb += g;
        }
        let n = self.z.len() as f64;
        gw.iter_mut().for_each(|a| *a /= n);
        (gw, gb / n)
    }

    fn scores(&self, w: &[f64], b: f64) -> Vec<f64> {
        self.z.iter().map(|x| dot(w, x) + b).collect()
    }

    fn objective(&self, w: &[f64], b: f64, lambda: f64) -> f64 {
        let loss: f64 = self
            .scores(w, b)
            .iter()
            .zip(&self.t)
            .map(|(s, t)| softplus(-t * s))
            .sum();
        loss / self.t.len() as f64 + lambda * w.iter().map(|x| x.abs()).sum::<f64>()
    }

    /// Proximal Newton: each outer step minimizes the L1-penalized quadratic
    /// model of the loss by cyclic coordinate descent, then backtracks until
    /// the objective does not increase. Starts from `(w, b)`.
    fn solve(&self, lambda: f64, mut w: Vec<f64>, mut b: f64) -> (Vec<f64>, f64) {
        let n = self.t.len() as f64;
        let y: Vec<f64> = self.t.iter().map(|t| (t + 1.0) / 2.0).collect();
        let mut obj = self.objective(&w, b, lambda);
        for _ in 0..LASSO_MAX_NEWTON {
            let s = self.scores(&w, b);
            let p: Vec<f64> = s.iter().map(|&x| sigmoid(x)).collect();
            let v: Vec<f64> = p.iter().map(|p| (p * (1.0 - p)).max(1e-10)).collect();
            // residual of the quadratic model: working response minus its fit
            let mut r: Vec<f64> = y.iter().zip(&p).zip(&v).map(|((y, p), v)| (y - p) / v).collect();
            let denom: Vec<f64> = self
                .cols
                .iter()
                .map(|c| c.iter().zip(&v).map(|(x, v)| v * x * x).sum::<f64>() / n)
                .collect();
            let vsum: f64 = v.iter().sum();
            let (mut nw, mut nb) = (w.clone(), b);
            for _ in 0..LASSO_MAX_SWEEPS {
                let mut biggest = 0.0f64;
                for (j, col) in self.cols.iter().enumerate() {
                    if denom[j] <= 0.0 {
                        continue;
                    }
                    let g = col.iter().zip(&v).zip(&r).map(|((x, v), r)| v * x * r).sum::<f64>() / n;
                    let new = soft_threshold(g + denom[j] * nw[j], lambda) / denom[j];
                    let delta = new - nw[j];
                    if delta != 0.0 {
                        for (ri, x) in r.iter_mut().zip(col) {
                            *ri -= delta * x;
                        }
                        nw[j] = new;
                        biggest = biggest.max(delta.abs() * denom[j].sqrt());
                    }
                }
                let db = v.iter().zip(&r).map(|(v, r)| v * r).sum::<f64>() / vsum;
                r.iter_mut().for_each(|ri| *ri -= db);
                nb += db;
                biggest = biggest.max(db.abs() * (vsum / n).sqrt());
                if biggest < LASSO_TOLERANCE * 1e-2 {
                    break;
                }
            }
            let dw: Vec<f64> = nw.iter().zip(&w).map(|(a, o)| a - o).collect();
            let db = nb - b;
            let mut step = 1.0;
            let (cw, cb, cobj) = loop {
                let cw: Vec<f64> = w.iter().zip(&dw).map(|(o, d)| o + step * d).collect();
                let cb = b + step * db;
                let cobj = self.objective(&cw, cb, lambda);
                if cobj <= obj || step < 1e-10 {
                    break (cw, cb, cobj);
                }
                step /= 2.0;
            };
            let moved = dw.iter().fold(db.abs(), |m, d| m.max(d.abs())) * step;
            if cobj <= obj {
                w = cw;
                b = cb;
                obj = cobj;
            }
            if moved < LASSO_TOLERANCE || self.kkt_residual(&w, b, lambda) < LASSO_TOLERANCE {
                break;
            }
        }
        (w, b)
    }

    /// Largest violation of the optimality conditions at `(w, b)`.
    fn kkt_residual(&self, w: &[f64], b: f64, lambda: f64) -> f64 {
        let (gw, gb) = self.gradient(w, b);
        gw.iter().zip(w).fold(gb.abs(), |m, (g, w)| {
            let v = if *w != 0.0 {
                (g + lambda * w.signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            };
            m.max(v)
        })
    }

    /// Smallest λ at which all coefficients are zero.
    fn lambda_max(&self) -> f64 {
        let n = self.t.len() as f64;
        let pos = self.t.iter().filter(|t| **t > 0.0).count() as f64;
        let p = (pos / n).clamp(1e-9, 1.0 - 1e-9);
        let b = (p / (1.0 - p)).ln();
        let (g, _) = self.gradient(&vec![0.0; self.z[0].len()], b);
        g.iter().fold(0.0, |a, x| a.max(x.abs()))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn soft_threshold(x: f64, k: f64) -> f64 {
    if x > k {
        x - k
    } else if x < -k {
        x + k
    } else {
        0.0
    }
}

fn check_lambdas(lambdas: &[f64]) -> Result<(), SelectError> {
    for (i, l) in lambdas.iter().enumerate() {
        if !(l.is_finite() && *l >= 0.0) || (i > 0 && *l > lambdas[i - 1]) {
            return Err(SelectError::LambdaOrder(i));
        }
    }
    Ok(())
}

fn validate_binary(m: &FeatureMatrix) -> Result<(), SelectError> {
    need_rows(m, 2)?;
    if !Label::ALL.iter().all(|l| m.labels.contains(l)) {
        return Err(SelectError::SingleClass);
    }
    Ok(())
}

/// Minimizes `mean log(1 + exp(−t(w·z + b))) + λ‖w‖₁` for each λ, with
/// `z` the standardized features and `t = ±1`. The intercept is not
/// penalized. Each solve warm-starts from the previous one.
pub fn lasso_path(m: &FeatureMatrix, lambdas: &[f64]) -> Result<LassoPath, SelectError> {
    check_lambdas(lambdas)?;
    validate_binary(m)?;
    let s = Standardizer::fit(&m.rows);
    let problem = LassoProblem::new(s.transform(&m.rows), &m.labels);
    Ok(run_path(&problem, m.feature_names.clone(), s, lambdas))
}

fn run_path(problem: &LassoProblem, feature_names: Vec<String>, standardizer: Standardizer, lambdas: &[f64]) -> LassoPath {
    let d = feature_names.len();
    let (mut w, mut b) = (vec![0.0; d], 0.0);
    let mut coefficients = Vec::with_capacity(lambdas.len());
    let mut intercepts = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        (w, b) = problem.solve(lambda, w, b);
        coefficients.push(w.clone());
        intercepts.push(b);
    }
    LassoPath {
        feature_names,
        standardizer,
        lambdas: lambdas.to_vec(),
        coefficients,
        intercepts,
    }
}

/// `n` log-spaced values from `max` down to `max · ratio`.
pub fn lambda_grid(max: f64, n: usize, ratio: f64) -> Vec<f64> {
    if n == 1 {
        return vec![max];
    }
    (0..n)
        .map(|i| max * ratio.powf(i as f64 / (n - 1) as f64))
        .collect()
}

pub const LASSO_GRID_SIZE: usize = 50;
pub const LASSO_GRID_RATIO: f64 = 1e-3;
/// Validation accuracy within this margin of the best counts as the plateau.
pub const LASSO_PLATEAU: f64 = 0.005;
/// Solver stops once the optimality residual or the step falls below this.
pub const LASSO_TOLERANCE: f64 = 1e-10;
const LASSO_MAX_NEWTON: usize = 200;
const LASSO_MAX_SWEEPS: usize = 2_000;

fn stratified_holdout(labels: &[Label], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for l in Label::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == l).collect();
        idx.shuffle(&mut rng);
        let k = ((idx.len() as f64 * fraction).round() as usize).clamp(1, idx.len().saturating_sub(1).max(1));
        val.extend_from_slice(&idx[k..]);
        train.extend_from_slice(&idx[..k]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

/// Picks a λ on a 50-point log grid and keeps the features with nonzero
/// coefficients.
///
/// With `target_nonzero`, the λ whose nonzero count is closest to the target
/// wins (larger λ on ties). Otherwise the path is fitted on an internal 80/20
/// split and the largest λ whose validation accuracy is within
/// [`LASSO_PLATEAU`] of the best is used, among the λ values that keep at
/// least one feature.
pub fn lasso_select(m: &FeatureMatrix, target_nonzero: Option<usize>, seed: u64) -> Result<SelectionReport, SelectError> {
    validate_binary(m)?;
    let s = Standardizer::fit(&m.rows);
    let full = LassoProblem::new(s.transform(&m.rows), &m.labels);
    let grid = lambda_grid(full.lambda_max(), LASSO_GRID_SIZE, LASSO_GRID_RATIO);
    let path = run_path(&full, m.feature_names.clone(), s, &grid);
    let pick = match target_nonzero {
        Some(target) => {
            let counts = path.nonzero_counts();
            let mut best = 0;
            for (i, c) in counts.iter().enumerate() {
                if c.abs_diff(target) < counts[best].abs_diff(target) {
                    best = i;
                }
            }
            best
        }
        None => {
            let (train_idx, val_idx) = stratified_holdout(&m.labels, 0.8, seed);
            let train = m.subset(&train_idx);
            let val = m.subset(&val_idx);
            validate_binary(&train)?;
            let ts = Standardizer::fit(&train.rows);
            let problem = LassoProblem::new(ts.transform(&train.rows), &train.labels);
            let sub = run_path(&problem, m.feature_names.clone(), ts.clone(), &grid);
            let zval = ts.transform(&val.rows);
            let accs: Vec<f64> = sub
                .coefficients
                .iter()
                .zip(&sub.intercepts)
                .map(|(w, b)| {
                    let correct = zval
                        .iter()
                        .zip(&val.labels)
                        .filter(|(z, l)| {
                            let pred = if dot(w, z) + b >= 0.0 { Label::Chatbot } else { Label::Human };
                            pred == **l
                        })
                        .count();
                    correct as f64 / val.n_rows().max(1) as f64
                })
                .collect();
            let counts = path.nonzero_counts();
            let usable = |i: usize| counts[i] > 0;
            let best = (0..accs.len()).filter(|&i| usable(i)).map(|i| accs[i]).fold(f64::MIN, f64::max);
            (0..accs.len())
                .find(|&i| usable(i) && accs[i] >= best - LASSO_PLATEAU)
                .ok_or(SelectError::Degenerate)?
        }
    };
    let coef = &path.coefficients[pick];
    Ok(SelectionReport {
        method: SelectionMethod::Lasso,
        kept: m
            .feature_names
            .iter()
            .zip(coef)
            .filter(|(_, w)| **w != 0.0)
            .map(|(n, _)| n.clone())
            .collect(),
        scores: m
            .feature_names
            .iter()
            .zip(coef)
            .map(|(n, w)| FeatureScore {
                feature: n.clone(),
                score: *w,
            })
            .collect(),
        baseline_accuracy: None,
        lambda: Some(path.lambdas[pick]),
        projection: None,
    })
}

/// Runs one selection method on a training matrix. `rf` trains a forest on
/// an internal 80/20 split and scores importance on the held-out part.
pub fn select(
    method: SelectionMethod,
    train: &FeatureMatrix,
    options: &SelectOptions,
) -> Result<SelectionReport, SelectError> {
    match method {
        SelectionMethod::None => Ok(SelectionReport::none(train)),
        SelectionMethod::Pca => {
            let p = match options.pca_components {
                Some(k) => pca_fit_components(train, k)?,
                None => pca_fit(train, options.variance_target)?,
            };
            Ok(SelectionReport::from_projection(p))
        }
        SelectionMethod::Lda => Ok(SelectionReport::from_projection(lda_fit(train)?)),
        SelectionMethod::Rf => {
            validate_binary(train)?;
            let (fit_idx, held_idx) = stratified_holdout(&train.labels, 0.8, options.seed);
            let spec = learn::ModelSpec::preset("random_forest", derive_seed(options.seed, 1)).expect("preset");
            let model = learn::train(&spec, &train.subset(&fit_idx))?;
            rf_importance(&model, &train.subset(&held_idx), options.trials, derive_seed(options.seed, 2))
        }
        SelectionMethod::Lasso => lasso_select(train, options.lasso_target, options.seed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectOptions {
    pub variance_target: f64,
    pub pca_components: Option<usize>,
    pub trials: usize,
    pub lasso_target: Option<usize>,
    pub seed: u64,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            variance_target: 0.95,
            pca_components: None,
            trials: 20,
            lasso_target: None,
            seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn line_in_3d_needs_one_component() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64, -3.0 * i as f64]).collect();
        let labels = vec![Label::Human; 10];
        let m = FeatureMatrix::from_rows(names(3), rows, labels);
        let p = pca_fit(&m, 0.95).unwrap();
        assert_eq!(p.n_components(), 1);
        let ev = p.explained_variance.as_ref().unwrap();
        assert!((ev[0] / p.total_variance.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_matrix_is_degenerate() {
        let m = FeatureMatrix::from_rows(names(2), vec![vec![1.0, 2.0]; 4], vec![Label::Human; 4]);
        assert!(matches!(pca_fit(&m, 0.95), Err(SelectError::Degenerate)));
    }

    #[test]
    fn projection_of_mean_is_zero() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 1.0], vec![0.0, 5.0], vec![4.0, 4.0]];
        let labels = vec![Label::Human, Label::Human, Label::Chatbot, Label::Chatbot];
        let m = FeatureMatrix::from_rows(names(2), rows, labels);
        let p = lda_fit(&m).unwrap();
        let z = p.transform_row(&p.mean.clone());
        assert!(z.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn identical_class_means_are_degenerate() {
        let rows = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let labels = vec![Label::Human, Label::Human, Label::Chatbot, Label::Chatbot];
        let p = lda_fit(&FeatureMatrix::from_rows(names(2), rows, labels)).unwrap();
        assert!(p.degenerate);
        assert!(p.fisher_ratio.unwrap().abs() < 1e-12);
    }

    #[test]
    fn lambda_order_checked() {
        assert!(check_lambdas(&[1.0, 0.5, 0.5, 0.0]).is_ok());
        assert!(matches!(check_lambdas(&[0.5, 1.0]), Err(SelectError::LambdaOrder(1))));
        assert!(check_lambdas(&[-1.0]).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = lambda_grid(2.0, 5, 1e-2);
        assert_eq!(g[0], 2.0);
        assert!((g[4] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn method_names_round_trip() {
        for m in SelectionMethod::ALL {
            assert_eq!(m.as_str().parse::<SelectionMethod>().unwrap(), m);
        }
        assert!("ica".parse::<SelectionMethod>().is_err());
    }
}
