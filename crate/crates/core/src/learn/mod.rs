//! Classifier training, prediction and evaluation.
//!
//! Every model standardizes its inputs with train-set statistics, is trained
//! deterministically from its spec seed, and serializes as a versioned JSON
//! envelope. Class encoding is human = 0 (−1 for margin losses) and
//! chatbot = 1 (+1).

mod linear;
mod mlp;
mod tree;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::features::FeatureMatrix;
use crate::linalg::Standardizer;

pub use linear::{logistic_loss, svm_objective, LinearModel};
pub use mlp::{DenseLayer, Network};
pub use tree::{Boosted, Criterion, DecisionTree, Forest, Node, TreeConfig};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("training data is empty")]
    Empty,
    #[error("training data contains a single class ({0})")]
    SingleClass(Label),
    #[error("non-finite value at row {row}, column `{column}`")]
    NonFinite { row: usize, column: String },
    #[error("every feature column is constant")]
    ConstantFeatures,
    #[error("schema mismatch: missing {missing:?}, unexpected {unexpected:?}{}", if *.reordered { ", columns reordered" } else { "" })]
    SchemaMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
        reordered: bool,
    },
    #[error("row has {got} values, model expects {expected}")]
    RowLength { expected: usize, got: usize },
    #[error("cannot evaluate on an empty test set")]
    EmptyTest,
    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logreg,
    LinearSvm,
    RandomForest,
    Gbt,
    Mlp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::LinearSvm => "linear_svm",
            ModelKind::RandomForest => "random_forest",
            ModelKind::Gbt => "gbt",
            ModelKind::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogregParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
}

impl Default for LogregParams {
    fn default() -> Self {
        LogregParams {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 64,
            l2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// L2 regularization strength.
    pub lambda: f64,
    pub epochs: usize,
    /// Initial step; epoch `e` uses `learning_rate / sqrt(1 + e)`.
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-3,
            epochs: 200,
            learning_rate: 0.1,
            batch_size: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt().round() as usize).clamp(1, d.max(1)),
            MaxFeatures::All => d,
            MaxFeatures::Count(k) => k.clamp(1, d.max(1)),
        }
    }
}

/// Where the forest draws its random feature subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSampling {
    /// A fresh subset at every split.
    PerNode,
    /// One subset per tree, fixed for all of its splits.
    PerTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub feature_sampling: FeatureSampling,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 12,
            min_samples_split: 2,
            max_features: MaxFeatures::Sqrt,
            feature_sampling: FeatureSampling::PerNode,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
    pub min_samples_split: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_trees: 100,
            max_depth: 3,
            shrinkage: 0.1,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    /// Adam step size.
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: vec![64, 64],
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 32,
        }
    }
}

impl MlpParams {
    /// The deeper preset: four hidden layers of 128.
    pub fn dnn() -> Self {
        MlpParams {
            hidden: vec![128; 4],
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Logreg(LogregParams),
    LinearSvm(SvmParams),
    RandomForest(ForestParams),
    Gbt(GbtParams),
    Mlp(MlpParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Logreg(_) => ModelKind::Logreg,
            ModelParams::LinearSvm(_) => ModelKind::LinearSvm,
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
            ModelParams::Gbt(_) => ModelKind::Gbt,
            ModelParams::Mlp(_) => ModelKind::Mlp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub seed: u64,
    pub params: ModelParams,
}

impl ModelSpec {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        ModelSpec { seed, params }
    }

    /// Default spec for a named model: `logreg`, `linear_svm`,
    /// `random_forest`, `gbt`, `mlp` or `dnn`.
    pub fn preset(name: &str, seed: u64) -> Option<ModelSpec> {
        let params = match name {
            "logreg" => ModelParams::Logreg(LogregParams::default()),
            "linear_svm" | "svm" => ModelParams::LinearSvm(SvmParams::default()),
            "random_forest" | "rf" => ModelParams::RandomForest(ForestParams::default()),
            "gbt" | "xgboost" => ModelParams::Gbt(GbtParams::default()),
            "mlp" => ModelParams::Mlp(MlpParams::default()),
            "dnn" => ModelParams::Mlp(MlpParams::dnn()),
            _ => return None,
        };
        Some(ModelSpec { seed, params })
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
}

pub const PRESET_NAMES: [&str; 6] = ["logreg", "linear_svm", "random_forest", "gbt", "mlp", "dnn"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Parameters {
    Linear(LinearModel),
    Forest(Forest),
    Boosted(Boosted),
    Mlp(Network),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Training loss after each epoch (boosting round for GBT).
    pub epoch_losses: Vec<f64>,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub spec: ModelSpec,
    pub feature_schema: Vec<String>,
    pub standardizer: Standardizer,
    pub parameters: Parameters,
    pub metrics: TrainingLog,
}

/// Standardized training inputs shared by the trainers.
pub(crate) struct Prepared {
    pub z: Vec<Vec<f64>>,
    /// 0/1 targets.
    pub y: Vec<f64>,
}

fn validate(data: &FeatureMatrix) -> Result<(), LearnError> {
    if data.n_rows() == 0 {
        return Err(LearnError::Empty);
    }
    for (i, row) in data.rows.iter().enumerate() {
        if row.len() != data.n_cols() {
            return Err(LearnError::RowLength {
                expected: data.n_cols(),
                got: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(LearnError::NonFinite {
                row: i,
                column: data.feature_names[j].clone(),
            });
        }
    }
    let first = data.labels[0];
    if data.labels.iter().all(|&l| l == first) {
        return Err(LearnError::SingleClass(first));
    }
    let constant = (0..data.n_cols()).all(|j| data.rows.iter().all(|r| r[j] == data.rows[0][j]));
    if constant {
        return Err(LearnError::ConstantFeatures);
    }
    Ok(())
}

/// Trains a model of the kind described by `spec` on every row of `data`.
pub fn train(spec: &ModelSpec, data: &FeatureMatrix) -> Result<TrainedModel, LearnError> {
    validate(data)?;
    let standardizer = Standardizer::fit(&data.rows);
    let prepared = Prepared {
        z: standardizer.transform(&data.rows),
        y: data.labels.iter().map(|l| l.as_binary()).collect(),
    };
    let (parameters, epoch_losses) = match &spec.params {
        ModelParams::Logreg(p) => {
            let (m, log) = linear::train_logreg(p, &prepared, spec.seed)?;
            (Parameters::Linear(m), log)
        }
        ModelParams::LinearSvm(p) => {
            let (m, log) = linear::train_svm(p, &prepared, spec.seed)?;
            (Parameters::Linear(m), log)
        }
        ModelParams::RandomForest(p) => (
            Parameters::Forest(tree::train_forest(p, &prepared, spec.seed)?),
            Vec::new(),
        ),
        ModelParams::Gbt(p) => {
            let (m, log) = tree::train_gbt(p, &prepared)?;
            (Parameters::Boosted(m), log)
        }
        ModelParams::Mlp(p) => {
            let (m, log) = mlp::train_mlp(p, &prepared, spec.seed)?;
            (Parameters::Mlp(m), log)
        }
    };
    let mut model = TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        spec: spec.clone(),
        feature_schema: data.feature_names.clone(),
        standardizer,
        parameters,
        metrics: TrainingLog {
            epoch_losses,
            train_accuracy: 0.0,
        },
    };
    model.metrics.train_accuracy = evaluate(&model, data)?.accuracy;
    Ok(model)
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    /// Raw score for one row in raw feature space. Linear models return the
    /// margin `w·z + b`, GBT the logit, forests the chatbot vote share, MLPs
    /// the sigmoid output.
    pub fn score_row(&self, row: &[f64]) -> Result<f64, LearnError> {
        if row.len() != self.feature_schema.len() {
            return Err(LearnError::RowLength {
                expected: self.feature_schema.len(),
                got: row.len(),
            });
        }
        let z = self.standardizer.transform_row(row);
        Ok(match &self.parameters {
            Parameters::Linear(m) => m.score(&z),
            Parameters::Forest(f) => f.vote_share(&z),
            Parameters::Boosted(b) => b.logit(&z),
            Parameters::Mlp(n) => n.predict_proba(&z),
        })
    }

    /// Label for a score; scores exactly at the threshold go to chatbot.
    pub fn label_for(&self, score: f64) -> Label {
        let threshold = match self.parameters {
            Parameters::Linear(_) | Parameters::Boosted(_) => 0.0,
            Parameters::Forest(_) | Parameters::Mlp(_) => 0.5,
        };
        if score >= threshold {
            Label::Chatbot
        } else {
            Label::Human
        }
    }

    pub fn check_schema(&self, names: &[String]) -> Result<(), LearnError> {
        if names == self.feature_schema.as_slice() {
            return Ok(());
        }
        let missing: Vec<String> = self
            .feature_schema
            .iter()
            .filter(|n| !names.contains(n))
            .cloned()
            .collect();
        let unexpected: Vec<String> = names
            .iter()
            .filter(|n| !self.feature_schema.contains(n))
            .cloned()
            .collect();
        let reordered = missing.is_empty() && unexpected.is_empty();
        Err(LearnError::SchemaMismatch {
            missing,
            unexpected,
            reordered,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, LearnError> {
        let model: TrainedModel =
            serde_json::from_str(text).map_err(|e| LearnError::Format(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(LearnError::Format(format!(
                "unsupported format version {}",
                model.format_version
            )));
        }
        let d = model.feature_schema.len();
        if model.standardizer.mean.len() != d || model.standardizer.scale.len() != d {
            return Err(LearnError::Format("standardizer does not match schema".into()));
        }
        let consistent = match &model.parameters {
            Parameters::Linear(m) => m.weights.len() == d,
            Parameters::Forest(f) => f.trees.iter().all(|t| t.root.max_feature() < d),
            Parameters::Boosted(b) => b.trees.iter().all(|t| t.root.max_feature() < d),
            Parameters::Mlp(n) => n.input_dim() == Some(d) && n.is_consistent(),
        };
        if !consistent {
            return Err(LearnError::Format("parameters do not match schema".into()));
        }
        Ok(model)
    }
}

pub fn predict_score(model: &TrainedModel, rows: &FeatureMatrix) -> Result<Vec<f64>, LearnError> {
    model.check_schema(&rows.feature_names)?;
    rows.rows.iter().map(|r| model.score_row(r)).collect()
}

pub fn predict(model: &TrainedModel, rows: &FeatureMatrix) -> Result<Vec<Label>, LearnError> {
    Ok(predict_score(model, rows)?
        .into_iter()
        .map(|s| model.label_for(s))
        .collect())
}

/// Confusion counts with chatbot as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub confusion: Confusion,
    pub n: usize,
}

impl EvalReport {
    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Result<EvalReport, LearnError> {
        if truth.is_empty() {
            return Err(LearnError::EmptyTest);
        }
        let mut c = Confusion::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t, p) {
                (Label::Chatbot, Label::Chatbot) => c.tp += 1,
                (Label::Human, Label::Human) => c.tn += 1,
                (Label::Human, Label::Chatbot) => c.fp += 1,
                (Label::Chatbot, Label::Human) => c.fn_ += 1,
            }
        }
        Ok(EvalReport {
            accuracy: (c.tp + c.tn) as f64 / truth.len() as f64,
            confusion: c,
            n: truth.len(),
        })
    }
}

pub fn evaluate(model: &TrainedModel, test: &FeatureMatrix) -> Result<EvalReport, LearnError> {
    if test.n_rows() == 0 {
        return Err(LearnError::EmptyTest);
    }
    EvalReport::from_predictions(&test.labels, &predict(model, test)?)
}
