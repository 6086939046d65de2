//! Feature perturbation and SVM weight sweeps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::features::FeatureMatrix;
use crate::learn::{self, EvalReport, LearnError, ModelKind, ModelSpec, Parameters, TrainedModel};

#[derive(Debug, thiserror::Error)]
pub enum AblateError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("delta must be finite and greater than -1, got {0}")]
    Delta(f64),
    #[error("weight sweeps need a linear_svm model, got {0:?}")]
    NotLinearSvm(ModelKind),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetClass {
    #[default]
    Chatbot,
    Human,
    Both,
}

impl TargetClass {
    pub fn includes(self, label: Label) -> bool {
        match self {
            TargetClass::Chatbot => label == Label::Chatbot,
            TargetClass::Human => label == Label::Human,
            TargetClass::Both => true,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TargetClass::Chatbot => "chatbot",
            TargetClass::Human => "human",
            TargetClass::Both => "both",
        }
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "chatbot" => Ok(TargetClass::Chatbot),
            "human" => Ok(TargetClass::Human),
            "both" => Ok(TargetClass::Both),
            _ => Err(format!("unknown target class `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    TestOnly,
    TrainAndTest,
}

/// Multiply one raw feature by `1 + delta` on rows of the target class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub feature: String,
    pub delta: f64,
    #[serde(default)]
    pub target_class: TargetClass,
    #[serde(default)]
    pub phase: Phase,
}

impl Perturbation {
    pub fn new(feature: impl Into<String>, delta: f64) -> Perturbation {
        Perturbation {
            feature: feature.into(),
            delta,
            target_class: TargetClass::Chatbot,
            phase: Phase::TestOnly,
        }
    }
}

fn check_delta(delta: f64) -> Result<(), AblateError> {
    if delta.is_finite() && delta > -1.0 {
        Ok(())
    } else {
        Err(AblateError::Delta(delta))
    }
}

/// Returns a perturbed copy; the input is untouched.
pub fn perturb(m: &FeatureMatrix, p: &Perturbation) -> Result<FeatureMatrix, AblateError> {
    check_delta(p.delta)?;
    let j = m
        .column_index(&p.feature)
        .ok_or_else(|| AblateError::UnknownFeature(p.feature.clone()))?;
    let mut out = m.clone();
    if p.delta != 0.0 {
        let factor = 1.0 + p.delta;
        for (row, label) in out.rows.iter_mut().zip(&m.labels) {
            if p.target_class.includes(*label) {
                row[j] *= factor;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub feature: String,
    /// One accuracy per entry of [`AblationReport::deltas`].
    pub accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub baseline_accuracy: f64,
    pub deltas: Vec<f64>,
    pub target_class: TargetClass,
    pub rows: Vec<AblationRow>,
}

/// Column header for a delta: `increase_10pct`, `decrease_5pct`,
/// `unchanged`.
pub fn delta_label(delta: f64) -> String {
    let pct = delta.abs() * 100.0;
    let pct = if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}")
    };
    if delta > 0.0 {
        format!("increase_{pct}pct")
    } else if delta < 0.0 {
        format!("decrease_{pct}pct")
    } else {
        "unchanged".into()
    }
}

impl AblationReport {
    /// CSV with `feature` then one column per delta; the first data row is
    /// the baseline.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["feature".to_string()];
        header.extend(self.deltas.iter().map(|d| delta_label(*d)));
        w.write_record(&header)?;
        let mut base = vec!["baseline".to_string()];
        base.extend(self.deltas.iter().map(|_| format!("{:.6}", self.baseline_accuracy)));
        w.write_record(&base)?;
        for r in &self.rows {
            let mut rec = vec![r.feature.clone()];
            rec.extend(r.accuracies.iter().map(|a| format!("{a:.6}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const DEFAULT_DELTAS: [f64; 2] = [0.10, -0.10];

fn accuracy(model: &TrainedModel, m: &FeatureMatrix) -> Result<f64, LearnError> {
    Ok(learn::evaluate(model, m)?.accuracy)
}

/// Test-time ablation: accuracy of an unchanged model on test data with one
/// feature perturbed, for every (feature, delta) cell.
pub fn ablation_eval(
    model: &TrainedModel,
    test: &FeatureMatrix,
    features: &[String],
    deltas: &[f64],
    target_class: TargetClass,
) -> Result<AblationReport, AblateError> {
    model.check_schema(&test.feature_names)?;
    for d in deltas {
        check_delta(*d)?;
    }
    for f in features {
        if test.column_index(f).is_none() {
            return Err(AblateError::UnknownFeature(f.clone()));
        }
    }
    let baseline_accuracy = accuracy(model, test)?;
    let rows = features
        .par_iter()
        .map(|f| -> Result<AblationRow, AblateError> {
            let accuracies = deltas
                .iter()
                .map(|&delta| {
                    let p = Perturbation {
                        feature: f.clone(),
                        delta,
                        target_class,
                        phase: Phase::TestOnly,
                    };
                    Ok(accuracy(model, &perturb(test, &p)?)?)
                })
                .collect::<Result<_, AblateError>>()?;
            Ok(AblationRow {
                feature: f.clone(),
                accuracies,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(AblationReport {
        baseline_accuracy,
        deltas: deltas.to_vec(),
        target_class,
        rows,
    })
}

/// Perturbs both partitions, retrains from `spec` (same seed) and evaluates
/// on the perturbed test split.
pub fn ablation_retrain(
    spec: &ModelSpec,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    p: &Perturbation,
) -> Result<EvalReport, AblateError> {
    let train = perturb(train, p)?;
    let test = perturb(test, p)?;
    let model = learn::train(spec, &train)?;
    Ok(learn::evaluate(&model, &test)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub accuracy: f64,
}

/// `−0.10, −0.09, …, +0.10`.
pub fn default_sweep_deltas() -> Vec<f64> {
    (-10..=10).map(|i| i as f64 / 100.0).collect()
}

/// Scales the SVM weight of one feature by `1 + delta` on a copy of the
/// model and records accuracy on the unmodified test set.
pub fn svm_weight_sweep(
    model: &TrainedModel,
    test: &FeatureMatrix,
    feature: &str,
    deltas: &[f64],
) -> Result<Vec<SweepPoint>, AblateError> {
    if model.kind() != ModelKind::LinearSvm {
        return Err(AblateError::NotLinearSvm(model.kind()));
    }
    model.check_schema(&test.feature_names)?;
    let j = model
        .feature_schema
        .iter()
        .position(|n| n == feature)
        .ok_or_else(|| AblateError::UnknownFeature(feature.to_string()))?;
    deltas
        .par_iter()
        .map(|&delta| {
            check_delta(delta)?;
            let mut m = model.clone();
            if let Parameters::Linear(l) = &mut m.parameters {
                l.weights[j] *= 1.0 + delta;
            }
            Ok(SweepPoint {
                delta,
                accuracy: accuracy(&m, test)?,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta", "accuracy"])?;
    for p in points {
        w.write_record([format!("{:.2}", p.delta), format!("{:.6}", p.accuracy)])?;
    }
    w.flush()?;
    Ok(())
}

/// Change in a linear model's score when raw feature `feature` of `row`
/// is multiplied by `1 + delta`: `w_f · x_f · delta / scale_f`.
pub fn linear_score_change(model: &TrainedModel, row: &[f64], feature: usize, delta: f64) -> Option<f64> {
    match &model.parameters {
        Parameters::Linear(l) => Some(l.weights[feature] * row[feature] * delta / model.standardizer.scale[feature]),
        _ => None,
    }
}
