//! Experiment configuration. A file supplies the base values, command-line
//! flags override individual fields, and the merged result is written into
//! every output directory as `config.json`.

use std::path::{Path, PathBuf};

use paradetect::ablate::{Phase, TargetClass, DEFAULT_DELTAS};
use paradetect::corpus::{CorpusFormat, SplitSpec};
use paradetect::embed::{CbowParams, EmbeddingMethod, GloveParams, DEFAULT_MAX_VOCAB};
use paradetect::genclient::{DEFAULT_API_KEY_ENV, DEFAULT_TEMPLATE};
use paradetect::learn::ModelParams;
use paradetect::select::{SelectOptions, SelectionMethod};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Which representation feeds selection and the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    #[default]
    Stylometric,
    Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub method: EmbeddingMethod,
    pub max_vocab: usize,
    /// Word-vector file for the `loaded` method.
    pub vectors: Option<PathBuf>,
    pub cbow: CbowParams,
    pub glove: GloveParams,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            method: EmbeddingMethod::Tfidf,
            max_vocab: DEFAULT_MAX_VOCAB,
            vectors: None,
            cbow: CbowParams::default(),
            glove: GloveParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    /// Features to perturb; empty means every column.
    pub features: Vec<String>,
    pub deltas: Vec<f64>,
    pub target_class: TargetClass,
    pub phase: Phase,
    /// Feature whose SVM weight `sweep` scales.
    pub sweep_feature: Option<String>,
    pub sweep_deltas: Option<Vec<f64>>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            features: Vec::new(),
            deltas: DEFAULT_DELTAS.to_vec(),
            target_class: TargetClass::Chatbot,
            phase: Phase::TestOnly,
            sweep_feature: None,
            sweep_deltas: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub template: String,
    pub max_retries: u32,
    pub rate_limit: u32,
    pub cache_dir: Option<PathBuf>,
    pub max_tokens: Option<u32>,
    pub api_key_env: String,
    pub split_paragraphs: bool,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            endpoint: None,
            model_name: None,
            template: DEFAULT_TEMPLATE.to_string(),
            max_retries: 5,
            rate_limit: 60,
            cache_dir: None,
            max_tokens: None,
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            split_paragraphs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<CorpusFormat>,
    /// Directory of lexicon tables; the bundled lexicon when unset.
    pub lexicon_dir: Option<PathBuf>,
    /// Keep only pairs whose word totals differ by fewer than this many words.
    pub similar_length: Option<usize>,
    /// The split seed is always the master seed.
    pub split: SplitSpec,
    pub track: Track,
    pub selection: SelectionMethod,
    /// Selection methods of the `pipeline` grid.
    pub selections: Vec<SelectionMethod>,
    pub select: SelectOptions,
    pub embedding: EmbeddingConfig,
    /// Model preset for `train`.
    pub model: String,
    /// Explicit hyperparameters replacing the preset for `train`.
    pub model_params: Option<ModelParams>,
    /// Model presets of the `pipeline` grid.
    pub models: Vec<String>,
    pub ablation: AblationConfig,
    pub generation: GenerationConfig,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: None,
            corpus_format: None,
            lexicon_dir: None,
            similar_length: None,
            split: SplitSpec::default(),
            track: Track::Stylometric,
            selection: SelectionMethod::None,
            selections: SelectionMethod::ALL.to_vec(),
            select: SelectOptions::default(),
            embedding: EmbeddingConfig::default(),
            model: "logreg".into(),
            model_params: None,
            models: ["logreg", "linear_svm", "random_forest", "gbt", "mlp"]
                .map(String::from)
                .to_vec(),
            ablation: AblationConfig::default(),
            generation: GenerationConfig::default(),
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Reads TOML (`.toml`) or JSON (anything else).
    pub fn load(path: &Path) -> CliResult<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let parsed = if is_toml {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    /// Canonical JSON; the config hash is taken over these bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn select_options(&self) -> SelectOptions {
        SelectOptions {
            seed: self.seed,
            ..self.select.clone()
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            seed: self.seed,
            ..self.split
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let c = ExperimentConfig::default();
        let back: ExperimentConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn toml_partial() {
        let c: ExperimentConfig = toml::from_str("seed = 7\nselections = [\"pca\"]\n[split]\ntrain_fraction = 0.7\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.selections, vec![SelectionMethod::Pca]);
        assert_eq!(c.split.train_fraction, 0.7);
        assert_eq!(c.models.len(), 5);
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>("{\"sed\": 1}").is_err());
    }
}
