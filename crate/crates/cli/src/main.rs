//! `paradetect`: experiment runner over the paradetect library.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use paradetect::ablate::{Phase, TargetClass};
use paradetect::corpus::CorpusFormat;
use paradetect::embed::EmbeddingMethod;
use paradetect::select::SelectionMethod;

use crate::config::{ExperimentConfig, Track};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "paradetect", version, about = "Detect chatbot-written paragraphs", propagate_version = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Experiment config (TOML or JSON); flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Lexicon directory replacing the bundled tables.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Debug, Args, Default)]
struct CorpusArgs {
    /// Paragraph corpus (JSONL or CSV).
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, value_parser = parse_from_str::<CorpusFormat>)]
    format: Option<CorpusFormat>,
    /// Keep pairs whose word totals differ by fewer than N words.
    #[arg(long, value_name = "N")]
    similar_length: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a corpus and write it back as normalized JSONL.
    Ingest(CorpusArgs),
    /// Per-class paragraph, word and character counts.
    Stats(CorpusArgs),
    /// Compute the 32 stylometric features.
    Extract {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Also write train and test feature files.
        #[arg(long)]
        split: bool,
        #[arg(long)]
        train_fraction: Option<f64>,
    },
    /// Pearson correlation between feature columns.
    Correlate {
        #[arg(long)]
        features: PathBuf,
    },
    /// Fit a feature selection or projection.
    Select {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_parser = parse_from_str::<SelectionMethod>)]
        method: Option<SelectionMethod>,
        #[arg(long)]
        variance_target: Option<f64>,
        #[arg(long)]
        components: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        lasso_target: Option<usize>,
    },
    /// Train a classifier on a feature file.
    Train {
        #[arg(long)]
        features: PathBuf,
        /// logreg, linear_svm, random_forest, gbt, mlp or dnn.
        #[arg(long)]
        model: Option<String>,
    },
    /// Evaluate a trained model on a feature file.
    Eval {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Build TF-IDF, CBOW, GloVe or loaded-vector document representations.
    Embed {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_parser = parse_from_str::<EmbeddingMethod>)]
        method: Option<EmbeddingMethod>,
        /// Word-vector file for `loaded`.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Perturb features and measure the accuracy response.
    Ablate {
        #[arg(long)]
        model_file: PathBuf,
        /// Test features.
        #[arg(long)]
        features: PathBuf,
        /// Training features; required with `--phase train-and-test`.
        #[arg(long)]
        train: Option<PathBuf>,
        /// Features to perturb (comma-separated); all when omitted.
        #[arg(long, value_delimiter = ',')]
        ablate: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        deltas: Option<Vec<f64>>,
        #[arg(long, value_parser = parse_from_str::<TargetClass>)]
        target_class: Option<TargetClass>,
        #[arg(long, value_enum)]
        phase: Option<PhaseArg>,
    },
    /// Scale one linear SVM weight and record accuracy.
    Sweep {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        feature: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        deltas: Option<Vec<f64>>,
    },
    /// Generate chatbot counterparts for the human paragraphs of a corpus.
    Generate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        model_name: Option<String>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long)]
        rate_limit: Option<u32>,
        #[arg(long)]
        max_retries: Option<u32>,
        #[arg(long)]
        api_key_env: Option<String>,
    },
    /// Split, extract, select, train and evaluate over a grid.
    Pipeline {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<SelectionMethod>)]
        selections: Option<Vec<SelectionMethod>>,
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        #[arg(long, value_enum)]
        track: Option<Track>,
        #[arg(long, value_parser = parse_from_str::<EmbeddingMethod>)]
        embedding: Option<EmbeddingMethod>,
        #[arg(long)]
        train_fraction: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum PhaseArg {
    TestOnly,
    TrainAndTest,
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

impl CorpusArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(p) = &self.corpus {
            c.corpus = Some(p.clone());
        }
        if self.format.is_some() {
            c.corpus_format = self.format;
        }
        if self.similar_length.is_some() {
            c.similar_length = self.similar_length;
        }
    }
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn set_opt<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        *slot = value.clone();
    }
}

/// Merges config file and flags into the effective config.
fn effective_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut c = match &cli.global.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let g = &cli.global;
    set(&mut c.seed, &g.seed);
    set(&mut c.out, &g.out);
    set_opt(&mut c.lexicon_dir, &g.lexicon);
    match &cli.command {
        Command::Ingest(a) | Command::Stats(a) => a.apply(&mut c),
        Command::Extract {
            corpus, train_fraction, ..
        } => {
            corpus.apply(&mut c);
            set(&mut c.split.train_fraction, train_fraction);
        }
        Command::Correlate { .. } | Command::Eval { .. } => {}
        Command::Select {
            method,
            variance_target,
            components,
            trials,
            lasso_target,
            ..
        } => {
            set(&mut c.selection, method);
            set(&mut c.select.variance_target, variance_target);
            set_opt(&mut c.select.pca_components, components);
            set(&mut c.select.trials, trials);
            set_opt(&mut c.select.lasso_target, lasso_target);
        }
        Command::Train { model, .. } => {
            if let Some(m) = model {
                c.model = m.clone();
                c.model_params = None;
            }
        }
        Command::Embed {
            corpus,
            method,
            vectors,
            dim,
            epochs,
        } => {
            corpus.apply(&mut c);
            set(&mut c.embedding.method, method);
            set_opt(&mut c.embedding.vectors, vectors);
            set(&mut c.embedding.cbow.dim, dim);
            set(&mut c.embedding.glove.dim, dim);
            set(&mut c.embedding.cbow.epochs, epochs);
            set(&mut c.embedding.glove.epochs, epochs);
        }
        Command::Ablate {
            ablate,
            deltas,
            target_class,
            phase,
            ..
        } => {
            set(&mut c.ablation.features, ablate);
            set(&mut c.ablation.deltas, deltas);
            set(&mut c.ablation.target_class, target_class);
            if let Some(p) = phase {
                c.ablation.phase = match p {
                    PhaseArg::TestOnly => Phase::TestOnly,
                    PhaseArg::TrainAndTest => Phase::TrainAndTest,
                };
            }
        }
        Command::Sweep { feature, deltas, .. } => {
            set_opt(&mut c.ablation.sweep_feature, feature);
            set_opt(&mut c.ablation.sweep_deltas, deltas);
        }
        Command::Generate {
            corpus,
            endpoint,
            model_name,
            cache_dir,
            rate_limit,
            max_retries,
            api_key_env,
        } => {
            corpus.apply(&mut c);
            let gc = &mut c.generation;
            set_opt(&mut gc.endpoint, endpoint);
            set_opt(&mut gc.model_name, model_name);
            set_opt(&mut gc.cache_dir, cache_dir);
            set(&mut gc.rate_limit, rate_limit);
            set(&mut gc.max_retries, max_retries);
            set(&mut gc.api_key_env, api_key_env);
        }
        Command::Pipeline {
            corpus,
            selections,
            models,
            track,
            embedding,
            train_fraction,
        } => {
            corpus.apply(&mut c);
            set(&mut c.selections, selections);
            set(&mut c.models, models);
            set(&mut c.track, track);
            set(&mut c.embedding.method, embedding);
            set(&mut c.split.train_fraction, train_fraction);
        }
    }
    Ok(c)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = effective_config(&cli)?;
    match cli.command {
        Command::Ingest(_) => commands::ingest(&cfg),
        Command::Stats(_) => commands::stats(&cfg),
        Command::Extract { split, .. } => commands::extract(&cfg, split),
        Command::Correlate { features } => commands::correlate(&cfg, &features),
        Command::Select { features, .. } => commands::select(&cfg, &features),
        Command::Train { features, .. } => commands::train(&cfg, &features),
        Command::Eval { model_file, features } => commands::eval(&cfg, &model_file, &features),
        Command::Embed { .. } => commands::embed(&cfg),
        Command::Ablate {
            model_file,
            features,
            train,
            ..
        } => commands::ablate(&cfg, &model_file, &features, train.as_deref()),
        Command::Sweep {
            model_file, features, ..
        } => commands::sweep(&cfg, &model_file, &features),
        Command::Generate { .. } => commands::generate(&cfg),
        Command::Pipeline { .. } => commands::pipeline(&cfg),
    }
}

fn usage_error(e: clap::Error) -> CliError {
    let rendered = e.render().to_string();
    let first = rendered.lines().next().unwrap_or("invalid arguments").trim();
    let first = first.strip_prefix("error: ").unwrap_or(first);
    CliError::usage(format!("{first}; usage: paradetect [OPTIONS] <COMMAND>, see `paradetect --help`"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {}", usage_error(e));
            return ExitCode::from(1);
        }
    };
    let level = if cli.global.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
