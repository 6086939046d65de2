//! One function per subcommand. Each writes its outputs through a
//! [`Run`], which also persists the effective config and the manifest.

use std::path::Path;

use paradetect::ablate::{self, AblationReport, AblationRow, Perturbation, Phase};
use paradetect::corpus::{self, Corpus, CorpusFormat, Label};
use paradetect::embed::{self, EmbeddingMethod, VectorTable};
use paradetect::features::{self, FeatureMatrix};
use paradetect::genclient::{self, ChatClient, GenerationJob, PromptTemplate};
use paradetect::learn::{self, ModelSpec, TrainedModel, PRESET_NAMES};
use paradetect::lingua::{self, Lexicon};
use paradetect::select::{self, SelectionMethod};
use paradetect::derive_seed;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Track};
use crate::error::{Classify, CliError, CliResult};
use crate::manifest::Run;

/// Seed streams derived from the master seed.
const STREAM_EMBED: u64 = 0x454d_4245;
const STREAM_SELECT: u64 = 0x5345_4c00;
const STREAM_CELL: u64 = 0x4345_4c4c;

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf).runtime_err()?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s.into_bytes()
}

fn load_corpus(cfg: &ExperimentConfig, run: &mut Run) -> CliResult<Corpus> {
    let path = cfg
        .corpus
        .as_deref()
        .ok_or_else(|| CliError::usage("no corpus given; pass --corpus or set `corpus` in the config"))?;
    let format = match cfg.corpus_format.or_else(|| CorpusFormat::from_path(path)) {
        Some(f) => f,
        None => {
            return Err(CliError::usage(format!(
                "cannot infer the format of {}; pass --format jsonl or --format csv",
                path.display()
            )))
        }
    };
    run.read_input(path)?;
    let c = corpus::load_corpus(path, format).data_err()?;
    match cfg.similar_length {
        Some(t) => corpus::similar_length_subset(&c, t).data_err(),
        None => Ok(c),
    }
}

fn load_lexicon(cfg: &ExperimentConfig, run: &mut Run) -> CliResult<Lexicon> {
    match &cfg.lexicon_dir {
        Some(dir) => {
            let lex = lingua::load_lexicon(dir).data_err()?;
            run.note_input_dir(dir)?;
            Ok(lex)
        }
        None => Ok(Lexicon::bundled()),
    }
}

fn load_matrix(path: &Path, run: &mut Run) -> CliResult<FeatureMatrix> {
    let bytes = run.read_input(path)?;
    FeatureMatrix::read_csv(bytes.as_slice())
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path, run: &mut Run) -> CliResult<TrainedModel> {
    let text = run.read_input_string(path)?;
    TrainedModel::from_json(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn preset(name: &str, seed: u64) -> CliResult<ModelSpec> {
    ModelSpec::preset(name, seed).ok_or_else(|| {
        CliError::usage(format!("unknown model `{name}` (expected one of {})", PRESET_NAMES.join(", ")))
    })
}

fn matrix_csv(m: &FeatureMatrix) -> CliResult<Vec<u8>> {
    csv_bytes(|buf| m.write_csv(buf))
}

pub fn ingest(cfg: &ExperimentConfig) -> CliResult<()> {
    let mut run = Run::start("ingest", cfg)?;
    let c = load_corpus(cfg, &mut run)?;
    run.write("corpus.jsonl", c.to_jsonl().as_bytes())?;
    log::info!("{} records", c.len());
    run.finish()?;
    Ok(())
}

pub fn stats(cfg: &ExperimentConfig) -> CliResult<()> {
    let mut run = Run::start("stats", cfg)?;
    let c = load_corpus(cfg, &mut run)?;
    let s = corpus::corpus_stats(&c).data_err()?;
    let bytes = json_bytes(&s);
    print!("{}", String::from_utf8_lossy(&bytes));
    run.write("stats.json", &bytes)?;
    run.finish()?;
    Ok(())
}

pub fn extract(cfg: &ExperimentConfig, split: bool) -> CliResult<()> {
    let mut run = Run::start("extract", cfg)?;
    let c = load_corpus(cfg, &mut run)?;
    let lex = load_lexicon(cfg, &mut run)?;
    let m = features::feature_matrix(&c, &lex).data_err()?;
    run.write("features.csv", &matrix_csv(&m)?)?;
    if split {
        let (train, test) = corpus::split(&c, &cfg.split_spec()).data_err()?;
        let ids: std::collections::HashSet<&str> = train.iter().map(|r| r.id.as_str()).collect();
        let (tr, te): (Vec<usize>, Vec<usize>) = (0..m.n_rows()).partition(|&i| ids.contains(m.ids[i].as_str()));
        debug_assert_eq!(te.len(), test.len());
        run.write("train_features.csv", &matrix_csv(&m.subset(&tr))?)?;
        run.write("test_features.csv", &matrix_csv(&m.subset(&te))?)?;
    }
    run.finish()?;
    Ok(())
}

pub fn correlate(cfg: &ExperimentConfig, features_path: &Path) -> CliResult<()> {
    let mut run = Run::start("correlate", cfg)?;
    let m = load_matrix(features_path, &mut run)?;
    let r = features::correlation_matrix(&m).data_err()?;
    let bytes = csv_bytes(|buf| features::write_matrix_csv(&m.feature_names, &r, buf))?;
    run.write("correlation.csv", &bytes)?;
    run.finish()?;
    Ok(())
}

pub fn select(cfg: &ExperimentConfig, features_path: &Path) -> CliResult<()> {
    let mut run = Run::start("select", cfg)?;
    let m = load_matrix(features_path, &mut run)?;
    let report = select::select(cfg.selection, &m, &cfg.select_options()).data_err()?;
    let reduced = report.apply(&m).data_err()?;
    run.write("selection.json", &json_bytes(&report))?;
    run.write("selected.csv", &matrix_csv(&reduced)?)?;
    run.finish()?;
    Ok(())
}

fn model_spec(cfg: &ExperimentConfig) -> CliResult<ModelSpec> {
    match &cfg.model_params {
        Some(p) => Ok(ModelSpec::new(p.clone(), cfg.seed)),
        None => preset(&cfg.model, cfg.seed),
    }
}

pub fn train(cfg: &ExperimentConfig, features_path: &Path) -> CliResult<()> {
    let spec = model_spec(cfg)?;
    let mut run = Run::start("train", cfg)?;
    let m = load_matrix(features_path, &mut run)?;
    let model = learn::train(&spec, &m).data_err()?;
    log::info!("train accuracy {:.4}", model.metrics.train_accuracy);
    run.write("model.json", model.to_json().as_bytes())?;
    run.finish()?;
    Ok(())
}

pub fn eval(cfg: &ExperimentConfig, model_path: &Path, features_path: &Path) -> CliResult<()> {
    let mut run = Run::start("eval", cfg)?;
    let model = load_model(model_path, &mut run)?;
    let m = load_matrix(features_path, &mut run)?;
    let report = learn::evaluate(&model, &m).data_err()?;
    let scores = learn::predict_score(&model, &m).data_err()?;
    let bytes = csv_bytes(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["id", "label", "predicted", "score"])?;
        for ((id, label), s) in m.ids.iter().zip(&m.labels).zip(&scores) {
            w.write_record([
                id.as_str(),
                label.as_str(),
                model.label_for(*s).as_str(),
                &format!("{s:.6}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    println!("accuracy {:.6}", report.accuracy);
    run.write("eval.json", &json_bytes(&report))?;
    run.write("predictions.csv", &bytes)?;
    run.finish()?;
    Ok(())
}

/// Fitted embedding: a vocabulary or a word-vector table.
enum Embedder {
    Tfidf(embed::Vocabulary),
    Vectors(VectorTable),
}

impl Embedder {
    fn matrix(&self, c: &Corpus) -> FeatureMatrix {
        let docs = embed::corpus_tokens(c);
        let labels = c.iter().map(|r| r.label).collect();
        let ids = c.iter().map(|r| r.id.clone()).collect();
        match self {
            Embedder::Tfidf(v) => embed::tfidf_matrix(v, &docs, labels, ids),
            Embedder::Vectors(t) => embed::embed_matrix(t, &docs, labels, ids),
        }
    }
}

/// Fits the configured embedding on `c`. Returns per-epoch losses for the
/// trained methods.
fn fit_embedder(cfg: &ExperimentConfig, c: &Corpus, run: &mut Run) -> CliResult<(Embedder, Vec<f64>)> {
    let docs = embed::corpus_tokens(c);
    let e = &cfg.embedding;
    let seed = derive_seed(cfg.seed, STREAM_EMBED);
    match e.method {
        EmbeddingMethod::Tfidf => Ok((Embedder::Tfidf(embed::tfidf_fit(&docs, e.max_vocab).data_err()?), Vec::new())),
        EmbeddingMethod::Cbow => {
            let p = embed::CbowParams {
                seed,
                ..e.cbow.clone()
            };
            let t = embed::train_cbow(&docs, &p).data_err()?;
            Ok((Embedder::Vectors(t.table), t.epoch_losses))
        }
        EmbeddingMethod::Glove => {
            let x = embed::build_cooccurrence(&docs, e.glove.window).data_err()?;
            let p = embed::GloveParams {
                seed,
                ..e.glove.clone()
            };
            let t = embed::train_glove(&x, &p).data_err()?;
            Ok((Embedder::Vectors(t.table), t.epoch_losses))
        }
        EmbeddingMethod::Loaded => {
            let path = e
                .vectors
                .as_deref()
                .ok_or_else(|| CliError::usage("the loaded method needs --vectors or `embedding.vectors`"))?;
            let text = run.read_input_string(path)?;
            let t = embed::parse_vectors(&text).map_err(|err| CliError::data(format!("{}: {err}", path.display())))?;
            Ok((Embedder::Vectors(t), Vec::new()))
        }
    }
}

pub fn embed(cfg: &ExperimentConfig) -> CliResult<()> {
    let mut run = Run::start("embed", cfg)?;
    let c = load_corpus(cfg, &mut run)?;
    let (embedder, losses) = fit_embedder(cfg, &c, &mut run)?;
    run.write("embeddings.csv", &matrix_csv(&embedder.matrix(&c))?)?;
    if let Embedder::Vectors(t) = &embedder {
        if matches!(cfg.embedding.method, EmbeddingMethod::Cbow | EmbeddingMethod::Glove) {
            let mut buf = Vec::new();
            embed::write_vectors(t, &mut buf).runtime_err()?;
            run.write("vectors.txt", &buf)?;
            let bytes = csv_bytes(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["epoch", "loss"])?;
                for (i, l) in losses.iter().enumerate() {
                    w.write_record([(i + 1).to_string(), format!("{l:.6}")])?;
                }
                w.flush()?;
                Ok(())
            })?;
            run.write("losses.csv", &bytes)?;
        }
    }
    run.finish()?;
    Ok(())
}

pub fn ablate(cfg: &ExperimentConfig, model_path: &Path, test_path: &Path, train_path: Option<&Path>) -> CliResult<()> {
    let a = &cfg.ablation;
    let mut run = Run::start("ablate", cfg)?;
    let model = load_model(model_path, &mut run)?;
    let test = load_matrix(test_path, &mut run)?;
    let features = if a.features.is_empty() {
        test.feature_names.clone()
    } else {
        a.features.clone()
    };
    let report = match a.phase {
        Phase::TestOnly => ablate::ablation_eval(&model, &test, &features, &a.deltas, a.target_class).data_err()?,
        Phase::TrainAndTest => {
            let train_path =
                train_path.ok_or_else(|| CliError::usage("--phase train-and-test needs --train <features.csv>"))?;
            let train = load_matrix(train_path, &mut run)?;
            let baseline_accuracy = learn::evaluate(&model, &test).data_err()?.accuracy;
            let rows = features
                .par_iter()
                .map(|f| {
                    let accuracies = a
                        .deltas
                        .iter()
                        .map(|&delta| {
                            let p = Perturbation {
                                feature: f.clone(),
                                delta,
                                target_class: a.target_class,
                                phase: Phase::TrainAndTest,
                            };
                            ablate::ablation_retrain(&model.spec, &train, &test, &p).map(|r| r.accuracy)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(AblationRow {
                        feature: f.clone(),
                        accuracies,
                    })
                })
                .collect::<Result<Vec<_>, ablate::AblateError>>()
                .data_err()?;
            AblationReport {
                baseline_accuracy,
                deltas: a.deltas.clone(),
                target_class: a.target_class,
                rows,
            }
        }
    };
    run.write("ablation.csv", &csv_bytes(|buf| report.write_csv(buf))?)?;
    run.write("ablation.json", report.to_json().as_bytes())?;
    run.finish()?;
    Ok(())
}

pub fn sweep(cfg: &ExperimentConfig, model_path: &Path, test_path: &Path) -> CliResult<()> {
    let a = &cfg.ablation;
    let feature = a
        .sweep_feature
        .as_deref()
        .ok_or_else(|| CliError::usage("no sweep feature; pass --feature or set `ablation.sweep_feature`"))?;
    let deltas = a.sweep_deltas.clone().unwrap_or_else(ablate::default_sweep_deltas);
    let mut run = Run::start("sweep", cfg)?;
    let model = load_model(model_path, &mut run)?;
    let test = load_matrix(test_path, &mut run)?;
    let points = ablate::svm_weight_sweep(&model, &test, feature, &deltas).data_err()?;
    run.write("sweep.csv", &csv_bytes(|buf| ablate::write_sweep_csv(&points, buf))?)?;
    run.finish()?;
    Ok(())
}

pub fn generate(cfg: &ExperimentConfig) -> CliResult<()> {
    let g = &cfg.generation;
    let endpoint = g
        .endpoint
        .clone()
        .ok_or_else(|| CliError::usage("no endpoint; pass --endpoint or set `generation.endpoint`"))?;
    let model_name = g
        .model_name
        .clone()
        .ok_or_else(|| CliError::usage("no model name; pass --model-name or set `generation.model_name`"))?;
    let template = PromptTemplate::new(&g.template).usage_err()?;
    let cache_dir = g.cache_dir.clone().unwrap_or_else(|| cfg.out.join("cache"));
    let mut run = Run::start("generate", cfg)?;
    let c = load_corpus(cfg, &mut run)?;
    let client = ChatClient::http();
    let mut out = Vec::new();
    for r in c.iter().filter(|r| r.label == Label::Human) {
        let job = GenerationJob {
            source: r.clone(),
            endpoint: endpoint.clone(),
            model_name: model_name.clone(),
            max_retries: g.max_retries,
            rate_limit: g.rate_limit,
            cache_dir: cache_dir.clone(),
            max_tokens: g.max_tokens,
            api_key_env: g.api_key_env.clone(),
        };
        let rec = client.generate(&job, &template).runtime_err()?;
        if g.split_paragraphs {
            out.extend(genclient::split_paragraphs(&rec));
        } else {
            out.push(rec);
        }
    }
    log::info!("generated {} records", out.len());
    let generated = Corpus::from_records(out, "generated").data_err()?;
    run.write("generated.jsonl", generated.to_jsonl().as_bytes())?;
    if let Ok(sub) = cache_dir.strip_prefix(&cfg.out) {
        run.record_existing(sub)?;
    }
    run.finish()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Cell {
    selection: SelectionMethod,
    model: String,
    seed: u64,
    n_features: usize,
    report: learn::EvalReport,
}

pub fn pipeline(cfg: &ExperimentConfig) -> CliResult<()> {
    if cfg.selections.is_empty() || cfg.models.is_empty() {
        return Err(CliError::usage("the grid needs at least one selection and one model"));
    }
    for m in &cfg.models {
        preset(m, 0)?;
    }
    let mut run = Run::start("pipeline", cfg)?;
    let c = load_corpus(cfg, &mut run)?;
    let (train_c, test_c) = corpus::split(&c, &cfg.split_spec()).data_err()?;
    log::info!("split {} train / {} test", train_c.len(), test_c.len());
    let (train, test) = match cfg.track {
        Track::Stylometric => {
            let lex = load_lexicon(cfg, &mut run)?;
            (
                features::feature_matrix(&train_c, &lex).data_err()?,
                features::feature_matrix(&test_c, &lex).data_err()?,
            )
        }
        Track::Embedding => {
            let (e, _) = fit_embedder(cfg, &train_c, &mut run)?;
            (e.matrix(&train_c), e.matrix(&test_c))
        }
    };

    let base = cfg.select_options();
    let reduced = cfg
        .selections
        .iter()
        .enumerate()
        .map(|(i, &method)| {
            let opts = select::SelectOptions {
                seed: derive_seed(base.seed, STREAM_SELECT + i as u64),
                ..base.clone()
            };
            log::info!("fitting selection {method}");
            let report = select::select(method, &train, &opts).data_err()?;
            let tr = report.apply(&train).data_err()?;
            let te = report.apply(&test).data_err()?;
            Ok((method, report, tr, te))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let grid: Vec<(usize, &str)> = (0..reduced.len())
        .flat_map(|s| cfg.models.iter().map(move |m| (s, m.as_str())))
        .collect();
    let cells = grid
        .par_iter()
        .enumerate()
        .map(|(k, &(s, name))| {
            let (method, _, tr, te) = &reduced[s];
            let seed = derive_seed(cfg.seed, STREAM_CELL + k as u64);
            let spec = preset(name, seed)?;
            let model = learn::train(&spec, tr).data_err()?;
            let report = learn::evaluate(&model, te).data_err()?;
            log::info!("{method} × {name}: {:.4}", report.accuracy);
            Ok(Cell {
                selection: *method,
                model: name.to_string(),
                seed,
                n_features: tr.n_cols(),
                report,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let bytes = csv_bytes(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["selection", "model", "accuracy"])?;
        for cell in &cells {
            w.write_record([
                cell.selection.as_str().to_string(),
                cell.model.clone(),
                format!("{:.6}", cell.report.accuracy),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    run.write("accuracy.csv", &bytes)?;
    run.write("cells.json", &json_bytes(&cells))?;
    for (method, report, _, _) in &reduced {
        run.write(&format!("selections/{method}.json"), report.to_json().as_bytes())?;
    }
    run.finish()?;
    Ok(())
}
