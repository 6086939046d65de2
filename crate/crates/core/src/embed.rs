//! Word-level representations: TF-IDF, CBOW word2vec, GloVe, pretrained
//! vector files, and document averaging.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::features::FeatureMatrix;
use crate::lingua;

pub const DEFAULT_DIM: usize = 100;
pub const DEFAULT_MAX_VOCAB: usize = 5000;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("vocabulary is empty (min_count {0})")]
    EmptyVocabulary(usize),
    #[error("co-occurrence matrix has no entries")]
    EmptyMatrix,
    #[error("vector file has no entries")]
    EmptyTable,
    #[error("line {line}: expected {expected} values, found {got}")]
    Dimension { line: usize, expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMethod {
    Tfidf,
    Cbow,
    Glove,
    Loaded,
}

impl EmbeddingMethod {
    pub const ALL: [EmbeddingMethod; 4] = [
        EmbeddingMethod::Tfidf,
        EmbeddingMethod::Cbow,
        EmbeddingMethod::Glove,
        EmbeddingMethod::Loaded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingMethod::Tfidf => "tfidf",
            EmbeddingMethod::Cbow => "cbow",
            EmbeddingMethod::Glove => "glove",
            EmbeddingMethod::Loaded => "loaded",
        }
    }
}

impl fmt::Display for EmbeddingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmbeddingMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        EmbeddingMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown embedding method `{s}`"))
    }
}

/// Lowercased word tokens of a paragraph, punctuation dropped.
pub fn doc_tokens(text: &str) -> Vec<String> {
    lingua::tokenize(text)
        .into_iter()
        .filter(|t| t.is_word())
        .map(|t| t.lower)
        .collect()
}

pub fn corpus_tokens(c: &Corpus) -> Vec<Vec<String>> {
    c.iter().map(|r| doc_tokens(&r.text)).collect()
}

/// Term vocabulary with document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn doc_freq(&self, i: usize) -> usize {
        self.doc_freq[i]
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// `ln(N / n_t)`.
    pub fn idf(&self, i: usize) -> f64 {
        (self.n_docs as f64 / self.doc_freq[i] as f64).ln()
    }
}

/// Builds the TF-IDF vocabulary: words ranked by document frequency
/// (descending, ties alphabetical), truncated to `max_vocab`. Indices follow
/// the ranking.
pub fn tfidf_fit(docs: &[Vec<String>], max_vocab: usize) -> Result<Vocabulary, EmbedError> {
    if docs.is_empty() {
        return Err(EmbedError::EmptyCorpus);
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    for d in docs {
        let mut seen: Vec<&str> = d.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for w in seen {
            *df.entry(w).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(max_vocab);
    let words: Vec<String> = ranked.iter().map(|(w, _)| w.to_string()).collect();
    Ok(Vocabulary {
        index: words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect(),
        doc_freq: ranked.iter().map(|(_, n)| *n).collect(),
        words,
        n_docs: docs.len(),
    })
}

/// Sparse row with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn get(&self, i: usize) -> f64 {
        self.indices
            .binary_search(&i)
            .map_or(0.0, |k| self.values[k])
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for (i, x) in self.indices.iter().zip(&self.values) {
            v[*i] = *x;
        }
        v
    }
}

/// `TF(t, d) · IDF(t)` for vocabulary terms. TF divides by every token in
/// the document, in or out of vocabulary.
pub fn tfidf_transform(vocab: &Vocabulary, doc: &[String]) -> SparseVector {
    if doc.is_empty() {
        return SparseVector::default();
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for w in doc {
        if let Some(i) = vocab.index_of(w) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let total = doc.len() as f64;
    let (indices, values) = counts
        .into_iter()
        .map(|(i, c)| (i, c as f64 / total * vocab.idf(i)))
        .unzip();
    SparseVector { indices, values }
}

/// Dense TF-IDF matrix with columns `tf_<word>`.
pub fn tfidf_matrix(vocab: &Vocabulary, docs: &[Vec<String>], labels: Vec<Label>, ids: Vec<String>) -> FeatureMatrix {
    let names = vocab.words().iter().map(|w| format!("tf_{w}")).collect();
    let rows = docs.iter().map(|d| tfidf_transform(vocab, d).to_dense(vocab.len())).collect();
    FeatureMatrix::new(names, rows, labels, ids)
}

/// Word vectors of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<Vec<f64>>,
}

impl VectorTable {
    /// Panics if the vectors disagree in length or a word repeats.
    pub fn new(words: Vec<String>, vectors: Vec<Vec<f64>>) -> VectorTable {
        assert_eq!(words.len(), vectors.len());
        let dim = vectors.first().map_or(0, Vec::len);
        assert!(vectors.iter().all(|v| v.len() == dim), "ragged vectors");
        let index: HashMap<String, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        assert_eq!(index.len(), words.len(), "duplicate word");
        VectorTable {
            dim,
            words,
            index,
            vectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.vectors[i].as_slice())
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        Some(cosine(self.get(a)?, self.get(b)?))
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Parses `word v1 … vd` lines. Blank lines are skipped; a repeated word
/// keeps its first position but takes the later vector.
pub fn parse_vectors(text: &str) -> Result<VectorTable, EmbedError> {
    let mut words: Vec<String> = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut dim: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let values = parts
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| EmbedError::Parse {
                        line: line_no,
                        message: format!("bad number `{s}`"),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.is_empty() {
            return Err(EmbedError::Parse {
                line: line_no,
                message: format!("word `{word}` has no values"),
            });
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(EmbedError::Dimension {
                    line: line_no,
                    expected: d,
                    got: values.len(),
                })
            }
            _ => {}
        }
        if let Some(&k) = index.get(word) {
            log::warn!("line {line_no}: duplicate word `{word}`, keeping the later vector");
            vectors[k] = values;
        } else {
            index.insert(word.to_string(), words.len());
            words.push(word.to_string());
            vectors.push(values);
        }
    }
    if words.is_empty() {
        return Err(EmbedError::EmptyTable);
    }
    Ok(VectorTable {
        dim: dim.unwrap_or(0),
        words,
        index,
        vectors,
    })
}

pub fn load_vectors(path: &Path) -> Result<VectorTable, EmbedError> {
    let text = std::fs::read_to_string(path).map_err(|source| EmbedError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_vectors(&text)
}

/// Writes one `word v1 … vd` line per entry with shortest round-trip floats.
pub fn write_vectors<W: Write>(table: &VectorTable, mut out: W) -> std::io::Result<()> {
    for (w, v) in table.words.iter().zip(&table.vectors) {
        write!(out, "{w}")?;
        for x in v {
            write!(out, " {x:?}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Mean of the in-vocabulary token vectors; zeros when none are known.
/// Vectors are summed in table order, so token order never matters.
pub fn doc_embed(tokens: &[String], table: &VectorTable) -> Vec<f64> {
    let mut idx: Vec<usize> = tokens.iter().filter_map(|t| table.index_of(t)).collect();
    let mut out = vec![0.0; table.dim];
    if idx.is_empty() {
        return out;
    }
    idx.sort_unstable();
    for i in &idx {
        for (o, x) in out.iter_mut().zip(&table.vectors[*i]) {
            *o += x;
        }
    }
    let n = idx.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

pub fn embedding_names(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("e{i}")).collect()
}

/// Averaged document vectors with columns `e0 … e(d−1)`.
pub fn embed_matrix(table: &VectorTable, docs: &[Vec<String>], labels: Vec<Label>, ids: Vec<String>) -> FeatureMatrix {
    let rows = docs.iter().map(|d| doc_embed(d, table)).collect();
    FeatureMatrix::new(embedding_names(table.dim), rows, labels, ids)
}

fn init_uniform(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let r = 0.5 / dim as f64;
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-r..r)).collect())
        .collect()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Words with at least `min_count` occurrences, most frequent first (ties
/// alphabetical), with their counts.
fn counted_vocab(docs: &[Vec<String>], min_count: usize) -> Vec<(String, usize)> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for d in docs {
        for w in d {
            *counts.entry(w).or_default() += 1;
        }
    }
    let mut v: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count)
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CbowParams {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for CbowParams {
    fn default() -> Self {
        CbowParams {
            dim: DEFAULT_DIM,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 2,
            seed: 0,
        }
    }
}

/// Trained vectors plus the mean loss of every epoch.
#[derive(Debug, Clone)]
pub struct Trained {
    pub table: VectorTable,
    pub epoch_losses: Vec<f64>,
}

/// CBOW with negative sampling. The hidden vector is the mean of the input
/// vectors in a fixed window; negatives come from the unigram distribution
/// raised to 0.75. The learning rate decays linearly over all updates.
pub fn train_cbow(docs: &[Vec<String>], p: &CbowParams) -> Result<Trained, EmbedError> {
    if p.dim == 0 || p.window == 0 || !(p.learning_rate > 0.0) {
        return Err(EmbedError::Hyperparameter("dim, window and learning_rate must be positive".into()));
    }
    let vocab = counted_vocab(docs, p.min_count);
    if vocab.is_empty() {
        return Err(EmbedError::EmptyVocabulary(p.min_count));
    }
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (w.as_str(), i)).collect();
    let sentences: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.iter().filter_map(|w| index.get(w.as_str()).copied()).collect())
        .collect();
    let mut cumulative = Vec::with_capacity(vocab.len());
    let mut acc = 0.0;
    for (_, c) in &vocab {
        acc += (*c as f64).powf(0.75);
        cumulative.push(acc);
    }
    let draw_negative = |rng: &mut ChaCha8Rng| -> usize {
        let u = rng.random_range(0.0..acc);
        cumulative.partition_point(|c| *c <= u).min(cumulative.len() - 1)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut input = init_uniform(&mut rng, vocab.len(), p.dim);
    let mut output = vec![vec![0.0; p.dim]; vocab.len()];
    let total_steps = (p.epochs * sentences.iter().map(Vec::len).sum::<usize>()).max(1) as f64;
    let mut step = 0usize;
    let mut losses = Vec::with_capacity(p.epochs);
    let mut hidden = vec![0.0; p.dim];
    let mut err = vec![0.0; p.dim];
    for _ in 0..p.epochs {
        let (mut loss, mut examples) = (0.0, 0usize);
        for s in &sentences {
            for pos in 0..s.len() {
                let lr = p.learning_rate * (1.0 - step as f64 / total_steps).max(1e-4);
                step += 1;
                let lo = pos.saturating_sub(p.window);
                let hi = (pos + p.window + 1).min(s.len());
                let context: Vec<usize> = (lo..hi).filter(|&j| j != pos).map(|j| s[j]).collect();
                if context.is_empty() {
                    continue;
                }
                hidden.iter_mut().for_each(|h| *h = 0.0);
                for &c in &context {
                    for (h, x) in hidden.iter_mut().zip(&input[c]) {
                        *h += x;
                    }
                }
                let k = context.len() as f64;
                hidden.iter_mut().for_each(|h| *h /= k);
                err.iter_mut().for_each(|e| *e = 0.0);
                let target = s[pos];
                for n in 0..=p.negatives {
                    let (word, label) = if n == 0 {
                        (target, 1.0)
                    } else {
                        let w = draw_negative(&mut rng);
                        if w == target {
                            continue;
                        }
                        (w, 0.0)
                    };
                    let o = &mut output[word];
                    let score: f64 = o.iter().zip(&hidden).map(|(a, b)| a * b).sum();
                    let prob = sigmoid(score);
                    loss -= if label == 1.0 { prob.max(1e-300).ln() } else { (1.0 - prob).max(1e-300).ln() };
                    let g = lr * (label - prob);
                    for ((e, ov), h) in err.iter_mut().zip(o.iter_mut()).zip(&hidden) {
                        *e += g * *ov;
                        *ov += g * h;
                    }
                }
                for &c in &context {
                    for (x, e) in input[c].iter_mut().zip(&err) {
                        *x += e;
                    }
                }
                examples += 1;
            }
        }
        losses.push(loss / examples.max(1) as f64);
    }
    Ok(Trained {
        table: VectorTable::new(vocab.into_iter().map(|(w, _)| w).collect(), input),
        epoch_losses: losses,
    })
}

/// Distance-weighted word co-occurrence counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Cooccurrence {
    pub words: Vec<String>,
    /// `(i, j) → X_ij`, sorted by key.
    pub entries: BTreeMap<(usize, usize), f64>,
    pub window: usize,
    pub symmetric: bool,
}

impl Cooccurrence {
    pub fn get(&self, a: &str, b: &str) -> f64 {
        let i = self.words.iter().position(|w| w == a);
        let j = self.words.iter().position(|w| w == b);
        match (i, j) {
            (Some(i), Some(j)) => self.entries.get(&(i, j)).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }
}

/// Counts every ordered pair within `window` tokens, weighting a pair at
/// distance `k` by `1/k` and recording it in both directions.
pub fn build_cooccurrence(docs: &[Vec<String>], window: usize) -> Result<Cooccurrence, EmbedError> {
    if window == 0 {
        return Err(EmbedError::Hyperparameter("window must be positive".into()));
    }
    let vocab = counted_vocab(docs, 1);
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (w.as_str(), i)).collect();
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for d in docs {
        let ids: Vec<usize> = d.iter().map(|w| index[w.as_str()]).collect();
        for i in 0..ids.len() {
            for k in 1..=window {
                let Some(&j) = ids.get(i + k) else { break };
                let w = 1.0 / k as f64;
                *entries.entry((ids[i], j)).or_default() += w;
                *entries.entry((j, ids[i])).or_default() += w;
            }
        }
    }
    if entries.is_empty() {
        return Err(EmbedError::EmptyMatrix);
    }
    Ok(Cooccurrence {
        words: vocab.into_iter().map(|(w, _)| w).collect(),
        entries,
        window,
        symmetric: true,
    })
}

/// `min(1, (x / x_max)^alpha)`.
pub fn glove_weight(x: f64, x_max: f64, alpha: f64) -> f64 {
    if x >= x_max {
        1.0
    } else {
        (x / x_max).powf(alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GloveParams {
    pub dim: usize,
    pub window: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for GloveParams {
    fn default() -> Self {
        GloveParams {
            dim: DEFAULT_DIM,
            window: 10,
            x_max: 100.0,
            alpha: 0.75,
            epochs: 25,
            learning_rate: 0.05,
            seed: 0,
        }
    }
}

/// Weighted least squares on `log X_ij` with AdaGrad. The returned vectors
/// are word plus context vectors; the loss is `Σ f(X_ij) · residual²` over
/// each epoch's pass.
pub fn train_glove(x: &Cooccurrence, p: &GloveParams) -> Result<Trained, EmbedError> {
    if x.entries.is_empty() {
        return Err(EmbedError::EmptyMatrix);
    }
    if p.dim == 0 || !(p.learning_rate > 0.0) || !(p.x_max > 0.0) {
        return Err(EmbedError::Hyperparameter("dim, learning_rate and x_max must be positive".into()));
    }
    let n = x.words.len();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut w = init_uniform(&mut rng, n, p.dim);
    let mut c = init_uniform(&mut rng, n, p.dim);
    let mut bw = vec![0.0f64; n];
    let mut bc = vec![0.0; n];
    let mut gw = vec![vec![1.0f64; p.dim]; n];
    let mut gc = vec![vec![1.0f64; p.dim]; n];
    let mut gbw = vec![1.0f64; n];
    let mut gbc = vec![1.0f64; n];
    let mut order: Vec<((usize, usize), f64)> = x.entries.iter().map(|(k, v)| (*k, *v)).collect();
    let mut losses = Vec::with_capacity(p.epochs);
    for _ in 0..p.epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for &((i, j), xij) in &order {
            let dot: f64 = w[i].iter().zip(&c[j]).map(|(a, b)| a * b).sum();
            let diff = dot + bw[i] + bc[j] - xij.ln();
            let f = glove_weight(xij, p.x_max, p.alpha);
            loss += f * diff * diff;
            let g = f * diff;
            for k in 0..p.dim {
                let dw = g * c[j][k];
                let dc = g * w[i][k];
                w[i][k] -= p.learning_rate * dw / gw[i][k].sqrt();
                c[j][k] -= p.learning_rate * dc / gc[j][k].sqrt();
                gw[i][k] += dw * dw;
                gc[j][k] += dc * dc;
            }
            bw[i] -= p.learning_rate * g / gbw[i].sqrt();
            bc[j] -= p.learning_rate * g / gbc[j].sqrt();
            gbw[i] += g * g;
            gbc[j] += g * g;
        }
        losses.push(loss);
    }
    let vectors = w
        .into_iter()
        .zip(c)
        .map(|(a, b)| a.into_iter().zip(b).map(|(x, y)| x + y).collect())
        .collect();
    Ok(Trained {
        table: VectorTable::new(x.words.clone(), vectors),
        epoch_losses: losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(texts: &[&str]) -> Vec<Vec<String>> {
        texts
            .iter()
            .map(|t| t.split_whitespace().map(String::from).collect())
            .collect()
    }

    #[test]
    fn tfidf_hand_example() {
        let d = docs(&["a a b c", "b d"]);
        let v = tfidf_fit(&d, DEFAULT_MAX_VOCAB).unwrap();
        let row = tfidf_transform(&v, &d[0]);
        let a = v.index_of("a").unwrap();
        assert!((row.get(a) - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(row.get(v.index_of("b").unwrap()), 0.0);
        assert_eq!(row.get(v.index_of("d").unwrap()), 0.0);
        assert!((row.get(a) - 0.3466).abs() < 1e-4);
    }

    #[test]
    fn vocabulary_ranking_and_cap() {
        let d = docs(&["z y", "z x", "z y"]);
        let v = tfidf_fit(&d, 2).unwrap();
        assert_eq!(v.words(), &["z".to_string(), "y".to_string()]);
        assert!(matches!(tfidf_fit(&[], 10), Err(EmbedError::EmptyCorpus)));
        assert!(tfidf_transform(&v, &[]).indices.is_empty());
    }

    #[test]
    fn weighting_function() {
        assert_eq!(glove_weight(100.0, 100.0, 0.75), 1.0);
        assert_eq!(glove_weight(200.0, 100.0, 0.75), 1.0);
        assert!((glove_weight(50.0, 100.0, 0.75) - 0.5f64.powf(0.75)).abs() < 1e-15);
    }

    #[test]
    fn cooccurrence_distance_weights() {
        let x = build_cooccurrence(&docs(&["a b c"]), 10).unwrap();
        assert_eq!(x.get("a", "b"), 1.0);
        assert_eq!(x.get("b", "a"), 1.0);
        assert_eq!(x.get("a", "c"), 0.5);
        assert_eq!(x.get("c", "c"), 0.0);
    }

    #[test]
    fn vector_file_errors() {
        let err = parse_vectors("a 1 2 3 4\nb 1 2 3\n").unwrap_err();
        assert!(matches!(err, EmbedError::Dimension { line: 2, expected: 4, got: 3 }));
        assert!(matches!(parse_vectors("a 1 x\n"), Err(EmbedError::Parse { line: 1, .. })));
        assert!(matches!(parse_vectors("\n"), Err(EmbedError::EmptyTable)));
        let t = parse_vectors("a 1 2\nb 3 4\na 5 6\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("a").unwrap(), &[5.0, 6.0]);
    }

    #[test]
    fn doc_embedding_basics() {
        let t = VectorTable::new(vec!["v".into(), "w".into()], vec![vec![0.1, -2.5], vec![-0.1, 2.5]]);
        assert_eq!(doc_embed(&["v".to_string()], &t), vec![0.1, -2.5]);
        assert_eq!(doc_embed(&["v".to_string(), "w".to_string()], &t), vec![0.0, 0.0]);
        assert_eq!(doc_embed(&["zzz".to_string()], &t), vec![0.0, 0.0]);
    }

    #[test]
    fn cbow_errors_and_zero_epochs() {
        let d = docs(&["one two three"]);
        assert!(matches!(train_cbow(&d, &CbowParams::default()), Err(EmbedError::EmptyVocabulary(2))));
        let d = docs(&["a b a b"]);
        let p = CbowParams {
            epochs: 0,
            dim: 4,
            ..CbowParams::default()
        };
        let t1 = train_cbow(&d, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let init = init_uniform(&mut rng, 2, 4);
        assert_eq!(t1.table.vectors(), init.as_slice());
        assert!(t1.epoch_losses.is_empty());
    }
}
