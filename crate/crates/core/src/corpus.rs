//! Paired human/chatbot paragraph corpora: ingestion, statistics, splitting
//! and the similar-length subset.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::lingua;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("row {row}: field `{field}`: {message}")]
    Field {
        row: usize,
        field: &'static str,
        message: String,
    },
    #[error("row {row}: unknown label `{label}` (expected `human` or `chatbot`)")]
    UnknownLabel { row: usize, label: String },
    #[error("row {row}: duplicate id `{id}`")]
    DuplicateId { row: usize, id: String },
    #[error("corpus is empty")]
    Empty,
    #[error("class {label} has {have} records; stratified split needs at least {need}")]
    TooFewForSplit {
        label: Label,
        have: usize,
        need: usize,
    },
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("corpus carries no pair_id values")]
    NoPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Human,
    Chatbot,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Human, Label::Chatbot];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Human => "human",
            Label::Chatbot => "chatbot",
        }
    }

    /// 0/1 encoding: human = 0, chatbot = 1.
    pub fn as_binary(self) -> f64 {
        match self {
            Label::Human => 0.0,
            Label::Chatbot => 1.0,
        }
    }

    /// ±1 encoding: human = −1, chatbot = +1.
    pub fn as_signed(self) -> f64 {
        match self {
            Label::Human => -1.0,
            Label::Chatbot => 1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Label::Human),
            "chatbot" => Ok(Label::Chatbot),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParagraphRecord {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub headline: String,
    #[serde(default)]
    pub section_label: String,
    pub text: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_id: Option<String>,
}

impl ParagraphRecord {
    /// Number of word tokens in the paragraph text.
    pub fn word_count(&self) -> usize {
        lingua::word_count(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(format!("unknown corpus format `{other}`")),
        }
    }
}

impl CorpusFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Some(CorpusFormat::Jsonl),
            "csv" => Some(CorpusFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub format: Option<CorpusFormat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub records: Vec<ParagraphRecord>,
    pub provenance: Provenance,
}

impl Corpus {
    /// Builds a corpus from in-memory records, validating the record
    /// invariants.
    pub fn from_records(
        records: Vec<ParagraphRecord>,
        source: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (i, r) in records.iter().enumerate() {
            validate_record(r, i + 1, &mut seen)?;
        }
        Ok(Corpus {
            records,
            provenance: Provenance {
                source: source.into(),
                format: None,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ParagraphRecord> {
        self.records.iter()
    }

    fn derived(&self, records: Vec<ParagraphRecord>, suffix: &str) -> Corpus {
        Corpus {
            records,
            provenance: Provenance {
                source: format!("{}#{suffix}", self.provenance.source),
                format: self.provenance.format,
            },
        }
    }

    /// Serializes the corpus as JSONL, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

fn validate_record(
    r: &ParagraphRecord,
    row: usize,
    seen: &mut HashSet<String>,
) -> Result<(), CorpusError> {
    if r.text.trim().is_empty() {
        return Err(CorpusError::Field {
            row,
            field: "text",
            message: "empty after trimming".into(),
        });
    }
    if r.id.is_empty() {
        return Err(CorpusError::Field {
            row,
            field: "id",
            message: "empty".into(),
        });
    }
    if !seen.insert(r.id.clone()) {
        return Err(CorpusError::DuplicateId {
            row,
            id: r.id.clone(),
        });
    }
    Ok(())
}

/// Loose input row: every field optional so that missing/invalid values can
/// be reported with the row number instead of a serde message.
#[derive(Debug, Deserialize)]
struct RawRow {
    id: Option<String>,
    title: Option<String>,
    headline: Option<String>,
    section_label: Option<String>,
    text: Option<String>,
    label: Option<String>,
    pair_id: Option<String>,
}

impl RawRow {
    fn into_record(self, row: usize) -> Result<ParagraphRecord, CorpusError> {
        let text = self.text.ok_or(CorpusError::Field {
            row,
            field: "text",
            message: "missing".into(),
        })?;
        let label = self.label.ok_or(CorpusError::Field {
            row,
            field: "label",
            message: "missing".into(),
        })?;
        let label = label
            .parse::<Label>()
            .map_err(|label| CorpusError::UnknownLabel { row, label })?;
        Ok(ParagraphRecord {
            id: self.id.filter(|s| !s.is_empty()).unwrap_or_else(|| row.to_string()),
            title: self.title.unwrap_or_default(),
            headline: self.headline.unwrap_or_default(),
            section_label: self.section_label.unwrap_or_default(),
            text,
            label,
            pair_id: self.pair_id.filter(|s| !s.is_empty()),
        })
    }
}

/// Parses JSONL text. Blank lines are skipped; row numbers are 1-based line
/// numbers.
pub fn parse_jsonl(input: &str) -> Result<Vec<ParagraphRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRow = serde_json::from_str(line).map_err(|e| CorpusError::Row {
            row,
            message: e.to_string(),
        })?;
        let record = raw.into_record(row)?;
        validate_record(&record, row, &mut seen)?;
        records.push(record);
    }
    Ok(records)
}

/// Parses comma-separated, double-quote-escaped CSV with a mandatory header
/// row. Row numbers count data rows from 1.
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<ParagraphRecord>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .delimiter(b',')
        .quote(b'"')
        .double_quote(true)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Row {
            row: 0,
            message: format!("header: {e}"),
        })?
        .clone();
    for required in ["text", "label"] {
        if !headers.iter().any(|h| h == required) {
            return Err(CorpusError::Field {
                row: 0,
                field: if required == "text" { "text" } else { "label" },
                message: "missing from header".into(),
            });
        }
    }
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, result) in reader.deserialize::<RawRow>().enumerate() {
        let row = i + 1;
        let raw = result.map_err(|e| CorpusError::Row {
            row,
            message: e.to_string(),
        })?;
        let record = raw.into_record(row)?;
        validate_record(&record, row, &mut seen)?;
        records.push(record);
    }
    Ok(records)
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let records = match format {
        CorpusFormat::Jsonl => parse_jsonl(&std::fs::read_to_string(path).map_err(io_err)?)?,
        CorpusFormat::Csv => parse_csv(std::fs::File::open(path).map_err(io_err)?)?,
    };
    Ok(Corpus {
        records,
        provenance: Provenance {
            source: path.display().to_string(),
            format: Some(format),
        },
    })
}

/// Writes records as CSV in the same dialect `parse_csv` reads.
pub fn write_csv<W: std::io::Write>(records: &[ParagraphRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "title", "headline", "section_label", "text", "label", "pair_id"])?;
    for r in records {
        w.write_record([
            r.id.as_str(),
            &r.title,
            &r.headline,
            &r.section_label,
            &r.text,
            r.label.as_str(),
            r.pair_id.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub paragraph_count: u64,
    pub word_count: u64,
    pub char_count: u64,
    /// Unrounded; serialized to two decimals.
    #[serde(serialize_with = "two_decimals")]
    pub avg_words_per_paragraph: f64,
}

impl ClassStats {
    pub fn from_counts(paragraph_count: u64, word_count: u64, char_count: u64) -> Self {
        let avg = if paragraph_count == 0 {
            0.0
        } else {
            word_count as f64 / paragraph_count as f64
        };
        ClassStats {
            paragraph_count,
            word_count,
            char_count,
            avg_words_per_paragraph: avg,
        }
    }

    /// Average words per paragraph rounded half-away-from-zero to two
    /// decimals.
    pub fn avg_rounded(&self) -> f64 {
        round2(self.avg_words_per_paragraph)
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn two_decimals<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round2(*x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub human: ClassStats,
    pub chatbot: ClassStats,
}

impl CorpusStats {
    pub fn class(&self, label: Label) -> &ClassStats {
        match label {
            Label::Human => &self.human,
            Label::Chatbot => &self.chatbot,
        }
    }
}

pub fn corpus_stats(c: &Corpus) -> Result<CorpusStats, CorpusError> {
    if c.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut counts = [(0u64, 0u64, 0u64); 2];
    for r in c.iter() {
        let slot = &mut counts[r.label as usize];
        slot.0 += 1;
        slot.1 += r.word_count() as u64;
        slot.2 += r.text.chars().count() as u64;
    }
    let [h, b] = counts;
    Ok(CorpusStats {
        human: ClassStats::from_counts(h.0, h.1, h.2),
        chatbot: ClassStats::from_counts(b.0, b.1, b.2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub stratified: bool,
}

fn default_train_fraction() -> f64 {
    0.8
}

fn default_true() -> bool {
    true
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec {
            seed,
            ..Self::default()
        }
    }
}

/// Number of training items out of `n`, keeping at least one item on each
/// side.
fn train_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).clamp(1, n - 1)
}

/// Random train/test partition. Both partitions keep corpus order.
pub fn split(c: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus), CorpusError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(CorpusError::BadFraction(spec.train_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut in_train = vec![false; c.len()];
    if spec.stratified {
        for label in Label::ALL {
            let mut idx: Vec<usize> = (0..c.len())
                .filter(|&i| c.records[i].label == label)
                .collect();
            if idx.len() < 2 {
                return Err(CorpusError::TooFewForSplit {
                    label,
                    have: idx.len(),
                    need: 2,
                });
            }
            idx.shuffle(&mut rng);
            for &i in &idx[..train_count(idx.len(), spec.train_fraction)] {
                in_train[i] = true;
            }
        }
    } else {
        if c.len() < 2 {
            return Err(CorpusError::TooFewForSplit {
                label: c.records.first().map_or(Label::Human, |r| r.label),
                have: c.len(),
                need: 2,
            });
        }
        let mut idx: Vec<usize> = (0..c.len()).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..train_count(idx.len(), spec.train_fraction)] {
            in_train[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (r, keep) in c.records.iter().zip(in_train) {
        if keep {
            train.push(r.clone());
        } else {
            test.push(r.clone());
        }
    }
    Ok((c.derived(train, "train"), c.derived(test, "test")))
}

/// Keeps the pairs whose human and chatbot word totals differ by fewer than
/// `threshold_words`. Records without a pair id, and pairs missing either
/// class, are dropped.
pub fn similar_length_subset(c: &Corpus, threshold_words: usize) -> Result<Corpus, CorpusError> {
    let mut totals: BTreeMap<&str, [Option<usize>; 2]> = BTreeMap::new();
    for r in c.iter() {
        if let Some(pid) = r.pair_id.as_deref() {
            let slot = &mut totals.entry(pid).or_default()[r.label as usize];
            *slot = Some(slot.unwrap_or(0) + r.word_count());
        }
    }
    if totals.is_empty() {
        return Err(CorpusError::NoPairs);
    }
    let keep: HashSet<&str> = totals
        .iter()
        .filter_map(|(pid, t)| match t {
            [Some(h), Some(b)] if h.abs_diff(*b) < threshold_words => Some(*pid),
            _ => None,
        })
        .collect();
    let records = c
        .iter()
        .filter(|r| r.pair_id.as_deref().is_some_and(|p| keep.contains(p)))
        .cloned()
        .collect();
    Ok(c.derived(records, "similar-length"))
}
