//! The 32 stylometric features, grouped as linguistic, structural, semantic
//! and interaction measurements, plus the feature matrix they populate.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, ParagraphRecord};
use crate::lingua::{self, Lexicon, Pos, Sentence, Terminator, Token};

/// Version tag written alongside feature-matrix headers. Bump when the column
/// order or a feature definition changes.
pub const FEATURE_SCHEMA_VERSION: u32 = 1;

macro_rules! features {
    ($($variant:ident => $name:literal,)*) => {
        /// One of the 32 features, in frozen column order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Feature { $($variant,)* }

        impl Feature {
            pub const ALL: [Feature; 32] = [$(Feature::$variant,)*];

            pub fn name(self) -> &'static str {
                match self { $(Feature::$variant => $name,)* }
            }
        }
    };
}

features! {
    VerbRatio => "verb_ratio",
    NounRatio => "noun_ratio",
    AdjectiveRatio => "adjective_ratio",
    PronounRatio => "pronoun_ratio",
    AdverbRatio => "adverb_ratio",
    PrepositionRatio => "preposition_ratio",
    ConjunctionRatio => "conjunction_ratio",
    InterjectionRatio => "interjection_ratio",
    AverageSentenceLength => "average_sentence_length",
    LowercaseLetterRatio => "lowercase_letter_ratio",
    CapitalLetterRatio => "capital_letter_ratio",
    LexicalDiversity => "lexical_diversity",
    SentenceComplexity => "sentence_complexity",
    Burstiness => "burstiness",
    SentenceCount => "sentence_count",
    WordCount => "word_count",
    StopwordRatio => "stopword_ratio",
    ComplexRatio => "complex_ratio",
    SentimentPolarity => "sentiment_polarity",
    Subjectivity => "subjectivity",
    HomonymFrequency => "homonym_frequency",
    SimileFrequency => "simile_frequency",
    SynonymFrequency => "synonym_frequency",
    AntonymFrequency => "antonym_frequency",
    ActivePassiveRatio => "active_passive_ratio",
    DirectIndirectSpeechRatio => "direct_indirect_speech_ratio",
    ConditionalSentenceRatio => "conditional_sentence_ratio",
    NegationRatio => "negation_ratio",
    QuestionRatio => "question_ratio",
    ExclamatorySentenceRatio => "exclamatory_sentence_ratio",
    ImperativeMoodRatio => "imperative_mood_ratio",
    SubjunctiveMoodRatio => "subjunctive_mood_ratio",
}

impl Feature {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Whether the feature is bounded to [0, 1].
    pub fn is_unit_bounded(self) -> bool {
        !matches!(
            self,
            Feature::AverageSentenceLength
                | Feature::SentenceComplexity
                | Feature::Burstiness
                | Feature::SentenceCount
                | Feature::WordCount
                | Feature::ActivePassiveRatio
                | Feature::DirectIndirectSpeechRatio
                | Feature::SentimentPolarity
        )
    }
}

pub fn feature_names() -> Vec<String> {
    Feature::ALL.iter().map(|f| f.name().to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; 32]);

impl FeatureVector {
    pub fn get(&self, f: Feature) -> f64 {
        self.0[f.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    fn from_parts(l: [f64; 8], s: [f64; 10], m: [f64; 6], i: [f64; 8]) -> FeatureVector {
        let mut v = [0.0; 32];
        v[..8].copy_from_slice(&l);
        v[8..18].copy_from_slice(&s);
        v[18..24].copy_from_slice(&m);
        v[24..].copy_from_slice(&i);
        FeatureVector(v)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("paragraph has no word tokens")]
    NoWords,
    #[error("paragraph has no sentences")]
    NoSentences,
    #[error("paragraph has no cased letters; letter ratios are undefined")]
    NoLetters,
    #[error("record `{id}`: {source}")]
    Record {
        id: String,
        #[source]
        source: Box<FeatureError>,
    },
    #[error("correlation needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("feature matrix csv: {0}")]
    Csv(String),
}

/// Tagged paragraph shared by the four extractors.
struct Analysis {
    /// Sentences that contain at least one word token.
    sentences: Vec<Sentence>,
}

impl Analysis {
    fn new(text: &str, lex: &Lexicon) -> Result<Analysis, FeatureError> {
        let sentences: Vec<Sentence> = lingua::analyze(text, lex)
            .into_iter()
            .filter(|s| s.word_count() > 0)
            .collect();
        if sentences.is_empty() {
            return Err(FeatureError::NoWords);
        }
        Ok(Analysis { sentences })
    }

    fn words(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.words())
    }

    fn word_count(&self) -> usize {
        self.words().count()
    }

    fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    fn sentence_ratio(&self, pred: impl Fn(&Sentence) -> bool) -> f64 {
        self.sentences.iter().filter(|s| pred(s)).count() as f64 / self.sentence_count() as f64
    }
}

const LINGUISTIC_TAGS: [Pos; 8] = [
    Pos::Verb,
    Pos::Noun,
    Pos::Adjective,
    Pos::Pronoun,
    Pos::Adverb,
    Pos::Preposition,
    Pos::Conjunction,
    Pos::Interjection,
];

fn linguistic(a: &Analysis) -> [f64; 8] {
    let n = a.word_count() as f64;
    let mut out = [0.0; 8];
    for t in a.words() {
        if let Some(k) = LINGUISTIC_TAGS.iter().position(|p| *p == t.pos) {
            out[k] += 1.0;
        }
    }
    out.iter_mut().for_each(|x| *x /= n);
    out
}

fn structural(text: &str, a: &Analysis, lex: &Lexicon) -> Result<[f64; 10], FeatureError> {
    let (lower, upper) = text.chars().fold((0usize, 0usize), |(l, u), c| {
        (l + c.is_lowercase() as usize, u + c.is_uppercase() as usize)
    });
    if lower + upper == 0 {
        return Err(FeatureError::NoLetters);
    }
    let letters = (lower + upper) as f64;
    let words = a.word_count();
    let sentences = a.sentence_count();

    let mut type_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in a.words() {
        *type_counts.entry(t.lower.as_str()).or_default() += 1;
    }
    let types = type_counts.len() as f64;
    let mean = words as f64 / types;
    let variance = type_counts
        .values()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / types;

    let clauses: Vec<usize> = a
        .sentences
        .iter()
        .map(|s| lingua::count_clauses(s, lex))
        .collect();
    let stopwords = a.words().filter(|t| t.is_stopword).count();

    Ok([
        words as f64 / sentences as f64,
        lower as f64 / letters,
        upper as f64 / letters,
        types / words as f64,
        clauses.iter().sum::<usize>() as f64 / sentences as f64,
        variance / mean,
        sentences as f64,
        words as f64,
        stopwords as f64 / words as f64,
        clauses.iter().filter(|&&c| c >= 2).count() as f64 / sentences as f64,
    ])
}

/// Counts the simile patterns `as ADJ as` and `VERB like NP` in a sentence.
fn has_simile(s: &Sentence) -> bool {
    let w: Vec<&Token> = s.words().collect();
    for i in 0..w.len() {
        if w[i].lower == "as"
            && i + 2 < w.len()
            && matches!(w[i + 1].pos, Pos::Adjective | Pos::Adverb)
            && w[i + 2].lower == "as"
        {
            return true;
        }
        if w[i].lower == "like"
            && i > 0
            && matches!(w[i - 1].pos, Pos::Verb | Pos::AuxVerb)
            && w.get(i + 1).is_some_and(|t| {
                matches!(
                    t.pos,
                    Pos::Determiner | Pos::Adjective | Pos::Noun | Pos::Pronoun | Pos::Number
                )
            })
        {
            return true;
        }
    }
    false
}

fn semantic(a: &Analysis, lex: &Lexicon) -> [f64; 6] {
    let words: Vec<&Token> = a.words().collect();
    let n = words.len() as f64;

    let scored: Vec<_> = words.iter().filter_map(|t| lex.sentiment.get(&t.lower)).collect();
    let (polarity, subjectivity) = if scored.is_empty() {
        (0.0, 0.0)
    } else {
        let k = scored.len() as f64;
        (
            (scored.iter().map(|s| s.polarity).sum::<f64>() / k).clamp(-1.0, 1.0),
            scored.iter().filter(|s| s.subjective).count() as f64 / k,
        )
    };

    let homonyms = words.iter().filter(|t| lex.homonyms.contains(&t.lower)).count();
    let similes = a.sentences.iter().filter(|s| has_simile(s)).count();

    let mut synonyms = 0;
    for (i, t) in words.iter().enumerate() {
        if words[..i]
            .iter()
            .any(|e| e.lower != t.lower && lex.share_synset(&e.lower, &t.lower))
        {
            synonyms += 1;
        }
    }

    let present: HashSet<&str> = words.iter().map(|t| t.lower.as_str()).collect();
    let antonyms = words
        .iter()
        .filter(|t| {
            lex.antonyms
                .get(&t.lower)
                .is_some_and(|opp| opp.iter().any(|o| present.contains(o.as_str())))
        })
        .count();

    [
        polarity,
        subjectivity,
        homonyms as f64 / n,
        similes as f64 / a.sentence_count() as f64,
        synonyms as f64 / n,
        antonyms as f64 / n,
    ]
}

const BE_FORMS: &[&str] = &["be", "am", "is", "are", "was", "were", "been", "being", "'s", "'re", "'m"];
const NEGATIONS: &[&str] = &["not", "no", "never", "n't", "none"];
const QUOTES: &[&str] = &["\"", "\u{201C}", "\u{201D}"];
const MODALS: &[&str] = &["would", "could", "should"];
const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "he", "she", "it", "we", "they"];
const IRREGULAR_PAST: &[&str] = &[
    "was", "were", "had", "did", "went", "knew", "came", "saw", "took", "got", "made", "gave",
    "thought", "told", "felt", "found", "left", "kept", "began", "ran", "wrote", "said", "could",
    "would", "might", "should",
];

fn is_passive(s: &Sentence, lex: &Lexicon) -> bool {
    let w: Vec<&Token> = s.words().collect();
    w.iter().enumerate().any(|(i, t)| {
        BE_FORMS.contains(&t.lower.as_str())
            && w[i + 1..(i + 4).min(w.len())]
                .iter()
                .any(|n| lex.past_participles.contains(&n.lower))
    })
}

fn has_quote(s: &Sentence) -> bool {
    s.tokens.iter().any(|t| QUOTES.contains(&t.surface.as_str()))
}

fn is_conditional(s: &Sentence) -> bool {
    let w: Vec<&str> = s.words().map(|t| t.lower.as_str()).collect();
    w.iter().enumerate().any(|(i, &x)| {
        x == "if" || x == "unless" || (x == "provided" && w.get(i + 1) == Some(&"that"))
    })
}

fn is_imperative(s: &Sentence, lex: &Lexicon) -> bool {
    s.words().next().is_some_and(|t| {
        lex.base_verbs.contains(&t.lower) && !SUBJECT_PRONOUNS.contains(&t.lower.as_str())
    })
}

fn is_past_verb(t: &Token, lex: &Lexicon) -> bool {
    IRREGULAR_PAST.contains(&t.lower.as_str())
        || (matches!(t.pos, Pos::Verb | Pos::AuxVerb)
            && (t.lower.ends_with("ed") || lex.past_participles.contains(&t.lower)))
}

fn is_subjunctive(s: &Sentence, lex: &Lexicon) -> bool {
    let w: Vec<&Token> = s.words().collect();
    w.iter().enumerate().any(|(i, t)| {
        let x = t.lower.as_str();
        (x == "if" && w[i + 1..].iter().any(|n| is_past_verb(n, lex)))
            || matches!(x, "wish" | "wishes" | "wished")
            || (MODALS.contains(&x) && {
                let mut rest = w[i + 1..].iter().skip_while(|n| n.lower == "not" || n.lower == "n't");
                rest.next().is_some_and(|n| lex.base_verbs.contains(&n.lower))
            })
    })
}

fn interaction(a: &Analysis, lex: &Lexicon) -> [f64; 8] {
    let passive = a.sentences.iter().filter(|s| is_passive(s, lex)).count();
    let active = a.sentence_count() - passive;
    let direct = a.sentences.iter().filter(|s| has_quote(s)).count();
    let indirect = a
        .sentences
        .iter()
        .filter(|s| !has_quote(s) && s.words().any(|t| lex.reporting_verbs.contains(&t.lower)))
        .count();
    [
        (active as f64 + 1.0) / (passive as f64 + 1.0),
        (direct as f64 + 1.0) / (indirect as f64 + 1.0),
        a.sentence_ratio(is_conditional),
        a.sentence_ratio(|s| s.words().any(|t| NEGATIONS.contains(&t.lower.as_str()))),
        a.sentence_ratio(|s| s.terminator == Terminator::Question),
        a.sentence_ratio(|s| s.terminator == Terminator::Exclamation),
        a.sentence_ratio(|s| is_imperative(s, lex)),
        a.sentence_ratio(|s| is_subjunctive(s, lex)),
    ]
}

/// Part-of-speech ratios over word tokens.
pub fn extract_linguistic(p: &ParagraphRecord, lex: &Lexicon) -> Result<[f64; 8], FeatureError> {
    Ok(linguistic(&Analysis::new(&p.text, lex)?))
}

/// Sentence-length, casing, diversity, complexity, burstiness and count
/// features.
pub fn extract_structural(p: &ParagraphRecord, lex: &Lexicon) -> Result<[f64; 10], FeatureError> {
    structural(&p.text, &Analysis::new(&p.text, lex)?, lex)
}

/// Sentiment, subjectivity and figure-of-speech frequencies.
pub fn extract_semantic(p: &ParagraphRecord, lex: &Lexicon) -> Result<[f64; 6], FeatureError> {
    Ok(semantic(&Analysis::new(&p.text, lex)?, lex))
}

/// Voice, speech, mood and sentence-type ratios.
pub fn extract_interaction(p: &ParagraphRecord, lex: &Lexicon) -> Result<[f64; 8], FeatureError> {
    Ok(interaction(&Analysis::new(&p.text, lex)?, lex))
}

pub fn extract_text(text: &str, lex: &Lexicon) -> Result<FeatureVector, FeatureError> {
    let a = Analysis::new(text, lex)?;
    Ok(FeatureVector::from_parts(
        linguistic(&a),
        structural(text, &a, lex)?,
        semantic(&a, lex),
        interaction(&a, lex),
    ))
}

pub fn extract_all(p: &ParagraphRecord, lex: &Lexicon) -> Result<FeatureVector, FeatureError> {
    extract_text(&p.text, lex)
}

/// A dense labelled matrix: stylometric features or embedding dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<Label>,
        ids: Vec<String>,
    ) -> FeatureMatrix {
        assert_eq!(rows.len(), labels.len());
        assert_eq!(rows.len(), ids.len());
        debug_assert!(rows.iter().all(|r| r.len() == feature_names.len()));
        FeatureMatrix {
            feature_names,
            rows,
            labels,
            ids,
        }
    }

    /// Builds a matrix with generated ids `0..n`.
    pub fn from_rows(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<Label>) -> FeatureMatrix {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        FeatureMatrix::new(feature_names, rows, labels, ids)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Keeps the named columns in the given order.
    pub fn select_columns(&self, names: &[String]) -> Option<FeatureMatrix> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Option<_>>()?;
        Some(FeatureMatrix {
            feature_names: names.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&j| r[j]).collect())
                .collect(),
            labels: self.labels.clone(),
            ids: self.ids.clone(),
        })
    }

    pub fn subset(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    /// CSV with header `names…,label,id`; floats printed with six decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.feature_names.clone();
        header.push("label".into());
        header.push("id".into());
        w.write_record(&header)?;
        for ((row, label), id) in self.rows.iter().zip(&self.labels).zip(&self.ids) {
            let mut rec: Vec<String> = row.iter().map(|x| format!("{x:.6}")).collect();
            rec.push(label.as_str().into());
            rec.push(id.clone());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<FeatureMatrix, FeatureError> {
        let csv_err = |e: csv::Error| FeatureError::Csv(e.to_string());
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = reader.headers().map_err(csv_err)?.clone();
        let n = header.len();
        if n < 2 || &header[n - 2] != "label" || &header[n - 1] != "id" {
            return Err(FeatureError::Csv("header must end with `label,id`".into()));
        }
        let feature_names: Vec<String> = header.iter().take(n - 2).map(String::from).collect();
        let (mut rows, mut labels, mut ids) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != n {
                return Err(FeatureError::Csv(format!("row {}: expected {n} fields", i + 1)));
            }
            let row = rec
                .iter()
                .take(n - 2)
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| FeatureError::Csv(format!("row {}: bad number `{s}`", i + 1)))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
            labels.push(
                rec[n - 2]
                    .parse::<Label>()
                    .map_err(|l| FeatureError::Csv(format!("row {}: unknown label `{l}`", i + 1)))?,
            );
            ids.push(rec[n - 1].to_string());
        }
        Ok(FeatureMatrix {
            feature_names,
            rows,
            labels,
            ids,
        })
    }
}

/// Extracts the 32 features for every record, rows in corpus order.
pub fn feature_matrix(c: &Corpus, lex: &Lexicon) -> Result<FeatureMatrix, FeatureError> {
    let rows = c
        .records
        .par_iter()
        .map(|r| {
            extract_all(r, lex)
                .map(|v| v.0.to_vec())
                .map_err(|e| FeatureError::Record {
                    id: r.id.clone(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureMatrix::new(
        feature_names(),
        rows,
        c.records.iter().map(|r| r.label).collect(),
        c.records.iter().map(|r| r.id.clone()).collect(),
    ))
}

/// Pearson correlation between all column pairs. Zero-variance columns
/// correlate 0 with every other column and 1 with themselves.
pub fn correlation_matrix(m: &FeatureMatrix) -> Result<Vec<Vec<f64>>, FeatureError> {
    let n = m.n_rows();
    if n < 2 {
        return Err(FeatureError::TooFewRows(n));
    }
    let d = m.n_cols();
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let c = m.column(j);
            let mean = c.iter().sum::<f64>() / n as f64;
            c.into_iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        out[i][i] = 1.0;
        for j in i + 1..d {
            let r = if norms[i] > 0.0 && norms[j] > 0.0 {
                (crate::linalg::dot(&cols[i], &cols[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    Ok(out)
}

/// Writes a square matrix as CSV with row and column headers.
pub fn write_matrix_csv<W: Write>(names: &[String], matrix: &[Vec<f64>], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (name, row) in names.iter().zip(matrix) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|x| format!("{x:.6}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> Lexicon {
        Lexicon::bundled()
    }

    fn para(text: &str) -> ParagraphRecord {
        ParagraphRecord {
            id: "p".into(),
            title: String::new(),
            headline: String::new(),
            section_label: String::new(),
            text: text.into(),
            label: Label::Human,
            pair_id: None,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn names_are_unique_and_ordered() {
        let names = feature_names();
        assert_eq!(names.len(), 32);
        assert_eq!(names.iter().collect::<HashSet<_>>().len(), 32);
        assert_eq!(names[0], "verb_ratio");
        assert_eq!(names[31], "subjunctive_mood_ratio");
        for f in Feature::ALL {
            assert_eq!(Feature::from_name(f.name()), Some(f));
        }
    }

    #[test]
    fn linguistic_cat_sat() {
        let l = extract_linguistic(&para("The cat sat."), &lex()).unwrap();
        assert!(close(l[0], 1.0 / 3.0));
        assert!(close(l[1], 1.0 / 3.0));
        assert_eq!(l[2..].iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn linguistic_interjections() {
        let l = extract_linguistic(&para("Wow! Ouch!"), &lex()).unwrap();
        assert_eq!(l, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn no_words_is_error() {
        assert!(matches!(extract_linguistic(&para("?! ..."), &lex()), Err(FeatureError::NoWords)));
        assert!(matches!(extract_structural(&para("12 34."), &lex()), Err(FeatureError::NoLetters)));
    }

    #[test]
    fn burstiness_definition() {
        // counts {a:3, b:1}: mean 2, population variance 1
        let s = extract_structural(&para("a a a b"), &lex()).unwrap();
        assert!(close(s[5], 0.5));
        let s = extract_structural(&para("one two three four."), &lex()).unwrap();
        assert_eq!(s[5], 0.0);
        assert_eq!(s[3], 1.0);
    }

    #[test]
    fn complexity_and_complex_ratio() {
        let s = extract_structural(&para("I left because it rained. The cat sat."), &lex()).unwrap();
        assert!(close(s[4], 1.5));
        assert!(close(s[9], 0.5));
        assert_eq!(s[6], 2.0);
        assert_eq!(s[7], 8.0);
        assert!(close(s[0], 4.0));
    }

    #[test]
    fn letter_ratios_sum_to_one() {
        let s = extract_structural(&para("Hello World, this IS a Test."), &lex()).unwrap();
        assert!(close(s[1] + s[2], 1.0));
    }

    #[test]
    fn semantic_fallbacks_and_patterns() {
        let m = extract_semantic(&para("The box sat on a table."), &lex()).unwrap();
        assert_eq!((m[0], m[1]), (0.0, 0.0));
        let m = extract_semantic(&para("He is as brave as a lion."), &lex()).unwrap();
        assert_eq!(m[3], 1.0);
        let m = extract_semantic(&para("The big large box."), &lex()).unwrap();
        assert!(close(m[4], 0.25));
        let m = extract_semantic(&para("She sings like a bird. I like cats."), &lex()).unwrap();
        assert!(close(m[3], 0.5));
    }

    #[test]
    fn antonyms_and_sentiment() {
        let m = extract_semantic(&para("Good days and bad days."), &lex()).unwrap();
        assert!(close(m[5], 2.0 / 5.0));
        assert!(close(m[0], 0.0));
        assert_eq!(m[1], 1.0);
    }

    #[test]
    fn interaction_rules() {
        let i = extract_interaction(&para("Stop. Do not run!"), &lex()).unwrap();
        assert_eq!(i[6], 1.0);
        assert_eq!(i[3], 0.5);
        assert_eq!(i[5], 0.5);
        assert_eq!(i[4], 0.0);
        let i = extract_interaction(&para("The ball was thrown."), &lex()).unwrap();
        assert_eq!(i[0], 0.5);
    }

    #[test]
    fn speech_conditionals_and_mood() {
        let text = "He said \"go home.\" She told me he left. If you go, call. I wish it were warm. You could try it?";
        let i = extract_interaction(&para(text), &lex()).unwrap();
        assert_eq!(i[1], (1.0 + 1.0) / (1.0 + 1.0));
        assert!(close(i[2], 1.0 / 5.0));
        assert!(close(i[4], 1.0 / 5.0));
        assert!(close(i[7], 2.0 / 5.0));
    }

    #[test]
    fn extract_all_concatenates() {
        let lex = lex();
        let p = para("Wow, the big dog ran fast! Did it stop? It was stopped by a man.");
        let v = extract_all(&p, &lex).unwrap();
        let mut expected = Vec::new();
        expected.extend(extract_linguistic(&p, &lex).unwrap());
        expected.extend(extract_structural(&p, &lex).unwrap());
        expected.extend(extract_semantic(&p, &lex).unwrap());
        expected.extend(extract_interaction(&p, &lex).unwrap());
        assert_eq!(v.0.to_vec(), expected);
    }

    #[test]
    fn correlation_self_and_negation() {
        let m = FeatureMatrix::from_rows(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, -1.0, 5.0], vec![2.0, -2.0, 5.0], vec![4.0, -4.0, 5.0]],
            vec![Label::Human; 3],
        );
        let c = correlation_matrix(&m).unwrap();
        assert_eq!(c[0][0], 1.0);
        assert!(close(c[0][1], -1.0));
        assert_eq!(c[0][2], 0.0);
        assert_eq!(c[2][2], 1.0);
        let one = FeatureMatrix::from_rows(vec!["a".into()], vec![vec![1.0]], vec![Label::Human]);
        assert!(matches!(correlation_matrix(&one), Err(FeatureError::TooFewRows(1))));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let m = FeatureMatrix::from_rows(
            vec!["x".into(), "y".into()],
            vec![vec![0.5, 1.25], vec![-3.0, 0.0]],
            vec![Label::Human, Label::Chatbot],
        );
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,label,id\n0.500000,1.250000,human,0\n"));
        assert_eq!(FeatureMatrix::read_csv(text.as_bytes()).unwrap(), m);
        assert!(FeatureMatrix::read_csv("x,y\n1,2\n".as_bytes()).is_err());
        assert!(FeatureMatrix::read_csv("x,label,id\nnan,human,1\n".as_bytes()).is_err());
    }
}
