//! Tokenization, sentence segmentation and lexicon-driven part-of-speech
//! tagging.
//!
//! Everything here is deterministic and rule based: the tagger assigns each
//! word its highest-ranked lexicon tag and falls back to suffix rules for
//! unknown words.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pos {
    Noun,
    Verb,
    AuxVerb,
    Adjective,
    Adverb,
    Pronoun,
    Preposition,
    Conjunction,
    Interjection,
    Determiner,
    Number,
    Punctuation,
    Other,
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::AuxVerb => "aux_verb",
            Pos::Adjective => "adjective",
            Pos::Adverb => "adverb",
            Pos::Pronoun => "pronoun",
            Pos::Preposition => "preposition",
            Pos::Conjunction => "conjunction",
            Pos::Interjection => "interjection",
            Pos::Determiner => "determiner",
            Pos::Number => "number",
            Pos::Punctuation => "punctuation",
            Pos::Other => "other",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "noun" => Pos::Noun,
            "verb" => Pos::Verb,
            "aux_verb" => Pos::AuxVerb,
            "adjective" => Pos::Adjective,
            "adverb" => Pos::Adverb,
            "pronoun" => Pos::Pronoun,
            "preposition" => Pos::Preposition,
            "conjunction" => Pos::Conjunction,
            "interjection" => Pos::Interjection,
            "determiner" => Pos::Determiner,
            "number" => Pos::Number,
            "punctuation" => Pos::Punctuation,
            "other" => Pos::Other,
            other => return Err(format!("unknown part-of-speech tag `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub pos: Pos,
    pub is_alpha: bool,
    pub is_stopword: bool,
}

impl Token {
    fn new(surface: &str) -> Self {
        let is_word = surface.chars().any(char::is_alphanumeric);
        let pos = if !is_word {
            Pos::Punctuation
        } else if is_numeric(surface) {
            Pos::Number
        } else {
            Pos::Other
        };
        Token {
            surface: surface.to_string(),
            lower: surface.to_lowercase(),
            pos,
            is_alpha: surface.chars().any(char::is_alphabetic),
            is_stopword: false,
        }
    }

    /// Word tokens are every token that is not punctuation.
    pub fn is_word(&self) -> bool {
        self.pos != Pos::Punctuation
    }
}

fn is_numeric(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_numeric())
        && s.chars().all(|c| c.is_numeric() || c == '.' || c == ',')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminator {
    Period,
    Question,
    Exclamation,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub terminator: Terminator,
}

impl Sentence {
    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word())
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }
}

const APOSTROPHES: [char; 2] = ['\'', '\u{2019}'];

fn is_apostrophe(c: char) -> bool {
    APOSTROPHES.contains(&c)
}

/// Splits text into tokens with their byte ranges.
fn lex(text: &str) -> Vec<(Token, Range<usize>)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_alphanumeric() {
            out.push((Token::new(&text[byte_at(i)..byte_at(i + 1)]), byte_at(i)..byte_at(i + 1)));
            i += 1;
            continue;
        }
        let start = i;
        let mut j = i + 1;
        while j < chars.len() {
            let cj = chars[j].1;
            let next_alnum = chars.get(j + 1).is_some_and(|&(_, n)| n.is_alphanumeric());
            let joins = cj.is_alphanumeric()
                || ((is_apostrophe(cj) || cj == '-') && next_alnum)
                || ((cj == '.' || cj == ',')
                    && chars[j - 1].1.is_numeric()
                    && chars.get(j + 1).is_some_and(|&(_, n)| n.is_numeric()));
            if !joins {
                break;
            }
            j += 1;
        }
        let (run_start, run_end) = (byte_at(start), byte_at(j));
        split_clitics(&text[run_start..run_end], run_start, &mut out);
        i = j;
    }
    out
}

/// Breaks a word run at apostrophes: `don't` → `do` `n't`, `it's` → `it` `'s`.
fn split_clitics(run: &str, offset: usize, out: &mut Vec<(Token, Range<usize>)>) {
    let mut piece_start = 0;
    let positions: Vec<usize> = run
        .char_indices()
        .filter(|&(_, c)| is_apostrophe(c))
        .map(|(b, _)| b)
        .collect();
    for (k, &apos) in positions.iter().enumerate() {
        let apos_len = run[apos..].chars().next().map_or(1, char::len_utf8);
        let suffix_end = positions.get(k + 1).copied().unwrap_or(run.len());
        let suffix = &run[apos + apos_len..suffix_end];
        let before = &run[piece_start..apos];
        let negation = suffix.eq_ignore_ascii_case("t")
            && before.chars().last().is_some_and(|c| c == 'n' || c == 'N');
        let cut = if negation { apos - 1 } else { apos };
        if cut > piece_start {
            let piece = &run[piece_start..cut];
            out.push((Token::new(piece), offset + piece_start..offset + cut));
        }
        piece_start = cut;
        if negation {
            // emit "n't" as one piece and continue after it
            let end = suffix_end;
            out.push((Token::new(&run[cut..end]), offset + cut..offset + end));
            piece_start = end;
        }
    }
    if piece_start < run.len() {
        out.push((Token::new(&run[piece_start..]), offset + piece_start..offset + run.len()));
    }
}

/// Splits text on whitespace and punctuation. Each punctuation character is
/// its own token; internal apostrophes, hyphens and digit separators stay
/// inside words; negative contractions keep `n't` separate.
pub fn tokenize(text: &str) -> Vec<Token> {
    lex(text).into_iter().map(|(t, _)| t).collect()
}

/// Number of word (non-punctuation) tokens in `text`.
pub fn word_count(text: &str) -> usize {
    lex(text).iter().filter(|(t, _)| t.is_word()).count()
}

const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "e.g.", "i.e.",
    "inc.", "ltd.", "co.", "corp.", "approx.", "fig.", "dept.", "est.", "u.s.", "a.m.", "p.m.",
    "jan.", "feb.", "aug.", "sept.", "oct.", "nov.", "dec.", "mt.", "ave.", "gen.", "gov.",
    "sen.", "rep.", "capt.", "lt.", "col.",
];

const CLOSERS: &[&str] = &["\"", "\u{201D}", "'", "\u{2019}", ")", "]"];

fn terminator_char(s: &str) -> Option<char> {
    match s {
        "." => Some('.'),
        "!" => Some('!'),
        "?" => Some('?'),
        _ => None,
    }
}

/// Splits text into sentences at `.`, `!` or `?` followed by whitespace or the
/// end of the text. Known abbreviations do not end a sentence. Every token of
/// the text lands in exactly one sentence.
pub fn segment(text: &str) -> Vec<Sentence> {
    let lexed = lex(text);
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut i = 0;
    while i < lexed.len() {
        let Some(first) = terminator_char(&lexed[i].0.surface) else {
            current.push(lexed[i].0.clone());
            i += 1;
            continue;
        };
        // collect the adjacent run of terminators and closing marks
        let mut kinds = vec![first];
        let mut j = i + 1;
        while j < lexed.len() && lexed[j].1.start == lexed[j - 1].1.end {
            match terminator_char(&lexed[j].0.surface) {
                Some(c) => kinds.push(c),
                None if CLOSERS.contains(&lexed[j].0.surface.as_str()) => {}
                None => break,
            }
            j += 1;
        }
        let group_end = lexed[j - 1].1.end;
        let at_boundary = text[group_end..]
            .chars()
            .next()
            .is_none_or(char::is_whitespace);
        let abbreviation = kinds == ['.'] && j == i + 1 && is_abbreviation(&lexed, i);
        current.extend(lexed[i..j].iter().map(|(t, _)| t.clone()));
        i = j;
        if at_boundary && !abbreviation {
            let terminator = if kinds.contains(&'?') {
                Terminator::Question
            } else if kinds.contains(&'!') {
                Terminator::Exclamation
            } else {
                Terminator::Period
            };
            sentences.push(Sentence {
                tokens: std::mem::take(&mut current),
                terminator,
            });
        }
    }
    if !current.is_empty() {
        sentences.push(Sentence {
            tokens: current,
            terminator: Terminator::None,
        });
    }
    sentences
}

/// Whether the `.` at `dot` closes an abbreviation: the whitespace-free chain
/// of tokens ending at the dot is in the abbreviation list.
fn is_abbreviation(lexed: &[(Token, Range<usize>)], dot: usize) -> bool {
    let mut start = dot;
    while start > 0 && lexed[start - 1].1.end == lexed[start].1.start {
        start -= 1;
    }
    if start == dot {
        return false;
    }
    let chain: String = lexed[start..=dot]
        .iter()
        .map(|(t, _)| t.lower.as_str())
        .collect();
    ABBREVIATIONS.contains(&chain.as_str())
}

/// Assigns each token its part of speech and stopword flag.
pub fn tag_pos(tokens: &[Token], lex: &Lexicon) -> Vec<Token> {
    tokens
        .iter()
        .map(|t| {
            let mut t = t.clone();
            if t.pos != Pos::Punctuation {
                t.pos = lex.tag_of(&t.lower);
                t.is_stopword = lex.stopwords.contains(&t.lower);
            }
            t
        })
        .collect()
}

/// Segments and tags text in one pass.
pub fn analyze(text: &str, lex: &Lexicon) -> Vec<Sentence> {
    segment(text)
        .into_iter()
        .map(|s| Sentence {
            tokens: tag_pos(&s.tokens, lex),
            terminator: s.terminator,
        })
        .collect()
}

fn suffix_tag(word: &str) -> Pos {
    if word.ends_with("ly") {
        Pos::Adverb
    } else if word.ends_with("ing") || word.ends_with("ed") {
        Pos::Verb
    } else if word.ends_with("tion") || word.ends_with("ness") {
        Pos::Noun
    } else if word.ends_with("ous") || word.ends_with("ful") {
        Pos::Adjective
    } else {
        Pos::Noun
    }
}

pub const SUBORDINATORS: &[&str] = &[
    "because", "although", "which", "that", "who", "while", "since", "if", "unless", "whereas",
];

fn is_finite_verb(t: &Token) -> bool {
    matches!(t.pos, Pos::Verb | Pos::AuxVerb) && !t.lower.ends_with("ing")
}

/// Clause count of a tagged sentence: one, plus each subordinating
/// conjunction or relative pronoun after the first word, plus each comma with
/// a finite verb on both sides (within the neighbouring comma-delimited
/// segments).
pub fn count_clauses(s: &Sentence, _lex: &Lexicon) -> usize {
    let subordinate = s
        .words()
        .skip(1)
        .filter(|t| SUBORDINATORS.contains(&t.lower.as_str()))
        .count();
    let segments: Vec<&[Token]> = s.tokens.split(|t| t.surface == ",").collect();
    let joined = segments
        .windows(2)
        .filter(|w| w[0].iter().any(is_finite_verb) && w[1].iter().any(is_finite_verb))
        .count();
    1 + subordinate + joined
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon file `{file}` is missing: {source}")]
    MissingFile {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sentiment {
    pub polarity: f64,
    pub subjective: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    pub pos_table: HashMap<String, Vec<Pos>>,
    pub stopwords: HashSet<String>,
    pub homonyms: HashSet<String>,
    pub synsets: HashMap<String, Vec<String>>,
    /// Symmetric adjacency built from unordered antonym pairs.
    pub antonyms: HashMap<String, HashSet<String>>,
    pub sentiment: HashMap<String, Sentiment>,
    pub base_verbs: HashSet<String>,
    pub past_participles: HashSet<String>,
    pub reporting_verbs: HashSet<String>,
}

pub const POS_FILE: &str = "pos.tsv";
pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const HOMONYMS_FILE: &str = "homonyms.txt";
pub const SYNSETS_FILE: &str = "synsets.tsv";
pub const ANTONYMS_FILE: &str = "antonyms.tsv";
pub const SENTIMENT_FILE: &str = "sentiment.tsv";
pub const BASE_VERBS_FILE: &str = "base_verbs.txt";
pub const PAST_PARTICIPLES_FILE: &str = "past_participles.txt";
pub const REPORTING_VERBS_FILE: &str = "reporting_verbs.txt";

pub const LEXICON_FILES: [&str; 9] = [
    POS_FILE,
    STOPWORDS_FILE,
    HOMONYMS_FILE,
    SYNSETS_FILE,
    ANTONYMS_FILE,
    SENTIMENT_FILE,
    BASE_VERBS_FILE,
    PAST_PARTICIPLES_FILE,
    REPORTING_VERBS_FILE,
];

const BUNDLED: [(&str, &str); 9] = [
    (POS_FILE, include_str!("../lexicon/pos.tsv")),
    (STOPWORDS_FILE, include_str!("../lexicon/stopwords.txt")),
    (HOMONYMS_FILE, include_str!("../lexicon/homonyms.txt")),
    (SYNSETS_FILE, include_str!("../lexicon/synsets.tsv")),
    (ANTONYMS_FILE, include_str!("../lexicon/antonyms.tsv")),
    (SENTIMENT_FILE, include_str!("../lexicon/sentiment.tsv")),
    (BASE_VERBS_FILE, include_str!("../lexicon/base_verbs.txt")),
    (PAST_PARTICIPLES_FILE, include_str!("../lexicon/past_participles.txt")),
    (REPORTING_VERBS_FILE, include_str!("../lexicon/reporting_verbs.txt")),
];

/// Entry counts per table, as reported after loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LexiconCounts {
    pub pos: usize,
    pub stopwords: usize,
    pub homonyms: usize,
    pub synsets: usize,
    pub antonym_pairs: usize,
    pub sentiment: usize,
    pub base_verbs: usize,
    pub past_participles: usize,
    pub reporting_verbs: usize,
}

/// Data lines of a table file: `(line_number, fields)` with comments and
/// blank lines removed.
fn entries(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').map(str::trim).collect()))
        }
    })
}

fn malformed(file: &str, line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Malformed {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn key(file: &str, line: usize, word: &str) -> Result<String, LexiconError> {
    if word.is_empty() {
        return Err(malformed(file, line, "empty word"));
    }
    Ok(word.to_lowercase())
}

fn word_set(file: &str, text: &str) -> Result<HashSet<String>, LexiconError> {
    entries(text)
        .map(|(line, fields)| {
            if fields.len() != 1 {
                return Err(malformed(file, line, "expected a single word"));
            }
            key(file, line, fields[0])
        })
        .collect()
}

fn keyed_list(file: &str, text: &str) -> Result<Vec<(usize, String, Vec<String>)>, LexiconError> {
    entries(text)
        .map(|(line, fields)| {
            if fields.len() != 2 {
                return Err(malformed(file, line, "expected word<TAB>payload"));
            }
            let items: Vec<String> = fields[1]
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if items.is_empty() {
                return Err(malformed(file, line, "empty payload"));
            }
            Ok((line, key(file, line, fields[0])?, items))
        })
        .collect()
}

impl Lexicon {
    /// The lexicon compiled into the crate.
    pub fn bundled() -> Lexicon {
        Lexicon::from_sources(|name| {
            BUNDLED
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, text)| Ok(text.to_string()))
                .expect("bundled table present")
        })
        .expect("bundled lexicon is well formed")
    }

    /// Builds a lexicon from table contents supplied per file name.
    pub fn from_sources<F>(mut source: F) -> Result<Lexicon, LexiconError>
    where
        F: FnMut(&str) -> Result<String, LexiconError>,
    {
        let mut lex = Lexicon::default();

        let text = source(POS_FILE)?;
        for (line, word, tags) in keyed_list(POS_FILE, &text)? {
            let tags = tags
                .iter()
                .map(|t| t.parse::<Pos>().map_err(|e| malformed(POS_FILE, line, e)))
                .collect::<Result<Vec<_>, _>>()?;
            lex.pos_table.insert(word, tags);
        }

        lex.stopwords = word_set(STOPWORDS_FILE, &source(STOPWORDS_FILE)?)?;
        lex.homonyms = word_set(HOMONYMS_FILE, &source(HOMONYMS_FILE)?)?;

        let text = source(SYNSETS_FILE)?;
        for (_, word, ids) in keyed_list(SYNSETS_FILE, &text)? {
            lex.synsets.insert(word, ids);
        }

        let text = source(ANTONYMS_FILE)?;
        for (line, fields) in entries(&text) {
            if fields.len() != 2 {
                return Err(malformed(ANTONYMS_FILE, line, "expected word<TAB>word"));
            }
            let a = key(ANTONYMS_FILE, line, fields[0])?;
            let b = key(ANTONYMS_FILE, line, fields[1])?;
            if a == b {
                return Err(malformed(ANTONYMS_FILE, line, "word cannot be its own antonym"));
            }
            lex.antonyms.entry(a.clone()).or_default().insert(b.clone());
            lex.antonyms.entry(b).or_default().insert(a);
        }

        let text = source(SENTIMENT_FILE)?;
        for (line, fields) in entries(&text) {
            if fields.len() != 3 {
                return Err(malformed(
                    SENTIMENT_FILE,
                    line,
                    "expected word<TAB>polarity<TAB>subjective",
                ));
            }
            let word = key(SENTIMENT_FILE, line, fields[0])?;
            let polarity: f64 = fields[1]
                .parse()
                .map_err(|_| malformed(SENTIMENT_FILE, line, "polarity is not a number"))?;
            if !(-1.0..=1.0).contains(&polarity) {
                return Err(malformed(SENTIMENT_FILE, line, "polarity outside [-1, 1]"));
            }
            let subjective = match fields[2] {
                "1" => true,
                "0" => false,
                _ => return Err(malformed(SENTIMENT_FILE, line, "subjective flag must be 0 or 1")),
            };
            lex.sentiment.insert(word, Sentiment { polarity, subjective });
        }

        lex.base_verbs = word_set(BASE_VERBS_FILE, &source(BASE_VERBS_FILE)?)?;
        lex.past_participles = word_set(PAST_PARTICIPLES_FILE, &source(PAST_PARTICIPLES_FILE)?)?;
        lex.reporting_verbs = word_set(REPORTING_VERBS_FILE, &source(REPORTING_VERBS_FILE)?)?;
        Ok(lex)
    }

    pub fn counts(&self) -> LexiconCounts {
        LexiconCounts {
            pos: self.pos_table.len(),
            stopwords: self.stopwords.len(),
            homonyms: self.homonyms.len(),
            synsets: self.synsets.len(),
            antonym_pairs: self.antonyms.values().map(HashSet::len).sum::<usize>() / 2,
            sentiment: self.sentiment.len(),
            base_verbs: self.base_verbs.len(),
            past_participles: self.past_participles.len(),
            reporting_verbs: self.reporting_verbs.len(),
        }
    }

    /// Highest-ranked tag for a lowercase word, with suffix fallback.
    pub fn tag_of(&self, lower: &str) -> Pos {
        if let Some(tag) = self.pos_table.get(lower).and_then(|tags| tags.first()) {
            return *tag;
        }
        if is_numeric(lower) {
            return Pos::Number;
        }
        suffix_tag(lower)
    }

    pub fn are_antonyms(&self, a: &str, b: &str) -> bool {
        self.antonyms.get(a).is_some_and(|s| s.contains(b))
    }

    pub fn share_synset(&self, a: &str, b: &str) -> bool {
        match (self.synsets.get(a), self.synsets.get(b)) {
            (Some(x), Some(y)) => x.iter().any(|id| y.contains(id)),
            _ => false,
        }
    }
}

/// Loads the nine lexicon tables from `dir`.
pub fn load_lexicon(dir: &Path) -> Result<Lexicon, LexiconError> {
    Lexicon::from_sources(|name| {
        std::fs::read_to_string(dir.join(name)).map_err(|source| LexiconError::MissingFile {
            file: name.to_string(),
            source,
        })
    })
}

/// Writes the bundled tables into `dir`, e.g. as a starting point for a
/// custom lexicon.
pub fn write_bundled(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in BUNDLED {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    #[test]
    fn simple_sentence() {
        assert_eq!(surfaces(&tokenize("The cat sat.")), ["The", "cat", "sat", "."]);
    }

    #[test]
    fn contractions() {
        assert_eq!(surfaces(&tokenize("don't")), ["do", "n't"]);
        assert_eq!(surfaces(&tokenize("It's fine")), ["It", "'s", "fine"]);
        assert_eq!(surfaces(&tokenize("They can't, won't.")), ["They", "ca", "n't", ",", "wo", "n't", "."]);
        assert_eq!(surfaces(&tokenize("do n't")), ["do", "n't"]);
        assert_eq!(surfaces(&tokenize("we\u{2019}re")), ["we", "\u{2019}re"]);
    }

    #[test]
    fn hyphens_numbers_and_quotes() {
        assert_eq!(
            surfaces(&tokenize("A well-known 3.5% rise, \"big\" (1,000)")),
            ["A", "well-known", "3.5", "%", "rise", ",", "\"", "big", "\"", "(", "1,000", ")"]
        );
        assert_eq!(surfaces(&tokenize("end-")), ["end", "-"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \n\t").is_empty());
    }

    #[test]
    fn punctuation_is_not_alpha() {
        for t in tokenize("Hi, there! 42 ... ok?") {
            if t.pos == Pos::Punctuation {
                assert!(!t.is_alpha);
            }
            assert_eq!(t.lower, t.surface.to_lowercase());
        }
    }

    #[test]
    fn segment_terminators() {
        let s = segment("Hi! How are you? Fine.");
        assert_eq!(s.len(), 3);
        let kinds: Vec<Terminator> = s.iter().map(|s| s.terminator).collect();
        assert_eq!(kinds, [Terminator::Exclamation, Terminator::Question, Terminator::Period]);
    }

    #[test]
    fn segment_abbreviation() {
        let s = segment("See Dr. Smith.");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].terminator, Terminator::Period);
        assert_eq!(segment("Use tools, e.g. a brush. Then paint.").len(), 2);
    }

    #[test]
    fn segment_without_terminator() {
        let s = segment("no ending here");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].terminator, Terminator::None);
        assert!(segment("").is_empty());
    }

    #[test]
    fn segment_keeps_closing_quote_and_needs_space() {
        let s = segment("He said \"stop.\" Then left. Version 2.0 works");
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].tokens.last().unwrap().surface, "\"");
        let s = segment("Wait...what? Yes?!");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].terminator, Terminator::Question);
        assert_eq!(s[1].terminator, Terminator::Question);
    }

    #[test]
    fn tagging() {
        let lex = Lexicon::bundled();
        let tags: Vec<Pos> = tag_pos(&tokenize("The cat sat"), &lex).iter().map(|t| t.pos).collect();
        assert_eq!(tags, [Pos::Determiner, Pos::Noun, Pos::Verb]);
        assert_eq!(lex.tag_of("blorply"), Pos::Adverb);
        assert_eq!(lex.tag_of("zorb"), Pos::Noun);
        assert_eq!(lex.tag_of("glimfing"), Pos::Verb);
        assert_eq!(lex.tag_of("snorkeled"), Pos::Verb);
        assert_eq!(lex.tag_of("frobnation"), Pos::Noun);
        assert_eq!(lex.tag_of("quxness"), Pos::Noun);
        assert_eq!(lex.tag_of("blarghous"), Pos::Adjective);
        assert_eq!(lex.tag_of("wumful"), Pos::Adjective);
        assert_eq!(lex.tag_of("1984"), Pos::Number);
        let t = tag_pos(&tokenize("the ."), &lex);
        assert!(t[0].is_stopword);
        assert_eq!(t[1].pos, Pos::Punctuation);
    }

    #[test]
    fn clauses() {
        let lex = Lexicon::bundled();
        let count = |text: &str| count_clauses(&analyze(text, &lex)[0], &lex);
        assert_eq!(count("The cat sat."), 1);
        assert_eq!(count("I left because it rained."), 2);
        assert_eq!(count("If you stop, we stay."), 2);
        assert_eq!(count("We stay, you stop, which helps."), 4);
    }

    #[test]
    fn bundled_lexicon_has_every_table() {
        let c = Lexicon::bundled().counts();
        for n in [
            c.pos,
            c.stopwords,
            c.homonyms,
            c.synsets,
            c.antonym_pairs,
            c.sentiment,
            c.base_verbs,
            c.past_participles,
            c.reporting_verbs,
        ] {
            assert!(n > 0, "{c:?}");
        }
    }

    #[test]
    fn bundled_keys_are_lowercase_and_polarities_bounded() {
        let lex = Lexicon::bundled();
        assert!(lex.pos_table.keys().all(|k| *k == k.to_lowercase()));
        assert!(lex.sentiment.values().all(|s| (-1.0..=1.0).contains(&s.polarity)));
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = Lexicon::from_sources(|name| {
            Ok(match name {
                SENTIMENT_FILE => "# c\ngood\t0.5\t1\nbad\tminus\t1\n".to_string(),
                _ => String::new(),
            })
        })
        .unwrap_err();
        match err {
            LexiconError::Malformed { file, line, .. } => {
                assert_eq!(file, SENTIMENT_FILE);
                assert_eq!(line, 3);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_tag_rejected() {
        let err = Lexicon::from_sources(|name| {
            Ok(if name == POS_FILE { "cat\tanimal\n".into() } else { String::new() })
        })
        .unwrap_err();
        assert!(matches!(err, LexiconError::Malformed { line: 1, .. }));
    }
}
