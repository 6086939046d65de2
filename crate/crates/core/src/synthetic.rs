//! Seeded synthetic data for tests, benchmarks and demos.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Label, ParagraphRecord};
use crate::features::FeatureMatrix;

const NOUNS: &[&str] = &["garden", "river", "house", "teacher", "child", "market", "city", "road", "window", "book"];
const ADJECTIVES: &[&str] = &["quiet", "small", "bright", "old", "warm", "calm", "simple"];
const VERBS: &[&str] = &["opens", "finds", "carries", "watches", "builds", "cleans", "visits"];
const ADVERBS: &[&str] = &["truly", "indeed"];
const TITLES: &[&str] = &["Grow Herbs", "Fix a Bike", "Bake Bread", "Plan a Trip", "Paint a Room"];
const SECTIONS: &[&str] = &["Steps", "Tips", "Warnings"];

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words.choose(rng).copied().expect("non-empty word list")
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn plain_sentence(rng: &mut ChaCha8Rng) -> String {
    format!(
        "The {} {} {} the {}.",
        pick(rng, ADJECTIVES),
        pick(rng, NOUNS),
        pick(rng, VERBS),
        pick(rng, NOUNS)
    )
}

fn long_sentence(rng: &mut ChaCha8Rng) -> String {
    format!(
        "The {} {} {} {} the {} {} near the {} and the {}.",
        pick(rng, ADJECTIVES),
        pick(rng, NOUNS),
        pick(rng, ADVERBS),
        pick(rng, VERBS),
        pick(rng, ADJECTIVES),
        pick(rng, NOUNS),
        pick(rng, NOUNS),
        pick(rng, NOUNS)
    )
}

fn exclamation(rng: &mut ChaCha8Rng) -> String {
    format!("What a {} {}!", pick(rng, ADJECTIVES), pick(rng, NOUNS))
}

/// Paired corpus of `2 · n_pairs` paragraphs. Chatbot paragraphs use longer
/// sentences, add two exclamations and insert the synonym pair
/// "big"/"large".
pub fn separable_corpus(n_pairs: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(2 * n_pairs);
    for i in 0..n_pairs {
        let title = pick(&mut rng, TITLES).to_string();
        let section = pick(&mut rng, SECTIONS).to_string();
        let headline = capitalize(pick(&mut rng, NOUNS));
        let n = rng.random_range(4..=6);
        let human: Vec<String> = (0..n).map(|_| plain_sentence(&mut rng)).collect();
        let mut bot: Vec<String> = (0..n).map(|_| long_sentence(&mut rng)).collect();
        bot.push(exclamation(&mut rng));
        bot.push(exclamation(&mut rng));
        bot.push(format!(
            "A big {} is a large {}.",
            pick(&mut rng, NOUNS),
            pick(&mut rng, NOUNS)
        ));
        let id = format!("p{i:05}");
        for (label, text) in [(Label::Human, human.join(" ")), (Label::Chatbot, bot.join(" "))] {
            records.push(ParagraphRecord {
                id: format!("{id}-{}", label.as_str()),
                title: title.clone(),
                headline: headline.clone(),
                section_label: section.clone(),
                text,
                label,
                pair_id: Some(id.clone()),
            });
        }
    }
    Corpus::from_records(records, "synthetic").expect("synthetic records are valid")
}

/// Column names of [`two_signal_matrix`].
pub const PRIMARY: &str = "primary";
pub const BACKUP: &str = "backup";
pub const NOISE: &str = "noise";

/// Balanced matrix with a strong signal, an optional weaker redundant
/// signal, and noise.
///
/// `primary` is about 1 for humans and 2 for chatbots with a small spread,
/// so scaling chatbot values by 0.5 erases it. `backup`, when present,
/// separates the classes by 1.5 standard deviations.
pub fn two_signal_matrix(n: usize, with_backup: bool, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names = vec![PRIMARY.to_string()];
    if with_backup {
        names.push(BACKUP.to_string());
    }
    names.push(NOISE.to_string());
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Human } else { Label::Chatbot };
        let y = label.as_binary();
        let mut row = vec![1.0 + y + 0.05 * standard_normal(&mut rng)];
        if with_backup {
            row.push(1.5 * y + standard_normal(&mut rng));
        }
        row.push(standard_normal(&mut rng));
        rows.push(row);
        labels.push(label);
    }
    FeatureMatrix::from_rows(names, rows, labels)
}

/// Documents drawn from two disjoint vocabularies, `a0…a9` and `b0…b9`.
/// Each document uses a single cluster.
pub fn two_cluster_docs(n_docs: usize, doc_len: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_docs)
        .map(|i| {
            let prefix = if i % 2 == 0 { 'a' } else { 'b' };
            (0..doc_len)
                .map(|_| format!("{prefix}{}", rng.random_range(0..10)))
                .collect()
        })
        .collect()
}

/// Mean cosine within and between the two clusters of [`two_cluster_docs`].
pub fn cluster_cosines(table: &crate::embed::VectorTable) -> (f64, f64) {
    let words: Vec<(char, &[f64])> = ['a', 'b']
        .into_iter()
        .flat_map(|p| (0..10).map(move |i| (p, format!("{p}{i}"))))
        .filter_map(|(p, w)| table.get(&w).map(|v| (p, v)))
        .collect();
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let c = crate::embed::cosine(words[i].1, words[j].1);
            if words[i].0 == words[j].0 {
                intra += c;
                ni += 1;
            } else {
                inter += c;
                nx += 1;
            }
        }
    }
    (intra / ni.max(1) as f64, inter / nx.max(1) as f64)
}

/// Standard normal draw by Box-Muller.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
