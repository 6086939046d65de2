use std::path::PathBuf;

use paradetect::features::{
    correlation_matrix, extract_interaction, extract_linguistic, extract_semantic,
    extract_structural, extract_text, feature_matrix, feature_names,
};
use paradetect::lingua::load_lexicon;
use paradetect::synthetic::separable_corpus;
use paradetect::{Corpus, Feature, FeatureMatrix, Label, Lexicon, ParagraphRecord};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn record(id: &str, text: &str) -> ParagraphRecord {
    ParagraphRecord {
        id: id.into(),
        title: String::new(),
        headline: String::new(),
        section_label: String::new(),
        text: text.into(),
        label: Label::Human,
        pair_id: None,
    }
}

#[test]
fn sixty_word_paragraph_linguistic_tuple() {
    let lex = Lexicon::bundled();
    let text = std::fs::read_to_string(fixture("paragraph_60.txt")).unwrap();
    let got = extract_linguistic(&record("p", text.trim()), &lex).unwrap();
    // verb, noun, adjective, pronoun, adverb, preposition, conjunction, interjection
    let counts = [5.0, 15.0, 5.0, 9.0, 8.0, 6.0, 4.0, 1.0];
    for (g, c) in got.iter().zip(counts) {
        assert_eq!(*g, c / 60.0);
    }
    let v = extract_text(text.trim(), &lex).unwrap();
    assert_eq!(v.get(Feature::WordCount), 60.0);
    assert_eq!(v.get(Feature::SentenceCount), 6.0);
}

#[test]
fn the_cat_sat_ratios() {
    let v = extract_text("The cat sat.", &Lexicon::bundled()).unwrap();
    assert_eq!(v.get(Feature::VerbRatio), 1.0 / 3.0);
    assert_eq!(v.get(Feature::NounRatio), 1.0 / 3.0);
}

#[test]
fn simile_per_sentence() {
    let v = extract_text("He is as brave as a lion.", &Lexicon::bundled()).unwrap();
    assert_eq!(v.get(Feature::SimileFrequency), 1.0);
}

#[test]
fn synonym_per_word_with_fixture_lexicon() {
    let lex = load_lexicon(&fixture("lexicon_ten")).unwrap();
    let v = extract_text("The big large box.", &lex).unwrap();
    assert_eq!(v.get(Feature::SynonymFrequency), 0.25);
    assert_eq!(v.get(Feature::HomonymFrequency), 0.25);
    assert_eq!(v.get(Feature::SentimentPolarity), 0.05);
}

#[test]
fn vector_is_concatenation_of_categories() {
    let lex = Lexicon::bundled();
    let r = record("p", "She said that the old dog could not run. Was it tired? Stop!");
    let mut joined = Vec::new();
    joined.extend(extract_linguistic(&r, &lex).unwrap());
    joined.extend(extract_structural(&r, &lex).unwrap());
    joined.extend(extract_semantic(&r, &lex).unwrap());
    joined.extend(extract_interaction(&r, &lex).unwrap());
    assert_eq!(extract_text(&r.text, &lex).unwrap().as_slice(), joined.as_slice());
}

#[test]
fn three_record_matrix_shape() {
    let records = vec![
        record("a", "The cat sat."),
        record("b", "Dogs bark loudly at night!"),
        record("c", "Is it raining?"),
    ];
    let c = Corpus::from_records(records, "mem").unwrap();
    let m = feature_matrix(&c, &Lexicon::bundled()).unwrap();
    assert_eq!((m.n_rows(), m.n_cols()), (3, 32));
    assert_eq!(m.feature_names, feature_names());
    assert_eq!(m.ids, vec!["a", "b", "c"]);
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[test]
fn five_by_three_correlation_matches_brute_force() {
    let rows = vec![
        vec![1.0, 2.0, 0.5],
        vec![2.0, 1.0, 0.1],
        vec![3.0, 4.0, -0.3],
        vec![4.0, 3.0, 0.9],
        vec![5.0, 7.0, 0.0],
    ];
    let m = FeatureMatrix::from_rows(
        vec!["a".into(), "b".into(), "c".into()],
        rows,
        vec![Label::Human; 5],
    );
    let r = correlation_matrix(&m).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((r[i][j] - pearson(&m.column(i), &m.column(j))).abs() < 1e-12);
        }
    }
}

#[test]
fn synthetic_rows_respect_bounds() {
    let c = separable_corpus(50, 3);
    let m = feature_matrix(&c, &Lexicon::bundled()).unwrap();
    for row in &m.rows {
        check_bounds(row).unwrap();
    }
}

fn check_bounds(row: &[f64]) -> Result<(), String> {
    for f in Feature::ALL {
        let x = row[f.index()];
        if !x.is_finite() {
            return Err(format!("{} = {x}", f.name()));
        }
        let ok = match f {
            Feature::SentimentPolarity => (-1.0..=1.0).contains(&x),
            _ if f.is_unit_bounded() => (0.0..=1.0).contains(&x),
            _ => x >= 0.0,
        };
        if !ok {
            return Err(format!("{} = {x} out of range", f.name()));
        }
    }
    let linguistic: f64 = row[..8].iter().sum();
    if linguistic > 1.0 + 1e-12 {
        return Err(format!("linguistic ratios sum to {linguistic}"));
    }
    Ok(())
}

const PUNCT: [&str; 8] = [".", "!", "?", ",", ";", "\"", "'", "..."];

fn random_paragraph(rng: &mut ChaCha8Rng, vocab: &[String]) -> String {
    let n = rng.random_range(1..80);
    let mut parts = Vec::with_capacity(n);
    for _ in 0..n {
        let part = match rng.random_range(0..10) {
            0 => PUNCT[rng.random_range(0..PUNCT.len())].to_string(),
            1 => (0..rng.random_range(1..8))
                .map(|_| rng.random_range(b'A'..=b'z') as char)
                .collect(),
            2 => rng.random_range(0..10_000).to_string(),
            _ => vocab[rng.random_range(0..vocab.len())].clone(),
        };
        parts.push(part);
    }
    parts.join(" ")
}

#[test]
fn ten_thousand_random_paragraphs_are_finite() {
    let lex = Lexicon::bundled();
    let mut vocab: Vec<String> = lex.pos_table.keys().cloned().collect();
    vocab.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut extracted = 0;
    for _ in 0..10_000 {
        let text = random_paragraph(&mut rng, &vocab);
        if let Ok(v) = extract_text(&text, &lex) {
            check_bounds(v.as_slice()).map_err(|e| format!("{e} for {text:?}")).unwrap();
            extracted += 1;
        }
    }
    assert!(extracted > 9_000);
}

fn paragraph() -> impl Strategy<Value = String> {
    let words = prop::sample::select(vec![
        "the", "cat", "sat", "quickly", "she", "said", "not", "if", "because", "big", "large",
        "happy", "sad", "was", "thrown", "wow", "under", "and", "Stop", "London",
    ]);
    let sentence = (prop::collection::vec(words, 1..12), prop::sample::select(vec![".", "!", "?"]))
        .prop_map(|(ws, end)| format!("{}{end}", ws.join(" ")));
    prop::collection::vec(sentence, 1..6).prop_map(|s| s.join(" "))
}

proptest! {
    #[test]
    fn structural_identities(text in paragraph()) {
        let v = extract_text(&text, &Lexicon::bundled()).unwrap();
        prop_assert!((v.get(Feature::LowercaseLetterRatio) + v.get(Feature::CapitalLetterRatio) - 1.0).abs() < 1e-12);
        let product = v.get(Feature::SentenceCount) * v.get(Feature::AverageSentenceLength);
        prop_assert!((product - v.get(Feature::WordCount)).abs() < 1e-9);
        check_bounds(v.as_slice()).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn self_concatenation_keeps_tag_ratios(text in paragraph()) {
        let lex = Lexicon::bundled();
        let once = extract_text(&text, &lex).unwrap();
        let twice = extract_text(&format!("{text} {text}"), &lex).unwrap();
        for f in [Feature::VerbRatio, Feature::NounRatio, Feature::StopwordRatio] {
            prop_assert!((once.get(f) - twice.get(f)).abs() < 1e-12, "{}", f.name());
        }
        prop_assert!(twice.get(Feature::LexicalDiversity) <= once.get(Feature::LexicalDiversity));
    }

    #[test]
    fn correlation_is_symmetric_psd(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 3..20),
                                    probes in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 5)) {
        let n = rows.len();
        let m = FeatureMatrix::from_rows((0..4).map(|j| format!("f{j}")).collect(), rows, vec![Label::Human; n]);
        let r = correlation_matrix(&m).unwrap();
        for i in 0..4 {
            prop_assert!((r[i][i] - 1.0).abs() < 1e-12);
            for j in 0..4 {
                prop_assert_eq!(r[i][j], r[j][i]);
            }
        }
        for x in &probes {
            let q: f64 = (0..4).map(|i| (0..4).map(|j| x[i] * r[i][j] * x[j]).sum::<f64>()).sum();
            prop_assert!(q >= -1e-9);
        }
    }
}
