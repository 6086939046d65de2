use std::path::PathBuf;

use paradetect::embed::{
    build_cooccurrence, doc_embed, glove_weight, load_vectors, parse_vectors, tfidf_fit,
    tfidf_transform, train_cbow, train_glove, CbowParams, EmbedError, GloveParams, VectorTable,
};
use paradetect::synthetic::two_cluster_docs;
use proptest::prelude::*;
use sha2::{Digest, Sha256};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn toks(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

#[test]
fn three_word_file() {
    let t = load_vectors(&fixture("vectors_3.txt")).unwrap();
    assert_eq!((t.len(), t.dim()), (3, 4));
    assert_eq!(t.get("fish").unwrap(), &[0.5, -0.5, 0.25, 2.0]);
}

#[test]
fn short_line_is_named() {
    let err = load_vectors(&fixture("vectors_bad.txt")).unwrap_err();
    assert!(matches!(err, EmbedError::Dimension { line: 2, expected: 4, got: 3 }), "{err}");
}

#[test]
fn hundred_word_file_checksum() {
    let t = load_vectors(&fixture("vectors_100.txt")).unwrap();
    assert_eq!((t.len(), t.dim()), (100, 8));
    let mut h = Sha256::new();
    for v in t.vectors() {
        for x in v {
            h.update(x.to_le_bytes());
        }
    }
    assert_eq!(
        hex::encode(h.finalize()),
        "27218a2965732c7d1954f97eecba7e6616f11fa0bd9db034837deb7cfe46c3f2"
    );
    assert_eq!(t.words()[42], "w042");
}

#[test]
fn five_token_document_average() {
    let t = load_vectors(&fixture("vectors_3.txt")).unwrap();
    let v = doc_embed(&toks(&["cat", "dog", "fish", "cat", "bird"]), &t);
    assert_eq!(v, vec![0.625, 0.125, 0.0625, 0.5]);
}

#[test]
fn opposite_vectors_cancel() {
    let t = VectorTable::new(toks(&["up", "down"]), vec![vec![1.5, -2.0], vec![-1.5, 2.0]]);
    assert_eq!(doc_embed(&toks(&["up", "down"]), &t), vec![0.0, 0.0]);
}

#[test]
fn two_document_hand_example() {
    let docs = vec![toks(&["a", "b", "a", "c"]), toks(&["b", "c"])];
    let vocab = tfidf_fit(&docs, 100).unwrap();
    let row = tfidf_transform(&vocab, &docs[0]);
    let a = vocab.index_of("a").unwrap();
    assert!((row.get(a) - 0.5 * 2f64.ln()).abs() < 1e-15);
    assert!((row.get(a) - 0.3466).abs() < 5e-5);
    assert_eq!(row.get(vocab.index_of("b").unwrap()), 0.0);
}

#[test]
fn glove_weight_at_reference_points() {
    let (x_max, alpha) = (100.0, 0.75);
    assert_eq!(glove_weight(0.5 * x_max, x_max, alpha), 0.5f64.powf(alpha));
    assert_eq!(glove_weight(x_max, x_max, alpha), 1.0);
    assert_eq!(glove_weight(2.0 * x_max, x_max, alpha), 1.0);
}

#[test]
fn glove_loss_settles_after_third_epoch() {
    let docs = two_cluster_docs(60, 15, 2);
    let x = build_cooccurrence(&docs, 5).unwrap();
    let trained = train_glove(
        &x,
        &GloveParams {
            dim: 16,
            epochs: 30,
            seed: 1,
            ..GloveParams::default()
        },
    )
    .unwrap();
    let losses = &trained.epoch_losses;
    assert_eq!(losses.len(), 30);
    for w in losses[3..].windows(2) {
        assert!(w[1] <= w[0] * 1.01, "{} then {}", w[0], w[1]);
    }
}

#[test]
fn trainers_are_deterministic() {
    let docs = two_cluster_docs(40, 12, 5);
    let p = CbowParams {
        dim: 8,
        epochs: 3,
        seed: 3,
        ..CbowParams::default()
    };
    let (a, b) = (train_cbow(&docs, &p).unwrap(), train_cbow(&docs, &p).unwrap());
    assert_eq!(a.table, b.table);
    assert_eq!(a.epoch_losses, b.epoch_losses);

    let x = build_cooccurrence(&docs, 4).unwrap();
    let g = GloveParams {
        dim: 8,
        epochs: 3,
        seed: 3,
        ..GloveParams::default()
    };
    assert_eq!(train_glove(&x, &g).unwrap().table, train_glove(&x, &g).unwrap().table);
}

fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
    let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]).prop_map(String::from);
    prop::collection::vec(prop::collection::vec(word, 1..=10), 1..=5)
}

proptest! {
    #[test]
    fn tfidf_matches_brute_force(docs in corpus()) {
        let vocab = tfidf_fit(&docs, 5000).unwrap();
        let n = docs.len() as f64;
        for d in &docs {
            let row = tfidf_transform(&vocab, d);
            for w in ["a", "b", "c", "d", "e", "f"] {
                let count = d.iter().filter(|t| *t == w).count() as f64;
                let df = docs.iter().filter(|e| e.iter().any(|t| t == w)).count() as f64;
                let expected = if df == 0.0 { 0.0 } else { count / d.len() as f64 * (n / df).ln() };
                let got = vocab.index_of(w).map_or(0.0, |i| row.get(i));
                prop_assert!(got >= 0.0);
                if count == 0.0 {
                    prop_assert_eq!(got, 0.0);
                }
                prop_assert!((got - expected).abs() <= 1e-12, "{} in {:?}: {} vs {}", w, d, got, expected);
            }
        }
    }

    #[test]
    fn doc_embedding_ignores_order(mut tokens in prop::collection::vec(prop::sample::select(vec!["w001", "w007", "w050", "zzz", "w099"]).prop_map(String::from), 0..20),
                                   seed in any::<u64>()) {
        let table = parse_vectors(&std::fs::read_to_string(fixture("vectors_100.txt")).unwrap()).unwrap();
        let before = doc_embed(&tokens, &table);
        prop_assert_eq!(before.len(), table.dim());
        let k = tokens.len().max(1);
        tokens.rotate_left(seed as usize % k);
        tokens.reverse();
        prop_assert_eq!(doc_embed(&tokens, &table), before);
    }
}
