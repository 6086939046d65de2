//! Prints a seeded synthetic paired corpus as JSONL.
//!
//! ```text
//! cargo run -p paradetect --example synthetic_corpus -- 200 7 > corpus.jsonl
//! ```

fn main() {
    let mut args = std::env::args().skip(1);
    let pairs = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    print!("{}", paradetect::synthetic::separable_corpus(pairs, seed).to_jsonl());
}
