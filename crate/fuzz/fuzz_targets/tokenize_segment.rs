#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use paradetect::lingua::{analyze, segment, tokenize, Lexicon};

static LEXICON: OnceLock<Lexicon> = OnceLock::new();

fuzz_target!(|data: &str| {
    let _ = tokenize(data);
    let _ = segment(data);
    let _ = analyze(data, LEXICON.get_or_init(Lexicon::bundled));
});
