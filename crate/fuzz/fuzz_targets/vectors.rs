#![no_main]

use libfuzzer_sys::fuzz_target;
use paradetect::embed::{doc_embed, parse_vectors};

fuzz_target!(|data: &str| {
    if let Ok(table) = parse_vectors(data) {
        let words: Vec<String> = table.words().iter().take(8).cloned().collect();
        assert_eq!(doc_embed(&words, &table).len(), table.dim());
    }
});
