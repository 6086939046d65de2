#![no_main]

use libfuzzer_sys::fuzz_target;
use paradetect::lingua::{Lexicon, LexiconError, LEXICON_FILES};

// Tables are separated by NUL bytes, in LEXICON_FILES order.
fuzz_target!(|data: &str| {
    let parts: Vec<&str> = data.split('\0').collect();
    let _ = Lexicon::from_sources(|name| {
        let i = LEXICON_FILES.iter().position(|f| *f == name).unwrap();
        parts.get(i).map(|s| s.to_string()).ok_or_else(|| LexiconError::MissingFile {
            file: name.to_string(),
            source: std::io::ErrorKind::NotFound.into(),
        })
    });
});
