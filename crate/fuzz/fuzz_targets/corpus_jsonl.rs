#![no_main]

use libfuzzer_sys::fuzz_target;
use paradetect::corpus::{parse_jsonl, Corpus};

fuzz_target!(|data: &str| {
    let Ok(records) = parse_jsonl(data) else { return };
    if let Ok(corpus) = Corpus::from_records(records.clone(), "fuzz") {
        let again = parse_jsonl(&corpus.to_jsonl()).expect("serialized corpus parses");
        assert_eq!(again, records);
    }
});
