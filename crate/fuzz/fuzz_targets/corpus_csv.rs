#![no_main]

use libfuzzer_sys::fuzz_target;
use paradetect::corpus::parse_csv;

fuzz_target!(|data: &[u8]| {
    let _ = parse_csv(data);
});
