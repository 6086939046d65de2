#![no_main]

use libfuzzer_sys::fuzz_target;
use paradetect::FeatureMatrix;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = FeatureMatrix::read_csv(data) {
        assert_eq!(m.rows.len(), m.labels.len());
    }
});
