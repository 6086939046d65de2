#![no_main]

use libfuzzer_sys::fuzz_target;
use paradetect::ModelSpec;

fuzz_target!(|data: &str| {
    if let Ok(spec) = toml::from_str::<ModelSpec>(data) {
        let back: ModelSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
});
