#![no_main]

use libfuzzer_sys::fuzz_target;
use paradetect::TrainedModel;

fuzz_target!(|data: &str| {
    if let Ok(model) = TrainedModel::from_json(data) {
        let row = vec![0.5; model.feature_schema.len()];
        let _ = model.score_row(&row);
        let _ = TrainedModel::from_json(&model.to_json());
    }
});
