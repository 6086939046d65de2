#![no_main]

use libfuzzer_sys::fuzz_target;
use paradetect::genclient::{render_prompt, PromptTemplate};
use paradetect::{Label, ParagraphRecord};

fuzz_target!(|data: &str| {
    let (template, text) = data.split_once('\0').unwrap_or((data, "some words here"));
    if let Ok(t) = PromptTemplate::new(template) {
        let record = ParagraphRecord {
            id: "f".into(),
            title: "Title".into(),
            headline: "Headline".into(),
            section_label: "Section".into(),
            text: text.into(),
            label: Label::Human,
            pair_id: None,
        };
        let _ = render_prompt(&t, &record);
    }
});
