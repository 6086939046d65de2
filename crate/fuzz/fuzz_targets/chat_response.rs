#![no_main]

use libfuzzer_sys::fuzz_target;
use paradetect::genclient::{chat_response_body, chat_response_content};

fuzz_target!(|data: &str| {
    if let Ok(content) = chat_response_content(data) {
        assert_eq!(chat_response_content(&chat_response_body(&content)).ok(), Some(content));
    }
});
