//! Fuzzes both checkpoint decoders (forecaster and imputer JSON).

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = ima::models::forecaster_from_json(text);
        let _ = ima::models::imputer_from_json(text);
    }
});
