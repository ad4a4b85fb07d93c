//! Fuzzes the ETT-format CSV parser: must never panic, only return
//! structured errors.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = ima::data::parse_csv(text);
    }
});
