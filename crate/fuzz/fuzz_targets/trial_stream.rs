#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = bestk::output::parse_trial_record(text);
        let _ = bestk::output::parse_trial_stream(text);
    }
});
