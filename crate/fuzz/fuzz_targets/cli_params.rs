#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = bestk::params::parse_number(text);
        let _ = bestk::params::parse_params(text);
        let _ = bestk::params::parse_grid(text);
    }
});
