#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // must never panic; valid instances must survive a round trip
        if let Ok(inst) = bestk::instance::Instance::from_json(text) {
            let again = bestk::instance::Instance::from_json(&inst.to_json()).unwrap();
            assert_eq!(again.k, inst.k);
            assert_eq!(again.true_means(), inst.true_means());
            let _ = inst.decompose_groups();
            let _ = inst.top_k_set();
        }
    }
});
