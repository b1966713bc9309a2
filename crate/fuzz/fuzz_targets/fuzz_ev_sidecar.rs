#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(evs) = huefuse::imgio::parse_ev_sidecar(text) {
            assert!(!evs.is_empty());
            assert!(evs.iter().all(|e| e.is_finite()));
        }
    }
});
