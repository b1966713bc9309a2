#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let mut config = huefuse::pipeline::PipelineConfig::default();
        if config.apply_config_text(text).is_ok() {
            // Accepted configs must satisfy their own validation.
            config.validate().unwrap();
        }
    }
});
