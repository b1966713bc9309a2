#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Magic-byte dispatch across every supported container (PNG, Radiance
    // RGBE, PFM).
    if let Ok((img, info)) = huefuse::imgio::read_image_bytes(data) {
        assert_eq!((info.width, info.height), (img.width(), img.height()));
        assert!(img.data().iter().all(|v| v.is_finite()));
    }
});
