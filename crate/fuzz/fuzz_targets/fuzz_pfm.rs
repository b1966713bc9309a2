#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = huefuse::imgio::decode_pfm(data) {
        assert!(img.data().iter().all(|v| v.is_finite() && *v >= 0.0));
        let bytes = huefuse::imgio::encode_pfm(&img).unwrap();
        let back = huefuse::imgio::decode_pfm(&bytes).unwrap();
        assert_eq!((back.width(), back.height()), (img.width(), img.height()));
    }
});
