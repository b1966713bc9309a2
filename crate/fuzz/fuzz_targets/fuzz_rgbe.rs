#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = huefuse::imgio::decode_rgbe(data) {
        // Every accepted image must satisfy the decoded-data contract.
        assert!(img.data().iter().all(|v| v.is_finite() && *v >= 0.0));
        // Re-encoding an accepted image must stay decodable with the same
        // geometry.
        let bytes = huefuse::imgio::encode_rgbe(&img).unwrap();
        let back = huefuse::imgio::decode_rgbe(&bytes).unwrap();
        assert_eq!((back.width(), back.height()), (img.width(), img.height()));
    }
});
