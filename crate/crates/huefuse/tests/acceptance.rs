//! Acceptance suite: one test per verification criterion, each printing a
//! PASS line with its measured numbers (run with `--nocapture` to see them).

use std::time::Instant;

use huefuse::color_hue::{self, decompose, recompose};
use huefuse::eval::{evaluate_scene, Method, ALL_METHODS};
use huefuse::fusion::{self, FusionParams};
use huefuse::hdr::{self, CrfOptions, SynthOptions};
use huefuse::image::{DynamicRange, RgbImage, RgbPixel};
use huefuse::imgio;
use huefuse::metrics::{delta_e_ciede2000, LabPixel};
use huefuse::pipeline::PipelineConfig;
use huefuse::scenes;
use huefuse::ssla;

/// Deterministic pixel generator (splitmix-style) for the bulk checks.
struct Gen(u64);

impl Gen {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn pixel(&mut self) -> RgbPixel {
        RgbPixel::new(self.next_f64(), self.next_f64(), self.next_f64())
    }
}

#[test]
fn criterion_01_constant_hue_round_trip() {
    let start = Instant::now();
    let mut gen = Gen(1);
    let mut worst_rt = 0.0f64;
    let mut worst_sum = 0.0f64;
    for _ in 0..100_000 {
        let x = gen.pixel();
        let h = decompose(x);
        let back = recompose(&h);
        worst_rt = worst_rt
            .max((back.r - x.r).abs())
            .max((back.g - x.g).abs())
            .max((back.b - x.b).abs());
        worst_sum = worst_sum.max((h.a_w + h.a_k + h.a_c - 1.0).abs());
    }
    let elapsed = start.elapsed();
    assert!(worst_rt <= 1e-7, "round trip error {worst_rt}");
    assert!(worst_sum <= 1e-7, "coefficient identity error {worst_sum}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 01 constant-hue round trip: PASS (max rt {worst_rt:.2e}, max sum {worst_sum:.2e}, {elapsed:?})"
    );
}

#[test]
fn criterion_02_hue_transplant_correctness() {
    // Chromatic scene-referred field and its gamma-distorted rendering.
    let truth = RgbImage::from_fn(128, 128, DynamicRange::Hdr, |x, y| {
        let u = (x as f64 + 0.7) / 128.0;
        let v = (y as f64 + 0.3) / 128.0;
        RgbPixel::new(
            1.5 * u + 0.05,
            0.2 + 0.9 * v,
            1.2 - 0.8 * u * v,
        )
    });
    let fused = truth.map_pixels(DynamicRange::Ldr, |p| {
        p.map(|v| (v / 1.6).clamp(0.0, 1.0).powf(1.0 / 2.2))
    });
    let corrected = color_hue::correct_image_hue(&fused, &truth).unwrap();
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for y in 0..128 {
        for x in 0..128 {
            let got = decompose(corrected.pixel(x, y));
            let want = decompose(truth.pixel(x, y));
            if got.a_c > 1e-6 && want.a_c > 1e-6 {
                worst = worst
                    .max((got.c.r - want.c.r).abs())
                    .max((got.c.g - want.c.g).abs())
                    .max((got.c.b - want.c.b).abs());
                compared += 1;
            }
        }
    }
    assert!(compared > 10_000, "too few chromatic pixels: {compared}");
    assert!(worst <= 1e-6, "max hue-vector channel error {worst}");
    println!(
        "ACCEPTANCE 02 hue transplant: PASS ({compared} px, max channel error {worst:.2e})"
    );
}

#[test]
fn criterion_03_hue_scale_offset_invariance() {
    let mut gen = Gen(3);
    let mut count = 0usize;
    while count < 10_000 {
        let x = gen.pixel();
        let h = decompose(x);
        if h.a_c <= 1e-3 {
            continue;
        }
        count += 1;
        for s in [0.5f64, 2.0, 7.3] {
            for t in [0.0f64, 0.1] {
                let y = RgbPixel::new(s * x.r + t, s * x.g + t, s * x.b + t);
                let hy = decompose(y);
                assert_eq!(
                    h.c.r.to_bits(),
                    hy.c.r.to_bits(),
                    "r mismatch for {x:?} s={s} t={t}"
                );
                assert_eq!(h.c.g.to_bits(), hy.c.g.to_bits());
                assert_eq!(h.c.b.to_bits(), hy.c.b.to_bits());
            }
        }
    }
    println!("ACCEPTANCE 03 hue invariance: PASS (10000 pixels x 6 transforms, bit-exact)");
}

#[test]
fn criterion_04_fusion_idempotence_and_permutation() {
    let texture = |seed: u64| {
        let mut gen = Gen(seed);
        RgbImage::from_fn(256, 256, DynamicRange::Ldr, |x, y| {
            let u = x as f64 / 256.0;
            let v = y as f64 / 256.0;
            RgbPixel::new(
                (0.4 + 0.3 * (9.0 * u).sin() * (7.0 * v).cos() + 0.1 * gen.next_f64())
                    .clamp(0.0, 1.0),
                (0.5 + 0.25 * (5.0 * u + 1.0).cos() + 0.1 * gen.next_f64()).clamp(0.0, 1.0),
                (0.45 + 0.2 * (11.0 * v).sin() + 0.1 * gen.next_f64()).clamp(0.0, 1.0),
            )
        })
    };
    let params = FusionParams::default();

    let img = texture(10);
    let fused = fusion::fuse(&[img.clone(), img.clone(), img.clone()], &params).unwrap();
    let err = fused.max_abs_diff(&img);
    assert!(err <= 1e-4, "idempotence error {err}");

    let a = texture(20);
    let b = texture(21);
    let c = texture(22);
    let abc = fusion::fuse(&[a.clone(), b.clone(), c.clone()], &params).unwrap();
    let bca = fusion::fuse(&[b, c, a], &params).unwrap();
    let identical = abc
        .data()
        .iter()
        .zip(bca.data())
        .all(|(x, y)| x.to_bits() == y.to_bits());
    assert!(identical, "permutation changed the fused output");
    println!("ACCEPTANCE 04 fusion idempotence/permutation: PASS (max err {err:.2e}, byte-identical)");
}

#[test]
fn criterion_05_crf_recovery_and_merge() {
    let start = Instant::now();
    let truth = scenes::builtin("sphere", 256, 256).unwrap();
    let stack =
        hdr::synthesize_stack(&truth, &[-4.0, -2.0, 0.0, 2.0, 4.0], &SynthOptions::default())
            .unwrap();
    let curve = hdr::estimate_crf(&stack, &CrfOptions::default()).unwrap();
    assert_eq!(curve.degree(), 5, "expected a degree-5 fit");

    let mut sq = 0.0;
    let mut n = 0usize;
    for i in 0..=900 {
        let v = 0.05 + 0.9 * i as f64 / 900.0;
        let err = curve.evaluate(v) - v.powf(2.2);
        sq += err * err;
        n += 1;
    }
    let rmse = (sq / n as f64).sqrt();
    assert!(rmse <= 0.01, "inverse response RMSE {rmse}");

    let merged = hdr::merge_hdr(&stack, &curve).unwrap();
    // Recovery is up to the merge's global anchor scalar: the geometric
    // midrange of the per-sample ratios is the witness scalar.
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut checked = 0usize;
    for y in 0..256 {
        for x in 0..256 {
            for ch in 0..3 {
                let pick = |p: RgbPixel| match ch {
                    0 => p.r,
                    1 => p.g,
                    _ => p.b,
                };
                let best = (0..stack.len())
                    .map(|i| pick(stack.image(i).pixel(x, y)))
                    .min_by(|a, b| (a - 0.5).abs().total_cmp(&(b - 0.5).abs()))
                    .unwrap();
                if (0.1..=0.9).contains(&best) {
                    let r = pick(merged.pixel(x, y)) / pick(truth.pixel(x, y));
                    lo = lo.min(r);
                    hi = hi.max(r);
                    checked += 1;
                }
            }
        }
    }
    let s = (lo * hi).sqrt();
    let worst = (hi / s - 1.0).max(1.0 - lo / s);
    let elapsed = start.elapsed();
    assert!(checked > 10_000, "coverage {checked}");
    assert!(worst <= 0.01, "worst merge relative error {worst}");
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 05 response recovery: PASS (RMSE {rmse:.4}, merge rel err {worst:.4} over {checked} samples, {elapsed:?})"
    );
}

/// Published CIEDE2000 verification pairs, transcribed independently of the
/// library internals.
const CIEDE2000_VECTORS: [(f64, f64, f64, f64, f64, f64, f64); 34] = [
    (50.0000, 2.6772, -79.7751, 50.0000, 0.0000, -82.7485, 2.0425),
    (50.0000, 3.1571, -77.2803, 50.0000, 0.0000, -82.7485, 2.8615),
    (50.0000, 2.8361, -74.0200, 50.0000, 0.0000, -82.7485, 3.4412),
    (50.0000, -1.3802, -84.2814, 50.0000, 0.0000, -82.7485, 1.0000),
    (50.0000, -1.1848, -84.8006, 50.0000, 0.0000, -82.7485, 1.0000),
    (50.0000, -0.9009, -85.5211, 50.0000, 0.0000, -82.7485, 1.0000),
    (50.0000, 0.0000, 0.0000, 50.0000, -1.0000, 2.0000, 2.3669),
    (50.0000, -1.0000, 2.0000, 50.0000, 0.0000, 0.0000, 2.3669),
    (50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0009, 7.1792),
    (50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0010, 7.1792),
    (50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0011, 7.2195),
    (50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0012, 7.2195),
    (50.0000, -0.0010, 2.4900, 50.0000, 0.0009, -2.4900, 4.8045),
    (50.0000, -0.0010, 2.4900, 50.0000, 0.0010, -2.4900, 4.8045),
    (50.0000, -0.0010, 2.4900, 50.0000, 0.0011, -2.4900, 4.7461),
    (50.0000, 2.5000, 0.0000, 50.0000, 0.0000, -2.5000, 4.3065),
    (50.0000, 2.5000, 0.0000, 73.0000, 25.0000, -18.0000, 27.1492),
    (50.0000, 2.5000, 0.0000, 61.0000, -5.0000, 29.0000, 22.8977),
    (50.0000, 2.5000, 0.0000, 56.0000, -27.0000, -3.0000, 31.9030),
    (50.0000, 2.5000, 0.0000, 58.0000, 24.0000, 15.0000, 19.4535),
    (50.0000, 2.5000, 0.0000, 50.0000, 3.1736, 0.5854, 1.0000),
    (50.0000, 2.5000, 0.0000, 50.0000, 3.2972, 0.0000, 1.0000),
    (50.0000, 2.5000, 0.0000, 50.0000, 1.8634, 0.5757, 1.0000),
    (50.0000, 2.5000, 0.0000, 50.0000, 3.2592, 0.3350, 1.0000),
    (60.2574, -34.0099, 36.2677, 60.4626, -34.1751, 39.4387, 1.2644),
    (63.0109, -31.0961, -5.8663, 62.8187, -29.7946, -4.0864, 1.2630),
    (61.2901, 3.7196, -5.3901, 61.4292, 2.2480, -4.9620, 1.8731),
    (35.0831, -44.1164, 3.7933, 35.0232, -40.0716, 1.5901, 1.8645),
    (22.7233, 20.0904, -46.6940, 23.0331, 14.9730, -42.5619, 2.0373),
    (36.4612, 47.8580, 18.3852, 36.2715, 50.5065, 21.2231, 1.4146),
    (90.8027, -2.0831, 1.4410, 91.1528, -1.6435, 0.0447, 1.4441),
    (90.9257, -0.5406, -0.9208, 88.6381, -0.8985, -0.7239, 1.5381),
    (6.7747, -0.2908, -2.4247, 5.8714, -0.0985, -2.2286, 0.6377),
    (2.0776, 0.0795, -1.1350, 0.9033, -0.0636, -0.5514, 0.9082),
];

#[test]
fn criterion_06_ciede2000_test_vectors() {
    let mut worst = 0.0f64;
    for &(l1, a1, b1, l2, a2, b2, expected) in &CIEDE2000_VECTORS {
        let got = delta_e_ciede2000(
            LabPixel { l: l1, a: a1, b: b1 },
            LabPixel { l: l2, a: a2, b: b2 },
        );
        worst = worst.max((got - expected).abs());
    }
    assert!(worst < 1e-4, "worst deviation {worst}");
    println!("ACCEPTANCE 06 CIEDE2000 vectors: PASS (34 pairs, worst deviation {worst:.2e})");
}

fn bundle(evs: &[f64]) -> Vec<(String, RgbImage, hdr::ExposureStack)> {
    scenes::BUILTIN_NAMES
        .iter()
        .map(|name| {
            let truth = scenes::builtin(name, 128, 128).unwrap();
            let stack = hdr::synthesize_stack(&truth, evs, &SynthOptions::default()).unwrap();
            (name.to_string(), truth, stack)
        })
        .collect()
}

#[test]
fn criterion_07_hue_distortion_ordering() {
    let config = PipelineConfig {
        metric_tmqi: false,
        ..PipelineConfig::default()
    };
    let mut mertens_sum = 0.0;
    let mut proposed_sum = 0.0;
    let mut lines = Vec::new();
    let scenes_list = bundle(&[-4.0, -2.0, 0.0, 2.0, 4.0]);
    assert!(scenes_list.len() >= 5);
    for (name, truth, stack) in &scenes_list {
        let rows = evaluate_scene(name, truth, stack, &ALL_METHODS, &config).unwrap();
        let dh = |m: Method| {
            rows.iter()
                .find(|r| r.method == m)
                .unwrap()
                .mean_delta_h
                .unwrap()
        };
        let (dm, dp) = (dh(Method::Mertens), dh(Method::Proposed));
        assert!(
            dp < dm,
            "{name}: proposed {dp} not below plain fusion {dm}"
        );
        mertens_sum += dm;
        proposed_sum += dp;
        lines.push(format!("{name} {dp:.3}<{dm:.3}"));
    }
    assert!(proposed_sum < mertens_sum);
    println!(
        "ACCEPTANCE 07 hue-distortion ordering: PASS ({}; aggregate {:.3} < {:.3})",
        lines.join(", "),
        proposed_sum / scenes_list.len() as f64,
        mertens_sum / scenes_list.len() as f64
    );
}

#[test]
fn criterion_08_tmqi_ordering_underexposed() {
    let config = PipelineConfig {
        metric_delta_h: false,
        ..PipelineConfig::default()
    };
    let mut lines = Vec::new();
    for (name, truth, stack) in &bundle(&[-4.0, -2.0, 0.0]) {
        let rows = evaluate_scene(
            name,
            truth,
            stack,
            &[Method::Mertens, Method::Proposed],
            &config,
        )
        .unwrap();
        let q = |m: Method| {
            rows.iter()
                .find(|r| r.method == m)
                .unwrap()
                .tmqi
                .unwrap()
                .q
        };
        let (qm, qp) = (q(Method::Mertens), q(Method::Proposed));
        assert!(
            qp >= qm,
            "{name}: proposed TMQI {qp} below plain fusion {qm}"
        );
        lines.push(format!("{name} {qp:.3}>={qm:.3}"));
    }
    println!(
        "ACCEPTANCE 08 TMQI ordering underexposed: PASS ({})",
        lines.join(", ")
    );
}

#[test]
fn criterion_09_segment_anchoring() {
    // Two flat regions, three stops apart, lightly tinted.
    let img = RgbImage::from_fn(128, 128, DynamicRange::Ldr, |x, _| {
        let lum = if x < 64 { 0.15 } else { 0.45 };
        RgbPixel::new(lum * 1.1, lum, lum * 0.85)
    });
    let out = ssla::run_ssla(&[img], 2).unwrap();
    assert_eq!(out.segmentation.count, 2);
    let target = ssla::MIDDLE_GRAY / (1.0 + ssla::MIDDLE_GRAY);
    let mut worst = 0.0f64;
    for (label, adjusted) in out.images.iter().enumerate() {
        assert_eq!(out.clipped[label], 0, "unexpected clipping");
        let lum = ssla::luminance(adjusted);
        let mut log_sum = 0.0;
        let mut n = 0usize;
        for y in 0..128 {
            for x in 0..128 {
                if out.segmentation.label(x, y) == label {
                    log_sum += lum.get(x, y).ln();
                    n += 1;
                }
            }
        }
        let geomean = (log_sum / n as f64).exp();
        worst = worst.max((geomean - target).abs());
    }
    assert!(worst <= 1e-3, "segment geomean deviation {worst}");
    println!(
        "ACCEPTANCE 09 segment anchoring: PASS (worst deviation {worst:.2e} from {target:.5})"
    );
}

#[test]
fn criterion_11_io_round_trips() {
    let mut gen = Gen(11);
    // PFM: bit-exact for f32-representable data.
    let hdr_img = RgbImage::from_fn(23, 17, DynamicRange::Hdr, |_, _| {
        RgbPixel::new(
            (gen.next_f64() * 50.0) as f32 as f64,
            (gen.next_f64() * 0.02) as f32 as f64,
            (gen.next_f64() + 0.001) as f32 as f64,
        )
    });
    let pfm = imgio::encode_image(&hdr_img, imgio::ImageFormat::Pfm).unwrap();
    let (back, _) = imgio::read_image_bytes(&pfm).unwrap();
    assert!(hdr_img
        .data()
        .iter()
        .zip(back.data())
        .all(|(a, b)| a.to_bits() == b.to_bits()));

    // PNG-16: quantization bound 1/(2*65535).
    let ldr = RgbImage::from_fn(31, 19, DynamicRange::Ldr, |_, _| {
        RgbPixel::new(gen.next_f64(), gen.next_f64(), gen.next_f64())
    });
    let png = imgio::encode_image(&ldr, imgio::ImageFormat::Png16).unwrap();
    let (back, _) = imgio::read_image_bytes(&png).unwrap();
    let err = ldr.max_abs_diff(&back);
    assert!(err <= 0.5 / 65535.0 + 1e-12, "png16 error {err}");

    // RGBE closed form: crafted samples against m/256 * 2^(e-128).
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 3\n");
    bytes.extend_from_slice(&[128, 128, 128, 129]); // (1, 1, 1)
    bytes.extend_from_slice(&[255, 0, 64, 128]); // (255/256, 0, 0.25)
    bytes.extend_from_slice(&[7, 99, 200, 0]); // exponent 0 -> black
    let (img, _) = imgio::read_image_bytes(&bytes).unwrap();
    assert_eq!(img.pixel(0, 0), RgbPixel::new(1.0, 1.0, 1.0));
    let p = img.pixel(1, 0);
    assert!((p.r - 255.0 / 256.0).abs() < 1e-12);
    assert_eq!(p.g, 0.0);
    assert!((p.b - 0.25).abs() < 1e-12);
    assert_eq!(img.pixel(2, 0), RgbPixel::new(0.0, 0.0, 0.0));

    println!("ACCEPTANCE 11 io round trips: PASS (pfm bit-exact, png16 err {err:.2e}, rgbe formula)");
}
