//! Exposure fusion: per-pixel quality weights blended through pyramids.
//!
//! Each input gets a weight map from contrast, saturation and
//! well-exposedness. Normalized weight maps drive a level-by-level blend of
//! the inputs' Laplacian pyramids against the weights' Gaussian pyramids;
//! collapsing the blended pyramid yields the fused image.

use crate::error::{Error, Result};
use crate::filter::laplacian_magnitude;
use crate::image::{DynamicRange, RgbImage, RgbPixel, ScalarImage};
use crate::pyramid::{self, Pyramid};
use crate::util::order_invariant_sum;

/// Weight-measure exponents and parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    pub exponent_contrast: f64,
    pub exponent_saturation: f64,
    pub exponent_exposedness: f64,
    /// Width of the well-exposedness Gaussian around 0.5.
    pub sigma: f64,
    /// Added to every weight before normalization so that per-pixel
    /// normalization never divides by zero.
    pub weight_floor: f64,
    /// Pyramid depth; `None` selects floor(log2(min(w, h))).
    pub depth: Option<usize>,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            exponent_contrast: 1.0,
            exponent_saturation: 1.0,
            exponent_exposedness: 1.0,
            sigma: 0.2,
            weight_floor: 1e-12,
            depth: None,
        }
    }
}

/// Blend statistics; pyramid blending may transiently leave [0,1].
#[derive(Debug, Clone, Copy, Default)]
pub struct FusionStats {
    /// Largest excursion above 1.0 before the final clamp.
    pub overshoot_above: f64,
    /// Largest excursion below 0.0 before the final clamp.
    pub overshoot_below: f64,
}

#[inline]
fn powi_or_f(base: f64, exp: f64) -> f64 {
    if exp == 1.0 {
        base
    } else {
        base.powf(exp)
    }
}

/// Per-pixel quality weight of one exposure.
///
/// contrast: |Laplacian| of the gray image; saturation: standard deviation
/// of (r,g,b); well-exposedness: product over channels of a Gaussian around
/// 0.5. The three measures are combined multiplicatively under their
/// exponents.
pub fn quality_weight(image: &RgbImage, params: &FusionParams) -> ScalarImage {
    let (w, h) = (image.width(), image.height());
    let gray = ScalarImage::from_fn(w, h, |x, y| {
        let p = image.pixel(x, y);
        (p.r + p.g + p.b) / 3.0
    });
    let contrast = laplacian_magnitude(&gray);
    let inv_two_sigma_sq = 1.0 / (2.0 * params.sigma * params.sigma);
    ScalarImage::from_fn(w, h, |x, y| {
        let p = image.pixel(x, y);
        let mean = (p.r + p.g + p.b) / 3.0;
        let var =
            ((p.r - mean).powi(2) + (p.g - mean).powi(2) + (p.b - mean).powi(2)) / 3.0;
        let saturation = var.sqrt();
        let wexp = (-(p.r - 0.5).powi(2) * inv_two_sigma_sq).exp()
            * (-(p.g - 0.5).powi(2) * inv_two_sigma_sq).exp()
            * (-(p.b - 0.5).powi(2) * inv_two_sigma_sq).exp();
        powi_or_f(contrast.get(x, y), params.exponent_contrast)
            * powi_or_f(saturation, params.exponent_saturation)
            * powi_or_f(wexp, params.exponent_exposedness)
    })
}

/// Fuse a stack of aligned display-referred images.
pub fn fuse(stack: &[RgbImage], params: &FusionParams) -> Result<RgbImage> {
    fuse_with_stats(stack, params).map(|(img, _)| img)
}

/// [`fuse`] plus pre-clamp overshoot statistics.
///
/// The result is independent of stack order down to the last bit: all
/// cross-image reductions run in a canonical order.
pub fn fuse_with_stats(
    stack: &[RgbImage],
    params: &FusionParams,
) -> Result<(RgbImage, FusionStats)> {
    let first = stack.first().ok_or_else(|| Error::invalid("empty image stack"))?;
    for img in stack {
        first.check_same_dimensions(img)?;
    }
    let (w, h) = (first.width(), first.height());
    let n = stack.len();
    let depth = params
        .depth
        .unwrap_or_else(|| pyramid::default_depth(w, h))
        .max(1);

    // Normalized weight maps.
    let raw: Vec<ScalarImage> = stack.iter().map(|img| quality_weight(img, params)).collect();
    let mut weights: Vec<ScalarImage> = vec![ScalarImage::new(w, h); n];
    let mut scratch = vec![0.0f64; n];
    for idx in 0..w * h {
        for (i, map) in raw.iter().enumerate() {
            scratch[i] = map.data()[idx] + params.weight_floor;
        }
        let mut denom_terms = scratch.clone();
        let denom = order_invariant_sum(&mut denom_terms);
        for (i, map) in weights.iter_mut().enumerate() {
            map.data_mut()[idx] = scratch[i] / denom;
        }
    }

    // Pyramids: Gaussian for weights, Laplacian per channel for images.
    let weight_pyrs: Vec<Pyramid> = weights
        .iter()
        .map(|map| pyramid::gaussian_pyramid(map, depth))
        .collect();
    let channel_pyrs: Vec<[Pyramid; 3]> = stack
        .iter()
        .map(|img| {
            let split = split_channels(img);
            [
                pyramid::laplacian_pyramid(&split[0], depth),
                pyramid::laplacian_pyramid(&split[1], depth),
                pyramid::laplacian_pyramid(&split[2], depth),
            ]
        })
        .collect();

    // Blend level by level.
    let mut blended: Vec<[ScalarImage; 3]> = Vec::with_capacity(depth);
    for level in 0..depth {
        let (lw, lh) = {
            let l = &weight_pyrs[0].levels[level];
            (l.width(), l.height())
        };
        let mut out = [
            ScalarImage::new(lw, lh),
            ScalarImage::new(lw, lh),
            ScalarImage::new(lw, lh),
        ];
        for idx in 0..lw * lh {
            for ch in 0..3 {
                for i in 0..n {
                    scratch[i] = weight_pyrs[i].levels[level].data()[idx]
                        * channel_pyrs[i][ch].levels[level].data()[idx];
                }
                out[ch].data_mut()[idx] = order_invariant_sum(&mut scratch[..n]);
            }
        }
        blended.push(out);
    }

    // Collapse each channel and clamp.
    let mut stats = FusionStats::default();
    let mut fused = RgbImage::new(w, h, DynamicRange::Ldr);
    let collapsed: Vec<ScalarImage> = (0..3)
        .map(|ch| {
            let pyr = Pyramid {
                kind: pyramid::PyramidKind::Laplacian,
                levels: blended.iter().map(|l| l[ch].clone()).collect(),
            };
            pyramid::collapse(&pyr)
        })
        .collect();
    for y in 0..h {
        for x in 0..w {
            let raw = RgbPixel::new(
                collapsed[0].get(x, y),
                collapsed[1].get(x, y),
                collapsed[2].get(x, y),
            );
            for v in [raw.r, raw.g, raw.b] {
                if v > 1.0 {
                    stats.overshoot_above = stats.overshoot_above.max(v - 1.0);
                }
                if v < 0.0 {
                    stats.overshoot_below = stats.overshoot_below.max(-v);
                }
            }
            fused.set_pixel(x, y, raw.clamp01());
        }
    }
    Ok((fused, stats))
}

fn split_channels(img: &RgbImage) -> [ScalarImage; 3] {
    let (w, h) = (img.width(), img.height());
    let mut r = ScalarImage::new(w, h);
    let mut g = ScalarImage::new(w, h);
    let mut b = ScalarImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let p = img.pixel(x, y);
            r.set(x, y, p.r);
            g.set(x, y, p.g);
            b.set(x, y, p.b);
        }
    }
    [r, g, b]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::DynamicRange;

    fn textured(w: usize, h: usize, bias: f64) -> RgbImage {
        RgbImage::from_fn(w, h, DynamicRange::Ldr, |x, y| {
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            RgbPixel::new(
                (bias + 0.3 * (9.0 * u).sin() * (7.0 * v).cos()).clamp(0.0, 1.0),
                (bias + 0.25 * (5.0 * u + 1.0).cos()).clamp(0.0, 1.0),
                (bias + 0.2 * (11.0 * v).sin()).clamp(0.0, 1.0),
            )
        })
    }

    #[test]
    fn flat_midgray_weight_is_zero() {
        let img = RgbImage::from_fn(16, 16, DynamicRange::Ldr, |_, _| {
            RgbPixel::new(0.5, 0.5, 0.5)
        });
        let w = quality_weight(&img, &FusionParams::default());
        // contrast = 0, saturation = 0, well-exposedness = 1 -> product 0.
        assert!(w.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn well_exposedness_values() {
        // Probe through a flat image so contrast stays zero elsewhere.
        let params = FusionParams {
            exponent_contrast: 0.0,
            exponent_saturation: 0.0,
            ..FusionParams::default()
        };
        let mid = RgbImage::from_fn(4, 4, DynamicRange::Ldr, |_, _| {
            RgbPixel::new(0.5, 0.5, 0.5)
        });
        let w = quality_weight(&mid, &params);
        assert!((w.get(1, 1) - 1.0).abs() < 1e-12);

        let bright = RgbImage::from_fn(4, 4, DynamicRange::Ldr, |_, _| {
            RgbPixel::new(0.9, 0.9, 0.9)
        });
        let w = quality_weight(&bright, &params);
        // exp(-(0.4^2)/(2*0.2^2))^3 = exp(-6), frozen from direct evaluation.
        assert!((w.get(1, 1) - 2.4787521766663585e-3).abs() < 1e-12);
    }

    #[test]
    fn empty_stack_and_dimension_mismatch_error() {
        assert!(fuse(&[], &FusionParams::default()).is_err());
        let a = textured(8, 8, 0.5);
        let b = textured(8, 9, 0.5);
        assert!(fuse(&[a, b], &FusionParams::default()).is_err());
    }

    #[test]
    fn fusing_copies_is_identity() {
        let img = textured(48, 40, 0.45);
        let out = fuse(&[img.clone(), img.clone(), img.clone()], &FusionParams::default())
            .unwrap();
        assert!(out.max_abs_diff(&img) < 1e-4);
        let single = fuse(&[img.clone()], &FusionParams::default()).unwrap();
        assert!(single.max_abs_diff(&img) < 1e-4);
    }

    #[test]
    fn permutation_invariance_is_bit_exact() {
        let a = textured(33, 29, 0.25);
        let b = textured(33, 29, 0.55);
        let c = textured(33, 29, 0.8);
        let p = FusionParams::default();
        let abc = fuse(&[a.clone(), b.clone(), c.clone()], &p).unwrap();
        let cab = fuse(&[c, a, b], &p).unwrap();
        assert_eq!(abc.data().len(), cab.data().len());
        assert!(abc
            .data()
            .iter()
            .zip(cab.data())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let a = textured(16, 16, 0.3);
        let b = textured(16, 16, 0.7);
        let params = FusionParams::default();
        let raw: Vec<ScalarImage> =
            [&a, &b].iter().map(|im| quality_weight(im, &params)).collect();
        for idx in 0..16 * 16 {
            let mut terms: Vec<f64> =
                raw.iter().map(|m| m.data()[idx] + params.weight_floor).collect();
            let denom = order_invariant_sum(&mut terms);
            let sum: f64 = raw
                .iter()
                .map(|m| (m.data()[idx] + params.weight_floor) / denom)
                .sum();
            assert!((sum - 1.0).abs() < 1e-6);
        }
    }

    /// Two-image stack: an all-black frame and a well-exposed texture. The
    /// fused output must follow the per-pixel weighted average at low
    /// frequencies (oracle: blur both and compare away from boundaries).
    #[test]
    fn black_plus_textured_follows_weighted_average() {
        let black = RgbImage::new(64, 64, DynamicRange::Ldr);
        let tex = textured(64, 64, 0.5);
        let params = FusionParams::default();
        let fused = fuse(&[black.clone(), tex.clone()], &params).unwrap();

        // Oracle: per-pixel normalized-weight average of the two inputs.
        let wb = quality_weight(&black, &params);
        let wt = quality_weight(&tex, &params);
        let mut expected = RgbImage::new(64, 64, DynamicRange::Ldr);
        for y in 0..64 {
            for x in 0..64 {
                let b = wb.get(x, y) + params.weight_floor;
                let t = wt.get(x, y) + params.weight_floor;
                let (b, t) = (b / (b + t), t / (b + t));
                let pb = black.pixel(x, y);
                let pt = tex.pixel(x, y);
                expected.set_pixel(
                    x,
                    y,
                    RgbPixel::new(
                        b * pb.r + t * pt.r,
                        b * pb.g + t * pt.g,
                        b * pb.b + t * pt.b,
                    ),
                );
            }
        }
        // Compare at low frequencies.
        let blur = |img: &RgbImage| {
            let ch = split_channels(img);
            ch.map(|c| crate::filter::gaussian_blur(&c, 4.0))
        };
        let fa = blur(&fused);
        let fb = blur(&expected);
        for ch in 0..3 {
            for y in 12..52 {
                for x in 12..52 {
                    let d = (fa[ch].get(x, y) - fb[ch].get(x, y)).abs();
                    assert!(d < 1e-2, "ch={ch} ({x},{y}): {d}");
                }
            }
        }
    }
}
