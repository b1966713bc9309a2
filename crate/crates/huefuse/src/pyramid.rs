//! Burt–Adelson image pyramids.
//!
//! Levels shrink as ceil(size/2) using a separable 5-tap binomial kernel
//! [1,4,6,4,1]/16 with mirror-reflected boundaries. Upsampling zero-inserts
//! and applies the same kernel scaled by 2, so a Laplacian pyramid collapses
//! back to its source up to rounding.

use crate::filter::mirror;
use crate::image::ScalarImage;

const KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Default level count: floor(log2(min(w, h))), at least 1.
pub fn default_depth(width: usize, height: usize) -> usize {
    let m = width.min(height).max(1);
    let levels = (usize::BITS - 1 - m.leading_zeros()) as usize;
    levels.max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PyramidKind {
    Gaussian,
    Laplacian,
}

#[derive(Debug, Clone)]
pub struct Pyramid {
    pub kind: PyramidKind,
    pub levels: Vec<ScalarImage>,
}

fn blur_rows(src: &ScalarImage) -> ScalarImage {
    let (w, h) = (src.width(), src.height());
    ScalarImage::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for (k, &coeff) in KERNEL.iter().enumerate() {
            acc += coeff * src.get(mirror(x as isize + k as isize - 2, w), y);
        }
        acc
    })
}

fn blur_cols(src: &ScalarImage) -> ScalarImage {
    let (w, h) = (src.width(), src.height());
    ScalarImage::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for (k, &coeff) in KERNEL.iter().enumerate() {
            acc += coeff * src.get(x, mirror(y as isize + k as isize - 2, h));
        }
        acc
    })
}

/// One pyramid step down: blur, then keep even-indexed samples.
pub fn downsample(src: &ScalarImage) -> ScalarImage {
    let blurred = blur_cols(&blur_rows(src));
    let (w, h) = (src.width().div_ceil(2), src.height().div_ceil(2));
    ScalarImage::from_fn(w, h, |x, y| blurred.get(2 * x, 2 * y))
}

fn upsample_axis(src: &[f64], target: usize) -> Vec<f64> {
    // Zero-insert to 2*len, filter with the kernel doubled, crop to target.
    let n2 = src.len() * 2;
    let mut out = Vec::with_capacity(target);
    for i in 0..target {
        let mut acc = 0.0;
        for (k, &coeff) in KERNEL.iter().enumerate() {
            let j = mirror(i as isize + k as isize - 2, n2);
            if j % 2 == 0 {
                acc += 2.0 * coeff * src[j / 2];
            }
        }
        out.push(acc);
    }
    out
}

/// Upsample to an explicit target size (the size of the finer level).
pub fn upsample(src: &ScalarImage, target_w: usize, target_h: usize) -> ScalarImage {
    debug_assert_eq!(src.width(), target_w.div_ceil(2));
    debug_assert_eq!(src.height(), target_h.div_ceil(2));
    // Rows first.
    let mut wide = ScalarImage::new(target_w, src.height());
    let mut row = Vec::with_capacity(src.width());
    for y in 0..src.height() {
        row.clear();
        row.extend((0..src.width()).map(|x| src.get(x, y)));
        let up = upsample_axis(&row, target_w);
        for (x, v) in up.into_iter().enumerate() {
            wide.set(x, y, v);
        }
    }
    // Then columns.
    let mut out = ScalarImage::new(target_w, target_h);
    let mut col = Vec::with_capacity(src.height());
    for x in 0..target_w {
        col.clear();
        col.extend((0..src.height()).map(|y| wide.get(x, y)));
        let up = upsample_axis(&col, target_h);
        for (y, v) in up.into_iter().enumerate() {
            out.set(x, y, v);
        }
    }
    out
}

/// Lowpass pyramid with `depth` levels (level 0 is the input).
pub fn gaussian_pyramid(img: &ScalarImage, depth: usize) -> Pyramid {
    assert!(depth >= 1);
    let mut levels = Vec::with_capacity(depth);
    levels.push(img.clone());
    for _ in 1..depth {
        let next = downsample(levels.last().unwrap());
        levels.push(next);
    }
    Pyramid {
        kind: PyramidKind::Gaussian,
        levels,
    }
}

/// Bandpass pyramid; the last level is the residual lowpass.
pub fn laplacian_pyramid(img: &ScalarImage, depth: usize) -> Pyramid {
    let gauss = gaussian_pyramid(img, depth);
    let mut levels = Vec::with_capacity(depth);
    for l in 0..depth - 1 {
        let fine = &gauss.levels[l];
        let up = upsample(&gauss.levels[l + 1], fine.width(), fine.height());
        let mut band = fine.clone();
        for (b, u) in band.data_mut().iter_mut().zip(up.data()) {
            *b -= u;
        }
        levels.push(band);
    }
    levels.push(gauss.levels[depth - 1].clone());
    Pyramid {
        kind: PyramidKind::Laplacian,
        levels,
    }
}

/// Rebuild the image a Laplacian pyramid was built from.
pub fn collapse(pyr: &Pyramid) -> ScalarImage {
    assert_eq!(pyr.kind, PyramidKind::Laplacian);
    let mut acc = pyr.levels.last().unwrap().clone();
    for l in (0..pyr.levels.len() - 1).rev() {
        let fine = &pyr.levels[l];
        let up = upsample(&acc, fine.width(), fine.height());
        let mut next = fine.clone();
        for (n, u) in next.data_mut().iter_mut().zip(up.data()) {
            *n += u;
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn test_image(w: usize, h: usize) -> ScalarImage {
        ScalarImage::from_fn(w, h, |x, y| {
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            0.5 + 0.4 * (7.0 * u).sin() * (5.0 * v).cos() + 0.05 * ((x * 7 + y * 13) % 11) as f64
        })
    }

    #[test]
    fn depth_defaults() {
        assert_eq!(default_depth(256, 256), 8);
        assert_eq!(default_depth(256, 100), 6);
        assert_eq!(default_depth(1, 1), 1);
        assert_eq!(default_depth(3, 9), 1);
    }

    #[test]
    fn level_dimensions_halve() {
        let img = test_image(37, 53);
        let pyr = gaussian_pyramid(&img, 5);
        let mut w = 37;
        let mut h = 53;
        for level in &pyr.levels {
            assert_eq!((level.width(), level.height()), (w, h));
            w = w.div_ceil(2);
            h = h.div_ceil(2);
        }
    }

    #[test]
    fn collapse_reconstructs() {
        for (w, h) in [(64, 64), (37, 53), (5, 9), (1, 7)] {
            let img = test_image(w, h);
            let depth = default_depth(w, h).clamp(2, 6);
            let pyr = laplacian_pyramid(&img, depth);
            let back = collapse(&pyr);
            assert!(
                back.max_abs_diff(&img) < 1e-4,
                "{w}x{h}: {}",
                back.max_abs_diff(&img)
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn collapse_roundtrip_random_sizes(w in 1usize..40, h in 1usize..40, depth in 1usize..5) {
            let img = test_image(w, h);
            let pyr = laplacian_pyramid(&img, depth);
            prop_assert!(collapse(&pyr).max_abs_diff(&img) < 1e-4);
        }
    }
}
