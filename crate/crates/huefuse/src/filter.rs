//! Separable filtering on scalar rasters with mirror-reflected boundaries.

use crate::image::ScalarImage;

/// Whole-sample mirror reflection: -1 maps to 1, n maps to n-2.
#[inline]
pub(crate) fn mirror(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as isize;
    let mut i = i;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

/// Convolve rows then columns with the same symmetric 1-D kernel.
/// `kernel[radius]` is the center tap.
pub(crate) fn separable_filter(src: &ScalarImage, kernel: &[f64]) -> ScalarImage {
    let (w, h) = (src.width(), src.height());
    let radius = kernel.len() / 2;
    let mut tmp = ScalarImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &coeff) in kernel.iter().enumerate() {
                let xi = mirror(x as isize + k as isize - radius as isize, w);
                acc += coeff * src.get(xi, y);
            }
            tmp.set(x, y, acc);
        }
    }
    let mut out = ScalarImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &coeff) in kernel.iter().enumerate() {
                let yi = mirror(y as isize + k as isize - radius as isize, h);
                acc += coeff * tmp.get(x, yi);
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// Normalized Gaussian taps with radius ceil(3*sigma).
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0);
    let radius = (3.0 * sigma).ceil() as usize;
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Gaussian blur with standard deviation `sigma`.
pub fn gaussian_blur(src: &ScalarImage, sigma: f64) -> ScalarImage {
    separable_filter(src, &gaussian_kernel(sigma))
}

/// Magnitude of the 4-neighbour Laplacian response.
pub fn laplacian_magnitude(src: &ScalarImage) -> ScalarImage {
    let (w, h) = (src.width(), src.height());
    ScalarImage::from_fn(w, h, |x, y| {
        let c = src.get(x, y);
        let l = src.get(mirror(x as isize - 1, w), y);
        let r = src.get(mirror(x as isize + 1, w), y);
        let u = src.get(x, mirror(y as isize - 1, h));
        let d = src.get(x, mirror(y as isize + 1, h));
        (l + r + u + d - 4.0 * c).abs()
    })
}
