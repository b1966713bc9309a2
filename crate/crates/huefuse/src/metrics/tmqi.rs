//! Tone-mapped image quality index.
//!
//! Combines a multi-scale structural-fidelity term computed between the HDR
//! reference luminance and the rendered image, and a statistical-naturalness
//! term computed from the rendered image alone:
//!
//! ```text
//! Q = a * S^alpha + (1 - a) * N^beta
//! ```
//!
//! Local standard deviations pass through a contrast-visibility mapping (a
//! Gaussian CDF around a CSF-derived threshold) before entering the
//! structure comparison, so invisible contrast differences do not count.

use crate::error::{Error, Result};
use crate::image::{RgbImage, ScalarImage};
use crate::ssla::luminance;
use crate::util::normal_cdf;

const A: f64 = 0.8012;
const ALPHA: f64 = 0.3046;
const BETA: f64 = 0.7088;

const SCALE_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
const WINDOW: usize = 11;
const WINDOW_SIGMA: f64 = 1.5;
const C1: f64 = 0.01;
const C2: f64 = 10.0;

/// Naturalness priors on the rendered image's global mean and local std
/// (in 0..255 units).
const MEAN_PRIOR_MU: f64 = 115.94;
const MEAN_PRIOR_SIGMA: f64 = 27.99;
const STD_PRIOR_ALPHA: f64 = 4.4;
const STD_PRIOR_BETA: f64 = 10.1;
const STD_NORMALIZER: f64 = 64.29;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmqiScore {
    /// Overall quality in [0,1].
    pub q: f64,
    /// Structural fidelity in [0,1].
    pub s: f64,
    /// Statistical naturalness in [0,1].
    pub n: f64,
    /// Number of scales actually evaluated (5 unless the image is small).
    pub scales_used: usize,
}

/// `Q = a*S^alpha + (1-a)*N^beta`; monotone in both components.
pub fn overall_score(s: f64, n: f64) -> f64 {
    A * s.powf(ALPHA) + (1.0 - A) * n.powf(BETA)
}

fn gaussian_window() -> [f64; WINDOW] {
    let mut taps = [0.0f64; WINDOW];
    let c = (WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, t) in taps.iter_mut().enumerate() {
        *t = (-((i as f64 - c).powi(2)) / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp();
        sum += *t;
    }
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Separable windowed mean with 'valid' extent: output is (w-10) x (h-10).
fn window_mean_valid(img: &ScalarImage, taps: &[f64; WINDOW]) -> ScalarImage {
    let (w, h) = (img.width(), img.height());
    let ow = w - (WINDOW - 1);
    let oh = h - (WINDOW - 1);
    let mut rows = ScalarImage::new(ow, h);
    for y in 0..h {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                acc += t * img.get(x + k, y);
            }
            rows.set(x, y, acc);
        }
    }
    let mut out = ScalarImage::new(ow, oh);
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                acc += t * rows.get(x, y + k);
            }
            out.set(x, y, acc);
        }
    }
    out
}

fn product(a: &ScalarImage, b: &ScalarImage) -> ScalarImage {
    let mut out = a.clone();
    for (o, &v) in out.data_mut().iter_mut().zip(b.data()) {
        *o *= v;
    }
    out
}

/// Single-scale structural fidelity between reference and test luminance.
fn structural_fidelity_scale(l_ref: &ScalarImage, l_test: &ScalarImage, sf: f64) -> f64 {
    let taps = gaussian_window();
    let mu1 = window_mean_valid(l_ref, &taps);
    let mu2 = window_mean_valid(l_test, &taps);
    let m11 = window_mean_valid(&product(l_ref, l_ref), &taps);
    let m22 = window_mean_valid(&product(l_test, l_test), &taps);
    let m12 = window_mean_valid(&product(l_ref, l_test), &taps);

    // Contrast-visibility threshold from the CSF at this spatial frequency.
    let csf = 100.0 * 2.6 * (0.0192 + 0.114 * sf) * (-(0.114 * sf).powf(1.1)).exp();
    let u = 128.0 / (1.4 * csf);
    let sig = u / 3.0;

    let n = mu1.data().len();
    let mut sum = 0.0;
    for i in 0..n {
        let s1 = (m11.data()[i] - mu1.data()[i] * mu1.data()[i]).max(0.0).sqrt();
        let s2 = (m22.data()[i] - mu2.data()[i] * mu2.data()[i]).max(0.0).sqrt();
        let s12 = m12.data()[i] - mu1.data()[i] * mu2.data()[i];
        let s1_mapped = normal_cdf(s1, u, sig);
        let s2_mapped = normal_cdf(s2, u, sig);
        let contrast = (2.0 * s1_mapped * s2_mapped + C1)
            / (s1_mapped * s1_mapped + s2_mapped * s2_mapped + C1);
        let structure = (s12 + C2) / (s1 * s2 + C2);
        sum += contrast * structure;
    }
    sum / n as f64
}

/// 2x2 mean then factor-2 decimation (symmetric edge handling).
fn halve(img: &ScalarImage) -> ScalarImage {
    let (w, h) = (img.width(), img.height());
    let get = |x: usize, y: usize| img.get(x.min(w - 1), y.min(h - 1));
    ScalarImage::from_fn(w.div_ceil(2), h.div_ceil(2), |x, y| {
        let (sx, sy) = (2 * x, 2 * y);
        0.25 * (get(sx, sy) + get(sx + 1, sy) + get(sx, sy + 1) + get(sx + 1, sy + 1))
    })
}

/// Per-block standard deviation averaged over distinct 11x11 blocks
/// (partial blocks at the borders included, sample std with n-1).
fn mean_block_std(img: &ScalarImage) -> f64 {
    let (w, h) = (img.width(), img.height());
    let mut total = 0.0;
    let mut wsum = 0.0;
    let mut by = 0;
    while by < h {
        let bh = WINDOW.min(h - by);
        let mut bx = 0;
        while bx < w {
            let bw = WINDOW.min(w - bx);
            let n = (bw * bh) as f64;
            let mut s = 0.0;
            let mut s2 = 0.0;
            for y in by..by + bh {
                for x in bx..bx + bw {
                    let v = img.get(x, y);
                    s += v;
                    s2 += v * v;
                }
            }
            let std = if n > 1.0 {
                ((s2 - s * s / n) / (n - 1.0)).max(0.0).sqrt()
            } else {
                0.0
            };
            // Weight by block size so partial border blocks count less.
            total += std * n;
            wsum += n;
            bx += WINDOW;
        }
        by += WINDOW;
    }
    total / wsum
}

fn statistical_naturalness(l_test: &ScalarImage) -> f64 {
    let n = l_test.data().len() as f64;
    let mean: f64 = l_test.data().iter().sum::<f64>() / n;
    let std = mean_block_std(l_test);

    // Gaussian prior on the mean, ratio to its peak.
    let d = (mean - MEAN_PRIOR_MU) / MEAN_PRIOR_SIGMA;
    let pc = (-0.5 * d * d).exp();

    // Beta prior on the normalized std, ratio to its mode.
    let x = (std / STD_NORMALIZER).clamp(0.0, 1.0);
    let mode = (STD_PRIOR_ALPHA - 1.0) / (STD_PRIOR_ALPHA + STD_PRIOR_BETA - 2.0);
    let beta_ln = |v: f64| -> f64 {
        (STD_PRIOR_ALPHA - 1.0) * v.max(1e-300).ln()
            + (STD_PRIOR_BETA - 1.0) * (1.0 - v).max(1e-300).ln()
    };
    let pd = if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (beta_ln(x) - beta_ln(mode)).exp()
    };
    (pc * pd).clamp(0.0, 1.0)
}

/// Score a rendered image against its scene-referred reference.
///
/// The HDR luminance is stretched over a wide fixed range and the rendering
/// over 0..255, following the metric's reference formulation. Images must
/// be at least 11x11; the scale count drops below 5 when intermediate
/// scales get smaller than the analysis window.
pub fn tmqi(ref_hdr: &RgbImage, test: &RgbImage) -> Result<TmqiScore> {
    ref_hdr.check_same_dimensions(test)?;
    let (w, h) = (ref_hdr.width(), ref_hdr.height());
    if w < WINDOW || h < WINDOW {
        return Err(Error::invalid(format!(
            "image {w}x{h} is smaller than the {WINDOW}x{WINDOW} analysis window"
        )));
    }

    // Reference luminance stretched to a wide fixed scale, rendering to 0..255.
    let l_ref_raw = luminance(ref_hdr);
    let lmin = l_ref_raw.data().iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = l_ref_raw
        .data()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = (lmax - lmin).max(1e-12);
    let full = (1u64 << 32) as f64 - 1.0;
    let mut l_ref = l_ref_raw.map(|v| full * (v - lmin) / span);
    let mut l_test = luminance(test).map(|v| 255.0 * v);

    // How many scales fit: each scale needs at least WINDOW pixels per side.
    let mut scales_used = 0usize;
    let (mut sw, mut sh) = (w, h);
    for _ in 0..SCALE_WEIGHTS.len() {
        if sw < WINDOW || sh < WINDOW {
            break;
        }
        scales_used += 1;
        sw = sw.div_ceil(2);
        sh = sh.div_ceil(2);
    }
    let weight_norm: f64 = SCALE_WEIGHTS[..scales_used].iter().sum();

    let mut s = 1.0f64;
    let mut sf = 32.0;
    for level in 0..scales_used {
        sf /= 2.0;
        let s_level = structural_fidelity_scale(&l_ref, &l_test, sf).clamp(0.0, 1.0);
        s *= s_level.powf(SCALE_WEIGHTS[level] / weight_norm);
        if level + 1 < scales_used {
            l_ref = halve(&l_ref);
            l_test = halve(&l_test);
        }
    }
    let s = s.clamp(0.0, 1.0);
    let n = statistical_naturalness(&luminance(test).map(|v| 255.0 * v));
    Ok(TmqiScore {
        q: overall_score(s, n),
        s,
        n,
        scales_used,
    })
}
