//! HDR reference generation: inverse response calibration from an exposure
//! stack, weighted radiance merging, and synthetic stack generation for
//! simulations.
//!
//! Calibration follows the polynomial self-calibration approach with known
//! exposure ratios: the inverse response is modeled as a polynomial
//! `f_inv(v) = sum c_k v^k` with `f_inv(1) = 1`, and the coefficients are the
//! least-squares solution of the brightness-ratio constraints
//! `f_inv(v_i) = R * f_inv(v_{i+1})` over sampled pixel pairs.

use crate::error::{Error, Result};
use crate::image::{DynamicRange, RgbImage};
use crate::ssla::{luminance, MIDDLE_GRAY};
use crate::util::{log_average, Pcg32, LUMA_FLOOR};

/// Monotone polynomial model of the inverse camera response on [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    coeffs: Vec<f64>,
}

impl ResponseCurve {
    /// Validate and wrap polynomial coefficients (constant term first).
    /// Requires `f_inv(1) = 1` within 1e-9 and monotonicity on a 1024-point
    /// grid.
    pub fn from_coefficients(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Calibration("empty coefficient vector".into()));
        }
        let curve = Self { coeffs };
        let at_one: f64 = curve.coeffs.iter().sum();
        if (at_one - 1.0).abs() > 1e-9 {
            return Err(Error::Calibration(format!(
                "inverse response must map 1 to 1 (got {at_one})"
            )));
        }
        if !curve.is_monotone() {
            return Err(Error::Calibration(
                "inverse response is not monotone on [0,1]".into(),
            ));
        }
        Ok(curve)
    }

    /// The identity response `f_inv(v) = v`.
    pub fn identity() -> Self {
        Self {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluate the inverse response at `v`.
    pub fn evaluate(&self, v: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * v + c;
        }
        acc
    }

    fn is_monotone(&self) -> bool {
        const GRID: usize = 1024;
        let mut prev = self.evaluate(0.0);
        if !prev.is_finite() {
            return false;
        }
        for i in 1..=GRID {
            let v = i as f64 / GRID as f64;
            let cur = self.evaluate(v);
            if !cur.is_finite() || cur < prev - 1e-12 {
                return false;
            }
            prev = cur;
        }
        true
    }
}

/// An ordered set of aligned exposures with strictly increasing EVs.
#[derive(Debug, Clone)]
pub struct ExposureStack {
    images: Vec<RgbImage>,
    evs: Vec<f64>,
}

impl ExposureStack {
    pub fn new(images: Vec<RgbImage>, evs: Vec<f64>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::invalid("empty exposure stack"));
        }
        if images.len() != evs.len() {
            return Err(Error::invalid(format!(
                "stack has {} images but {} exposure values",
                images.len(),
                evs.len()
            )));
        }
        for ev in &evs {
            if !ev.is_finite() {
                return Err(Error::invalid("exposure values must be finite"));
            }
        }
        if evs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("exposure values must be strictly increasing"));
        }
        for img in &images {
            images[0].check_same_dimensions(img)?;
        }
        Ok(Self { images, evs })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[RgbImage] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &RgbImage {
        &self.images[i]
    }

    pub fn evs(&self) -> &[f64] {
        &self.evs
    }

    /// Exposure time relative to the 0 EV reference: `t_i = 2^ev_i`.
    pub fn exposure_time(&self, i: usize) -> f64 {
        self.evs[i].exp2()
    }

    /// Index of the middle exposure.
    pub fn middle_index(&self) -> usize {
        (self.images.len() - 1) / 2
    }
}

/// Code values inside this range are considered reliable: calibration
/// samples from it, and merging gives no weight outside it (the fitted
/// polynomial is unconstrained beyond its data).
pub const USABLE_CODE_RANGE: (f64, f64) = (0.05, 0.95);

/// Calibration knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrfOptions {
    /// Polynomial degree to try first; falls back on non-monotone fits.
    pub degree: usize,
    /// Number of pixel positions sampled for the constraints.
    pub samples: usize,
    /// Seed of the stratified position sampler.
    pub seed: u64,
    /// Usable code-value range; pairs outside it are dropped.
    pub value_range: (f64, f64),
}

impl Default for CrfOptions {
    fn default() -> Self {
        Self {
            degree: 5,
            samples: 2000,
            seed: 0,
            value_range: USABLE_CODE_RANGE,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Channel {
    Red,
    Green,
    Blue,
}

impl Channel {
    fn extract(self, img: &RgbImage, idx: usize) -> f64 {
        let base = idx * 3;
        match self {
            Channel::Red => img.data()[base],
            Channel::Green => img.data()[base + 1],
            Channel::Blue => img.data()[base + 2],
        }
    }
}

/// Stratified pixel positions: a luminance histogram of the middle exposure
/// splits the image into strata, and each stratum contributes positions in
/// proportion to its population.
fn sample_positions(stack: &ExposureStack, options: &CrfOptions) -> Vec<usize> {
    const BINS: usize = 64;
    let mid = luminance(stack.image(stack.middle_index()));
    let total = mid.data().len();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); BINS];
    for (idx, &l) in mid.data().iter().enumerate() {
        let bin = ((l.clamp(0.0, 1.0) * BINS as f64) as usize).min(BINS - 1);
        buckets[bin].push(idx);
    }
    let mut rng = Pcg32::new(options.seed);
    let mut positions = Vec::with_capacity(options.samples);
    for bucket in buckets.iter_mut() {
        if bucket.is_empty() {
            continue;
        }
        let want = ((options.samples as f64 * bucket.len() as f64 / total as f64).round()
            as usize)
            .min(bucket.len())
            .max(1);
        // Partial Fisher-Yates selection without replacement.
        let len = bucket.len();
        for k in 0..want {
            let j = k + rng.next_below(len - k);
            bucket.swap(k, j);
            positions.push(bucket[k]);
        }
    }
    positions.sort_unstable();
    positions
}

/// Solve `M x = rhs` by Gaussian elimination with partial pivoting.
fn solve_linear(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Two-round fit: an unweighted pass, then a pass reweighted by the inverse
/// of the first curve's values so that relative accuracy holds at the dark
/// end (dark samples still carry merge weight there).
fn fit_degree(
    rows: &[(f64, f64, f64)], // (v_bright, v_dim, ratio)
    degree: usize,
) -> Option<ResponseCurve> {
    let first = fit_weighted(rows, degree, |_| 1.0)?;
    let refit = fit_weighted(rows, degree, |va| {
        1.0 / first.evaluate(va).max(1e-3)
    });
    Some(refit.unwrap_or(first))
}

fn fit_weighted(
    rows: &[(f64, f64, f64)],
    degree: usize,
    row_weight: impl Fn(f64) -> f64,
) -> Option<ResponseCurve> {
    // Residual per row: sum_k c_k (va^k - R vb^k); eliminate c_N through the
    // normalization sum(c) = 1.
    let n = degree; // unknowns c_0..c_{N-1}
    let mut ata = vec![vec![0.0f64; n]; n];
    let mut atb = vec![0.0f64; n];
    let mut row_vec = vec![0.0f64; n];
    for &(va, vb, ratio) in rows {
        let w2 = {
            let w = row_weight(va);
            w * w
        };
        let mut pa = 1.0;
        let mut pb = 1.0;
        let mut d = Vec::with_capacity(degree + 1);
        for _ in 0..=degree {
            d.push(pa - ratio * pb);
            pa *= va;
            pb *= vb;
        }
        let dn = d[degree];
        for k in 0..n {
            row_vec[k] = d[k] - dn;
        }
        for i in 0..n {
            for j in 0..n {
                ata[i][j] += w2 * row_vec[i] * row_vec[j];
            }
            atb[i] -= w2 * row_vec[i] * dn;
        }
    }
    // Tiny ridge keeps degenerate (duplicate-row) systems solvable without
    // disturbing well-conditioned fits.
    let scale = (0..n).map(|i| ata[i][i]).fold(0.0f64, f64::max).max(1.0);
    for (i, row) in ata.iter_mut().enumerate() {
        row[i] += 1e-12 * scale;
    }

    // Derivative row of the eliminated parametrization at v:
    // slope(v) = sum_{k<N} c_k (k v^{k-1} - N v^{N-1}) + N v^{N-1}.
    let slope_row = |v: f64| -> (Vec<f64>, f64) {
        let dn = degree as f64 * v.powi(degree as i32 - 1);
        let g: Vec<f64> = (0..n)
            .map(|k| {
                let base = if k == 0 {
                    0.0
                } else {
                    k as f64 * v.powi(k as i32 - 1)
                };
                base - dn
            })
            .collect();
        (g, -dn)
    };

    // Active-set refinement: unconstrained fits of smooth responses can dip
    // slightly outside the sampled value range; pin the slope to zero at the
    // worst grid point and re-solve until the curve is monotone.
    let mut constraints: Vec<(Vec<f64>, f64)> = Vec::new();
    for _ in 0..degree + 2 {
        let k = constraints.len();
        let dim = n + k;
        let mut m = vec![vec![0.0f64; dim]; dim];
        let mut rhs = vec![0.0f64; dim];
        for i in 0..n {
            m[i][..n].copy_from_slice(&ata[i]);
            rhs[i] = atb[i];
        }
        for (j, (g, h)) in constraints.iter().enumerate() {
            for i in 0..n {
                m[i][n + j] = g[i];
                m[n + j][i] = g[i];
            }
            rhs[n + j] = *h;
        }
        let sol = solve_linear(m, rhs)?;
        let mut coeffs = sol[..n].to_vec();
        let rest: f64 = coeffs.iter().sum();
        coeffs.push(1.0 - rest);
        match ResponseCurve::from_coefficients(coeffs) {
            Ok(curve) => return Some(curve),
            Err(_) => {
                // Find the most negative grid-step difference and constrain.
                let candidate = ResponseCurve {
                    coeffs: sol[..n]
                        .iter()
                        .copied()
                        .chain(std::iter::once(1.0 - sol[..n].iter().sum::<f64>()))
                        .collect(),
                };
                const GRID: usize = 1024;
                let mut worst_v = 0.0;
                let mut worst_diff = f64::INFINITY;
                let mut prev = candidate.evaluate(0.0);
                if !prev.is_finite() {
                    return None;
                }
                for i in 1..=GRID {
                    let v = i as f64 / GRID as f64;
                    let cur = candidate.evaluate(v);
                    if !cur.is_finite() {
                        return None;
                    }
                    if cur - prev < worst_diff {
                        worst_diff = cur - prev;
                        worst_v = v - 1.0 / GRID as f64;
                    }
                    prev = cur;
                }
                if worst_diff >= -1e-12 {
                    // Non-monotonicity was not the rejection reason.
                    return None;
                }
                constraints.push(slope_row(worst_v));
            }
        }
    }
    None
}

/// Fit the inverse response from the stack's green channel.
///
/// Exposure ratios are taken as known from the EV metadata. On a
/// non-monotone fit the degree falls back one step at a time; degree
/// exhaustion or a shortage of usable sample pairs is an error.
pub fn estimate_crf(stack: &ExposureStack, options: &CrfOptions) -> Result<ResponseCurve> {
    estimate_crf_channel(stack, options, Channel::Green)
}

/// Independent per-channel calibration (red, green, blue).
pub fn estimate_crf_per_channel(
    stack: &ExposureStack,
    options: &CrfOptions,
) -> Result<[ResponseCurve; 3]> {
    Ok([
        estimate_crf_channel(stack, options, Channel::Red)?,
        estimate_crf_channel(stack, options, Channel::Green)?,
        estimate_crf_channel(stack, options, Channel::Blue)?,
    ])
}

fn estimate_crf_channel(
    stack: &ExposureStack,
    options: &CrfOptions,
    channel: Channel,
) -> Result<ResponseCurve> {
    if stack.len() < 2 {
        return Err(Error::Calibration(
            "calibration needs at least two exposures".into(),
        ));
    }
    if options.degree < 1 {
        return Err(Error::Calibration("degree must be at least 1".into()));
    }
    let positions = sample_positions(stack, options);
    let (lo, hi) = options.value_range;
    let mut rows = Vec::new();
    for i in 0..stack.len() - 1 {
        // R = t_i / t_{i+1} < 1 for increasing exposure.
        let ratio = (stack.evs()[i] - stack.evs()[i + 1]).exp2();
        let a = stack.image(i);
        let b = stack.image(i + 1);
        for &p in &positions {
            let va = channel.extract(a, p);
            let vb = channel.extract(b, p);
            if va >= lo && va <= hi && vb >= lo && vb <= hi {
                rows.push((va, vb, ratio));
            }
        }
    }
    if rows.len() < options.degree + 1 {
        return Err(Error::Calibration("insufficient calibration data".into()));
    }
    for degree in (1..=options.degree).rev() {
        if let Some(curve) = fit_degree(&rows, degree) {
            return Ok(curve);
        }
    }
    Err(Error::Calibration(
        "no monotone polynomial fit at any degree".into(),
    ))
}

/// Hat weight over code values: zero at the extremes, peaked at mid-range.
#[inline]
pub fn hat_weight(v: f64) -> f64 {
    let d = 2.0 * v - 1.0;
    (1.0 - d * d).max(0.0)
}

/// Weight used when all samples of a pixel are at the extremes.
const FALLBACK_WEIGHT: f64 = 1e-4;

/// Merge the stack into scene-referred radiance.
///
/// Per pixel and channel: `E = sum_i w(v_i) f_inv(v_i)/t_i / sum_i w(v_i)`
/// with the hat weight over [`USABLE_CODE_RANGE`]; outside that range the
/// fitted response carries no information, so those samples carry no
/// weight. Where every weight vanishes, the sample closest to mid-range is
/// used with a floor weight. The result is scaled so its log-average
/// luminance sits at middle gray (hue extraction is scale-invariant; the
/// anchor only aids inspection and metrics).
pub fn merge_hdr(stack: &ExposureStack, curve: &ResponseCurve) -> Result<RgbImage> {
    let shared = [curve.clone(), curve.clone(), curve.clone()];
    merge_hdr_channels(stack, &shared)
}

/// [`merge_hdr`] with an independent curve per channel.
pub fn merge_hdr_channels(
    stack: &ExposureStack,
    curves: &[ResponseCurve; 3],
) -> Result<RgbImage> {
    let (w, h) = (stack.image(0).width(), stack.image(0).height());
    let n = stack.len();
    let times: Vec<f64> = (0..n).map(|i| stack.exposure_time(i)).collect();
    let mut out = RgbImage::new(w, h, DynamicRange::Hdr);
    for y in 0..h {
        for x in 0..w {
            let mut e = [0.0f64; 3];
            for ch in 0..3 {
                let mut num = 0.0;
                let mut den = 0.0;
                let mut best = 0usize;
                let mut best_dist = f64::INFINITY;
                for i in 0..n {
                    let v = match ch {
                        0 => stack.image(i).pixel(x, y).r,
                        1 => stack.image(i).pixel(x, y).g,
                        _ => stack.image(i).pixel(x, y).b,
                    };
                    let wgt = if v >= USABLE_CODE_RANGE.0 && v <= USABLE_CODE_RANGE.1 {
                        hat_weight(v)
                    } else {
                        0.0
                    };
                    // The fitted polynomial can dip below zero outside its
                    // sampled range; radiance cannot.
                    num += wgt * curves[ch].evaluate(v).max(0.0) / times[i];
                    den += wgt;
                    let dist = (v - 0.5).abs();
                    if dist < best_dist {
                        best_dist = dist;
                        best = i;
                    }
                }
                e[ch] = if den > FALLBACK_WEIGHT {
                    num / den
                } else {
                    let v = match ch {
                        0 => stack.image(best).pixel(x, y).r,
                        1 => stack.image(best).pixel(x, y).g,
                        _ => stack.image(best).pixel(x, y).b,
                    };
                    curves[ch].evaluate(v).max(0.0) / times[best]
                };
                e[ch] = e[ch].max(0.0);
            }
            out.set_pixel(x, y, crate::image::RgbPixel::new(e[0], e[1], e[2]));
        }
    }
    // Anchor to middle gray.
    let la = log_average(luminance(&out).data().iter().copied(), LUMA_FLOOR);
    let scale = if la > 0.0 { MIDDLE_GRAY / la } else { 1.0 };
    Ok(out.map_pixels(DynamicRange::Hdr, |p| p.map(|v| v * scale)))
}

/// Forward camera response used when synthesizing exposures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwardCrf {
    /// `f(x) = x^(1/gamma)`; `Gamma(1.0)` is the identity.
    Gamma(f64),
}

impl ForwardCrf {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ForwardCrf::Gamma(g) => {
                if g == 1.0 {
                    x
                } else {
                    x.max(0.0).powf(1.0 / g)
                }
            }
        }
    }

    pub fn gamma(self) -> f64 {
        match self {
            ForwardCrf::Gamma(g) => g,
        }
    }
}

/// Synthesis knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub crf: ForwardCrf,
    /// Optional quantization to this many bits per channel.
    pub quantize_bits: Option<u32>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            crf: ForwardCrf::Gamma(2.2),
            quantize_bits: None,
        }
    }
}

/// Render an exposure stack from scene radiance.
///
/// 0 EV is anchored so the radiance log-average luminance lands on middle
/// gray before the forward response: `I_i = f(2^ev * kappa * E)` clamped to
/// [0,1].
pub fn synthesize_stack(
    hdr: &RgbImage,
    evs: &[f64],
    options: &SynthOptions,
) -> Result<ExposureStack> {
    if evs.is_empty() {
        return Err(Error::invalid("need at least one exposure value"));
    }
    if evs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("exposure values must be strictly increasing"));
    }
    let la = log_average(luminance(hdr).data().iter().copied(), LUMA_FLOOR);
    let kappa = if la > 0.0 { MIDDLE_GRAY / la } else { 1.0 };
    let quant = options.quantize_bits.map(|bits| (1u64 << bits) as f64 - 1.0);
    let images: Vec<RgbImage> = evs
        .iter()
        .map(|ev| {
            let gain = ev.exp2() * kappa;
            hdr.map_pixels(DynamicRange::Ldr, |p| {
                p.map(|v| {
                    let mut code = options.crf.apply(gain * v).clamp(0.0, 1.0);
                    if let Some(levels) = quant {
                        code = (code * levels).round() / levels;
                    }
                    code
                })
            })
        })
        .collect();
    ExposureStack::new(images, evs.to_vec())
}
