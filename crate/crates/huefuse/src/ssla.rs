//! Scene-segmentation-based luminance adjustment.
//!
//! From one exposure stack, produce one luminance-adjusted image per scene
//! area so that each area is well exposed in at least one of them:
//!
//! 1. luminance of every input,
//! 2. local dodging and burning,
//! 3. mixture-model segmentation of the scene into areas,
//! 4. global rescale anchoring each area's geometric mean to middle gray,
//! 5. tone compression to avoid saturation,
//! 6. per-pixel color reconstruction at the adjusted luminance.

use crate::error::{Error, Result};
use crate::filter::gaussian_blur;
use crate::gmm;
use crate::image::{DynamicRange, RgbImage, RgbPixel, ScalarImage};
use crate::util::{geometric_mean, LUMA_FLOOR};

/// Photographic middle-gray anchor.
pub const MIDDLE_GRAY: f64 = 0.18;

/// Cap on the segment scale factor when a segment carries no luminance.
pub const MAX_SCALE: f64 = 1e6;

/// Rec.709 luma of each pixel.
pub fn luminance(image: &RgbImage) -> ScalarImage {
    ScalarImage::from_fn(image.width(), image.height(), |x, y| {
        let p = image.pixel(x, y);
        0.2126 * p.r + 0.7152 * p.g + 0.0722 * p.b
    })
}

/// Local contrast enhancement `L' = L^2 / blur(L)`.
///
/// The neighborhood average uses a Gaussian with sigma = min(w,h)/16, so
/// values above their surround are pushed up and values below are pushed
/// down; constant maps pass through unchanged.
pub fn dodge_burn(l: &ScalarImage) -> ScalarImage {
    let sigma = (l.width().min(l.height()) as f64 / 16.0).max(0.05);
    let local = gaussian_blur(l, sigma);
    let mut out = ScalarImage::new(l.width(), l.height());
    for (o, (&v, &avg)) in out
        .data_mut()
        .iter_mut()
        .zip(l.data().iter().zip(local.data()))
    {
        *o = v * v / avg.max(LUMA_FLOOR);
    }
    out
}

/// Scene areas from mixture-model clustering of log-luminance features.
#[derive(Debug, Clone)]
pub struct Segmentation {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    /// Actual number of areas; can be below the requested count when the
    /// features do not support that many clusters.
    pub count: usize,
    /// Set when `count` dropped below the requested component count.
    pub collapsed: bool,
    /// False when EM stopped on its iteration cap.
    pub converged: bool,
}

impl Segmentation {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> usize {
        self.labels[y * self.width + x] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn pixels_in(&self, label: usize) -> usize {
        self.labels.iter().filter(|&&l| l as usize == label).count()
    }
}

/// Partition the scene into (at most) `m` areas.
///
/// Features are the log of the per-pixel geometric mean of the enhanced
/// luminances across the stack. Labels are renumbered so that area means
/// increase with the label index, and empty components are dropped.
pub fn segment(enhanced: &[ScalarImage], m: usize) -> Result<Segmentation> {
    let first = enhanced
        .first()
        .ok_or_else(|| Error::invalid("segmentation needs at least one luminance map"))?;
    if m < 1 {
        return Err(Error::invalid("segment count must be at least 1"));
    }
    for l in enhanced {
        if !first.same_dimensions(l) {
            return Err(Error::DimensionMismatch(
                first.width(),
                first.height(),
                l.width(),
                l.height(),
            ));
        }
    }
    let (w, h) = (first.width(), first.height());
    let n_maps = enhanced.len() as f64;
    let features: Vec<f64> = (0..w * h)
        .map(|idx| {
            let mut log_sum = 0.0;
            let mut any_zero = false;
            for l in enhanced {
                let v = l.data()[idx];
                if v <= 0.0 {
                    any_zero = true;
                    break;
                }
                log_sum += v.ln();
            }
            let gm = if any_zero { 0.0 } else { (log_sum / n_maps).exp() };
            (gm + LUMA_FLOOR).ln()
        })
        .collect();

    let (labels, count, converged) = if m == 1 {
        (vec![0u32; w * h], 1, true)
    } else {
        let fit = gmm::fit(&features, m);
        let raw = gmm::assign(&features, &fit);
        // Drop empty labels, then order survivors by increasing mean.
        let mut used: Vec<usize> = (0..m).filter(|&j| raw.iter().any(|&l| l as usize == j)).collect();
        used.sort_by(|&a, &b| fit.means[a].total_cmp(&fit.means[b]));
        let mut remap = vec![0u32; m];
        for (new, &old) in used.iter().enumerate() {
            remap[old] = new as u32;
        }
        let labels: Vec<u32> = raw.iter().map(|&l| remap[l as usize]).collect();
        (labels, used.len(), fit.converged)
    };

    Ok(Segmentation {
        width: w,
        height: h,
        labels,
        count,
        collapsed: count < m,
        converged,
    })
}

/// A globally rescaled luminance map anchored on one segment.
#[derive(Debug, Clone)]
pub struct ScaledLuminance {
    pub map: ScalarImage,
    /// The applied global factor.
    pub factor: f64,
    /// Set when the segment had no usable luminance and the factor was capped.
    pub capped: bool,
}

/// Rescale the whole map so segment `label`'s geometric mean lands on
/// middle gray.
pub fn scale_segment(
    enhanced: &ScalarImage,
    segmentation: &Segmentation,
    label: usize,
) -> Result<ScaledLuminance> {
    if label >= segmentation.count {
        return Err(Error::invalid(format!(
            "segment label {label} out of range (count {})",
            segmentation.count
        )));
    }
    if enhanced.width() != segmentation.width() || enhanced.height() != segmentation.height() {
        return Err(Error::DimensionMismatch(
            enhanced.width(),
            enhanced.height(),
            segmentation.width(),
            segmentation.height(),
        ));
    }
    let members = enhanced
        .data()
        .iter()
        .zip(segmentation.labels())
        .filter(|&(_, &l)| l as usize == label)
        .map(|(&v, _)| v);
    let gm = geometric_mean(members, LUMA_FLOOR);
    let (factor, capped) = match gm {
        Some(g) => {
            let f = MIDDLE_GRAY / g;
            if f > MAX_SCALE {
                (MAX_SCALE, true)
            } else {
                (f, false)
            }
        }
        None => (MAX_SCALE, true),
    };
    Ok(ScaledLuminance {
        map: enhanced.map(|v| factor * v),
        factor,
        capped,
    })
}

/// Reinhard global tone compression `x / (1 + x)`; maps [0,inf) into [0,1).
pub fn tone_map(l: &ScalarImage) -> ScalarImage {
    l.map(|v| v / (1.0 + v))
}

/// Rebuild colors at a new luminance: every channel is multiplied by
/// `target / luminance`, preserving chromaticity until the [0,1] clamp.
/// Returns the adjusted image and the number of pixels that clipped.
pub fn adjust_pixels(
    image: &RgbImage,
    lum: &ScalarImage,
    target: &ScalarImage,
) -> (RgbImage, usize) {
    assert!(image.width() == lum.width() && image.height() == lum.height());
    assert!(lum.same_dimensions(target));
    let mut clipped = 0usize;
    let out = RgbImage::from_fn(image.width(), image.height(), DynamicRange::Ldr, |x, y| {
        let ratio = target.get(x, y) / lum.get(x, y).max(LUMA_FLOOR);
        let p = image.pixel(x, y);
        let scaled = RgbPixel::new(p.r * ratio, p.g * ratio, p.b * ratio);
        if scaled.max_channel() > 1.0 || scaled.min_channel() < 0.0 {
            clipped += 1;
        }
        scaled.clamp01()
    });
    (out, clipped)
}

/// Everything produced by one SSLA run.
#[derive(Debug, Clone)]
pub struct SslaOutput {
    /// One luminance-adjusted image per segment, ordered by segment label.
    pub images: Vec<RgbImage>,
    pub segmentation: Segmentation,
    /// Global scale factor used for each segment.
    pub factors: Vec<f64>,
    /// Count of clipped pixels per adjusted image.
    pub clipped: Vec<usize>,
    /// Set when any segment's scale factor hit the cap.
    pub scale_capped: bool,
}

/// Run the six-step adjustment over an aligned stack.
///
/// Steps 4-6 operate on the stack's middle exposure, which is the least
/// clipped on average. Returns one adjusted image per detected segment.
pub fn run_ssla(stack: &[RgbImage], m: usize) -> Result<SslaOutput> {
    if stack.is_empty() {
        return Err(Error::invalid("empty image stack"));
    }
    for img in stack {
        stack[0].check_same_dimensions(img)?;
    }
    let luminances: Vec<ScalarImage> = stack.iter().map(luminance).collect();
    let enhanced: Vec<ScalarImage> = luminances.iter().map(dodge_burn).collect();
    let segmentation = segment(&enhanced, m)?;

    let base = (stack.len() - 1) / 2;
    let base_image = &stack[base];
    let base_lum = &luminances[base];
    let base_enh = &enhanced[base];

    let mut images = Vec::with_capacity(segmentation.count);
    let mut factors = Vec::with_capacity(segmentation.count);
    let mut clipped = Vec::with_capacity(segmentation.count);
    let mut scale_capped = false;
    for label in 0..segmentation.count {
        let scaled = scale_segment(base_enh, &segmentation, label)?;
        scale_capped |= scaled.capped;
        let compressed = tone_map(&scaled.map);
        let (img, clips) = adjust_pixels(base_image, base_lum, &compressed);
        images.push(img);
        factors.push(scaled.factor);
        clipped.push(clips);
    }
    Ok(SslaOutput {
        images,
        segmentation,
        factors,
        clipped,
        scale_capped,
    })
}
