//! Constant-hue-plane color geometry.
//!
//! Every RGB pixel can be written as a convex combination of white
//! `w = (1,1,1)`, black `k = (0,0,0)` and a maximally saturated color `c`
//! that carries the hue:
//!
//! ```text
//! x = a_w·w + a_k·k + a_c·c
//! a_w = min(x),  a_k = 1 - max(x),  a_c = max(x) - min(x)
//! c   = (x - min(x)) / (max(x) - min(x))
//! ```
//!
//! `c` depends only on channel ratios, so it is invariant under luminance
//! scaling and gray offsets. Hue correction transplants `c` from a reference
//! pixel while keeping the source coefficients.

use crate::error::Result;
use crate::image::{DynamicRange, RgbImage, RgbPixel};

/// Spread below which a pixel is treated as achromatic: the direction of the
/// hue vector is numerically meaningless underneath it.
pub const CHROMA_EPSILON: f64 = 1e-6;

/// Hue vector components are snapped to this grid (26 fractional bits).
/// Affine luminance changes perturb the division in the hue formula by a few
/// ulps; snapping makes pixels that share a hue produce bit-identical `c`.
const HUE_GRID: f64 = (1u64 << 26) as f64;

#[inline]
fn snap(v: f64) -> f64 {
    (v * HUE_GRID).round() / HUE_GRID
}

/// Decomposition of a pixel on its constant-hue plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HueCoords {
    /// White coefficient, `min(x)` clamped to [0,1].
    pub a_w: f64,
    /// Black coefficient, `1 - max(x)` clamped to [0,1].
    pub a_k: f64,
    /// Chroma coefficient, `max(x) - min(x)` clamped to [0,1].
    pub a_c: f64,
    /// Maximally saturated color; `(0,0,0)` by convention for achromatic
    /// pixels, otherwise min component 0 and max component 1.
    pub c: RgbPixel,
}

impl HueCoords {
    /// True when the source pixel carried a usable hue direction.
    pub fn is_chromatic(&self) -> bool {
        self.a_c > CHROMA_EPSILON
    }
}

/// Split a pixel into white/black/chroma coefficients and its hue vector.
///
/// Accepts scene-referred pixels as well: the hue vector only involves
/// channel ratios and stays valid, while the coefficients are clamped into
/// [0,1] and should not be trusted beyond that.
pub fn decompose(x: RgbPixel) -> HueCoords {
    let lo = x.min_channel();
    let hi = x.max_channel();
    let spread = hi - lo;
    let c = if spread > CHROMA_EPSILON {
        // Channels equal to lo give exactly 0, channels equal to hi exactly 1.
        RgbPixel::new(
            snap((x.r - lo) / spread),
            snap((x.g - lo) / spread),
            snap((x.b - lo) / spread),
        )
    } else {
        RgbPixel::new(0.0, 0.0, 0.0)
    };
    HueCoords {
        a_w: lo.clamp(0.0, 1.0),
        a_k: (1.0 - hi).clamp(0.0, 1.0),
        a_c: spread.clamp(0.0, 1.0),
        c,
    }
}

/// Rebuild the pixel `a_w·w + a_k·k + a_c·c`.
pub fn recompose(h: &HueCoords) -> RgbPixel {
    RgbPixel::new(
        h.a_w + h.a_c * h.c.r,
        h.a_w + h.a_c * h.c.g,
        h.a_w + h.a_c * h.c.b,
    )
}

/// Replace the hue of `x` with the hue of `x_ref`, keeping `x`'s
/// white/black/chroma balance. Returns `x` unchanged when the reference is
/// achromatic (it carries no hue information).
pub fn transplant_hue(x: RgbPixel, x_ref: RgbPixel) -> RgbPixel {
    let reference = decompose(x_ref);
    if !reference.is_chromatic() {
        return x;
    }
    let h = decompose(x);
    RgbPixel::new(
        h.a_w + h.a_c * reference.c.r,
        h.a_w + h.a_c * reference.c.g,
        h.a_w + h.a_c * reference.c.b,
    )
}

/// Per-pixel hue transplantation from `reference` into `fused`.
///
/// The images must be pixel-aligned (both derive from the same stack).
pub fn correct_image_hue(fused: &RgbImage, reference: &RgbImage) -> Result<RgbImage> {
    fused.check_same_dimensions(reference)?;
    let mut out = RgbImage::new(fused.width(), fused.height(), DynamicRange::Ldr);
    for y in 0..fused.height() {
        for x in 0..fused.width() {
            out.set_pixel(x, y, transplant_hue(fused.pixel(x, y), reference.pixel(x, y)));
        }
    }
    Ok(out)
}
