//! sRGB transfer functions (IEC 61966-2-1).
//!
//! PNG pixel data is treated as sRGB-encoded by convention. Operations that
//! need linear light (luminance adjustment, HDR synthesis, Lab conversion)
//! decode through [`eotf`]; results headed back to display encoding go
//! through [`oetf`]. The constant-hue-plane operations deliberately work on
//! the encoded values instead.

use crate::image::{DynamicRange, RgbImage};

/// Decode an sRGB-encoded value to linear light.
pub fn eotf(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// Encode a linear-light value to sRGB.
pub fn oetf(v: f64) -> f64 {
    if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

/// Decode a whole display-encoded image to linear light (still LDR-ranged).
pub fn decode_image(img: &RgbImage) -> RgbImage {
    img.map_pixels(DynamicRange::Ldr, |p| p.map(eotf))
}

/// Encode a linear LDR image for display.
pub fn encode_image(img: &RgbImage) -> RgbImage {
    img.map_pixels(DynamicRange::Ldr, |p| p.map(|v| oetf(v.clamp(0.0, 1.0))))
}
