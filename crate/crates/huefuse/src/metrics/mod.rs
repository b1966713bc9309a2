//! Image quality metrics: CIEDE2000 hue difference and TMQI.

mod lab;
mod tmqi;

pub use lab::{delta_e_ciede2000, delta_h_ciede2000, mean_delta_h, srgb_to_lab, LabPixel};
pub use tmqi::{overall_score, tmqi, TmqiScore};

use crate::color_hue;
use crate::error::Result;
use crate::image::{DynamicRange, RgbImage};
use crate::srgb;
use crate::ssla::{luminance, MIDDLE_GRAY};
use crate::util::{log_average, LUMA_FLOOR};

/// Render the display-referred reference used by the hue-distortion metric.
///
/// The scene-referred image is tone-compressed on luminance (hue-preserving
/// channel scaling), display-encoded, and then its hue vectors are
/// transplanted back from the scene-referred source. The result is a [0,1]
/// image that carries the reference hue by construction, so the metric
/// isolates hue as the measured quantity.
pub fn prepare_hue_reference(hdr: &RgbImage) -> Result<RgbImage> {
    let l = luminance(hdr);
    let key = MIDDLE_GRAY / log_average(l.data().iter().copied(), LUMA_FLOOR).max(1e-300);
    let mut rendered = RgbImage::new(hdr.width(), hdr.height(), DynamicRange::Ldr);
    for y in 0..hdr.height() {
        for x in 0..hdr.width() {
            let p = hdr.pixel(x, y);
            let lum = l.get(x, y);
            let scaled = key * lum;
            let display_lum = scaled / (1.0 + scaled);
            let ratio = display_lum / lum.max(LUMA_FLOOR);
            rendered.set_pixel(
                x,
                y,
                p.map(|v| srgb::oetf((v * ratio).clamp(0.0, 1.0))),
            );
        }
    }
    color_hue::correct_image_hue(&rendered, hdr)
}
