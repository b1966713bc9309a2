//! sRGB to CIELAB conversion and the CIEDE2000 color-difference terms.
//!
//! The hue-distortion metric reported by the evaluation harness is the hue
//! contribution `|dH' / (k_H * S_H)|` of CIEDE2000 with `k_H = 1`. The full
//! difference formula is assembled from the same intermediates and kept as
//! an internal consistency gate against the published test-vector set.

use crate::error::Result;
use crate::image::{RgbImage, RgbPixel};
use crate::srgb;

/// CIELAB coordinates (D65 white).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabPixel {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

// D65 white as the row sums of the conversion matrix below, so that sRGB
// white lands exactly on L=100, a=b=0.
const XN: f64 = 0.9505;
const YN: f64 = 1.0;
const ZN: f64 = 1.0890;

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Interpret `p` as sRGB-encoded and convert through XYZ(D65) to Lab.
pub fn srgb_to_lab(p: RgbPixel) -> LabPixel {
    let r = srgb::eotf(p.r);
    let g = srgb::eotf(p.g);
    let b = srgb::eotf(p.b);
    let x = 0.4124 * r + 0.3576 * g + 0.1805 * b;
    let y = 0.2126 * r + 0.7152 * g + 0.0722 * b;
    let z = 0.0193 * r + 0.1192 * g + 0.9505 * b;
    let fx = lab_f(x / XN);
    let fy = lab_f(y / YN);
    let fz = lab_f(z / ZN);
    LabPixel {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

/// The CIEDE2000 intermediate quantities shared by the full difference and
/// its hue term.
#[derive(Debug, Clone, Copy)]
struct Ciede2000Terms {
    delta_l: f64,
    delta_c: f64,
    /// dH' = 2 sqrt(C1' C2') sin(dh'/2)
    delta_h: f64,
    s_l: f64,
    s_c: f64,
    s_h: f64,
    r_t: f64,
}

fn ciede2000_terms(p1: LabPixel, p2: LabPixel) -> Ciede2000Terms {
    const POW25_7: f64 = 6103515625.0; // 25^7

    let c1 = p1.a.hypot(p1.b);
    let c2 = p2.a.hypot(p2.b);
    let c_bar = 0.5 * (c1 + c2);
    let c_bar7 = c_bar.powi(7);
    let g = 0.5 * (1.0 - (c_bar7 / (c_bar7 + POW25_7)).sqrt());
    let a1p = (1.0 + g) * p1.a;
    let a2p = (1.0 + g) * p2.a;
    let c1p = a1p.hypot(p1.b);
    let c2p = a2p.hypot(p2.b);

    let hue_angle = |ap: f64, b: f64| -> f64 {
        if ap == 0.0 && b == 0.0 {
            0.0
        } else {
            let h = b.atan2(ap).to_degrees();
            if h < 0.0 {
                h + 360.0
            } else {
                h
            }
        }
    };
    let h1p = hue_angle(a1p, p1.b);
    let h2p = hue_angle(a2p, p2.b);

    let delta_l = p2.l - p1.l;
    let delta_c = c2p - c1p;
    let dhp = if c1p * c2p == 0.0 {
        0.0
    } else {
        let mut d = h2p - h1p;
        if d > 180.0 {
            d -= 360.0;
        } else if d < -180.0 {
            d += 360.0;
        }
        d
    };
    let delta_h = 2.0 * (c1p * c2p).sqrt() * (dhp.to_radians() / 2.0).sin();

    let l_bar = 0.5 * (p1.l + p2.l);
    let c_bar_p = 0.5 * (c1p + c2p);
    let h_bar = if c1p * c2p == 0.0 {
        h1p + h2p
    } else {
        let sum = h1p + h2p;
        let diff = (h1p - h2p).abs();
        if diff <= 180.0 {
            0.5 * sum
        } else if sum < 360.0 {
            0.5 * (sum + 360.0)
        } else {
            0.5 * (sum - 360.0)
        }
    };

    let t = 1.0 - 0.17 * (h_bar - 30.0).to_radians().cos()
        + 0.24 * (2.0 * h_bar).to_radians().cos()
        + 0.32 * (3.0 * h_bar + 6.0).to_radians().cos()
        - 0.20 * (4.0 * h_bar - 63.0).to_radians().cos();

    let dl2 = (l_bar - 50.0) * (l_bar - 50.0);
    let s_l = 1.0 + 0.015 * dl2 / (20.0 + dl2).sqrt();
    let s_c = 1.0 + 0.045 * c_bar_p;
    let s_h = 1.0 + 0.015 * c_bar_p * t;

    let delta_theta = 30.0 * (-((h_bar - 275.0) / 25.0).powi(2)).exp();
    let c_bar_p7 = c_bar_p.powi(7);
    let r_c = 2.0 * (c_bar_p7 / (c_bar_p7 + POW25_7)).sqrt();
    let r_t = -r_c * (2.0 * delta_theta).to_radians().sin();

    Ciede2000Terms {
        delta_l,
        delta_c,
        delta_h,
        s_l,
        s_c,
        s_h,
        r_t,
    }
}

/// Full CIEDE2000 difference (unit weighting factors). Internal oracle gate
/// for the shared intermediates; the evaluation harness reports only the hue
/// term.
pub fn delta_e_ciede2000(p1: LabPixel, p2: LabPixel) -> f64 {
    let t = ciede2000_terms(p1, p2);
    let l = t.delta_l / t.s_l;
    let c = t.delta_c / t.s_c;
    let h = t.delta_h / t.s_h;
    (l * l + c * c + h * h + t.r_t * c * h).sqrt()
}

/// Hue contribution `|dH' / (k_H * S_H)|` with `k_H = 1`. Achromatic pairs
/// give 0 by the hue-angle conventions.
pub fn delta_h_ciede2000(p1: LabPixel, p2: LabPixel) -> f64 {
    let t = ciede2000_terms(p1, p2);
    (t.delta_h / t.s_h).abs()
}

/// Mean per-pixel hue difference between two display-encoded images.
pub fn mean_delta_h(img: &RgbImage, reference: &RgbImage) -> Result<f64> {
    img.check_same_dimensions(reference)?;
    let mut sum = 0.0;
    for (a, b) in img.pixels().zip(reference.pixels()) {
        sum += delta_h_ciede2000(srgb_to_lab(a), srgb_to_lab(b));
    }
    Ok(sum / img.pixel_count() as f64)
}
