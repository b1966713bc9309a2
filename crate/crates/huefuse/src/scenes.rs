//! Bundled synthetic radiance scenes for the evaluation harness.
//!
//! Six procedural scene-referred images with chromatic content, several
//! stops of luminance range, and both smooth and textured regions. Pure
//! functions of the pixel grid; regenerating a scene is deterministic.

use crate::image::{DynamicRange, RgbImage, RgbPixel};

pub const BUILTIN_NAMES: [&str; 6] = ["bars", "canyon", "sphere", "patches", "sunset", "wheel"];

/// Saturated color from a hue angle in [0,1) at full value.
fn hue_rgb(t: f64) -> (f64, f64, f64) {
    let h = (t.rem_euclid(1.0)) * 6.0;
    let f = h.fract();
    match h as usize {
        0 => (1.0, f, 0.0),
        1 => (1.0 - f, 1.0, 0.0),
        2 => (0.0, 1.0, f),
        3 => (0.0, 1.0 - f, 1.0),
        4 => (f, 0.0, 1.0),
        _ => (1.0, 0.0, 1.0 - f),
    }
}

fn mix(base: f64, c: f64, sat: f64) -> f64 {
    base * (1.0 - sat + sat * c)
}

/// Generate a builtin scene by name.
pub fn builtin(name: &str, width: usize, height: usize) -> Option<RgbImage> {
    let f: fn(f64, f64) -> RgbPixel = match name {
        "bars" => bars,
        "canyon" => canyon,
        "sphere" => sphere,
        "patches" => patches,
        "sunset" => sunset,
        "wheel" => wheel,
        _ => return None,
    };
    Some(RgbImage::from_fn(width, height, DynamicRange::Hdr, |x, y| {
        let u = (x as f64 + 0.5) / width as f64;
        let v = (y as f64 + 0.5) / height as f64;
        f(u, v)
    }))
}

/// Hue bars over an exponential luminance ramp with a mild ripple.
fn bars(u: f64, v: f64) -> RgbPixel {
    let (r, g, b) = hue_rgb((u * 7.0).floor() / 7.0 + 0.04);
    let lum = 0.015 * (800.0f64).powf(1.0 - v);
    let ripple = 1.0 + 0.18 * (45.0 * u).sin() * (38.0 * v).cos();
    let sat = 0.85;
    RgbPixel::new(
        mix(lum * ripple, r, sat),
        mix(lum * ripple, g, sat),
        mix(lum * ripple, b, sat),
    )
}

/// Canyon: a bright sky band down the middle with gradual nine-stop
/// falloff into warm and cool rock walls on either side.
fn canyon(u: f64, v: f64) -> RgbPixel {
    let ramp = (1.0 - 2.2 * (u - 0.55).abs()).clamp(0.0, 1.0);
    let texture = 1.0
        + 0.12 * (46.0 * u).sin() * (38.0 * v).cos()
        + 0.08 * (90.0 * u * v).sin();
    let lum = (0.015 * (9.0 * ramp).exp2() * texture).max(0.003);
    // Warm left wall, cool right wall, pale sky in the middle.
    let (wr, wg, wb) = if u < 0.55 {
        (1.0, 0.5 + 0.2 * v, 0.25)
    } else {
        (0.35, 0.55 + 0.2 * v, 1.0)
    };
    let (sr, sg, sb) = (1.0, 0.9, 0.7);
    let (r, g, b) = (
        wr * (1.0 - ramp) + sr * ramp,
        wg * (1.0 - ramp) + sg * ramp,
        wb * (1.0 - ramp) + sb * ramp,
    );
    RgbPixel::new(mix(lum, r, 0.8), mix(lum, g, 0.8), mix(lum, b, 0.8))
}

/// Bright core with hue varying around the disk, dark rim.
fn sphere(u: f64, v: f64) -> RgbPixel {
    let (dx, dy) = (u - 0.5, v - 0.5);
    let r2 = dx * dx + dy * dy;
    let angle = dy.atan2(dx) / std::f64::consts::TAU + 0.5;
    let lum = 0.01 + 25.0 * (-14.0 * r2).exp() + 0.2 * (-2.0 * r2).exp();
    let texture = 1.0 + 0.12 * (80.0 * r2).sin();
    let (cr, cg, cb) = hue_rgb(angle);
    let sat = 0.75;
    RgbPixel::new(
        mix(lum * texture, cr, sat),
        mix(lum * texture, cg, sat),
        mix(lum * texture, cb, sat),
    )
}

/// Color-checker grid under a smooth vertical illumination ramp of about
/// eleven stops, brightest at the bottom.
fn patches(u: f64, v: f64) -> RgbPixel {
    let (i, j) = ((u * 6.0).floor(), (v * 4.0).floor());
    let idx = (i + 6.0 * j) as i64;
    let (cr, cg, cb) = hue_rgb(idx as f64 * 0.618034);
    let sat = 0.6 + 0.4 * ((idx * 7) % 5) as f64 / 4.0;
    let lum = 0.01 * (11.0 * v).exp2();
    let ripple = 1.0 + 0.18 * (90.0 * u).sin() * (70.0 * v).sin();
    RgbPixel::new(
        mix(lum * ripple, cr, sat),
        mix(lum * ripple, cg, sat),
        mix(lum * ripple, cb, sat),
    )
}

/// Sky gradient with a hot sun disk and a dark textured foreground.
fn sunset(u: f64, v: f64) -> RgbPixel {
    if v < 0.62 {
        let t = v / 0.62;
        let sky_lum = 1.2 + 6.0 * (1.0 - t);
        let (dx, dy) = (u - 0.7, v - 0.25);
        let sun = 60.0 * (-(dx * dx + dy * dy) * 220.0).exp();
        let r = sky_lum * (0.9 + 0.1 * t) + sun;
        let g = sky_lum * (0.45 + 0.3 * t) + sun * 0.85;
        let b = sky_lum * (0.25 + 0.55 * t) + sun * 0.6;
        RgbPixel::new(r, g, b)
    } else {
        let lum = 0.015 + 0.03 * (v - 0.62) + 0.01 * (55.0 * u).sin() * (40.0 * v).cos();
        let field = ((u * 9.0).floor() as i64) % 2 == 0;
        let (r, g, b) = if field {
            (0.35, 0.8, 0.3)
        } else {
            (0.7, 0.5, 0.25)
        };
        RgbPixel::new(
            mix(lum.max(0.002), r, 0.85),
            mix(lum.max(0.002), g, 0.85),
            mix(lum.max(0.002), b, 0.85),
        )
    }
}

/// Full hue wheel; radius sweeps the exposure range.
fn wheel(u: f64, v: f64) -> RgbPixel {
    let (dx, dy) = (u - 0.5, v - 0.5);
    let radius = (dx * dx + dy * dy).sqrt() * 2.0;
    let angle = dy.atan2(dx) / std::f64::consts::TAU + 0.5;
    let (cr, cg, cb) = hue_rgb(angle);
    let lum = 0.02 * (600.0f64).powf((1.0 - radius).clamp(0.0, 1.0));
    let ring = 1.0 + 0.15 * (28.0 * radius).sin();
    let sat = 0.9 - 0.25 * radius.clamp(0.0, 1.0);
    RgbPixel::new(
        mix(lum * ring, cr, sat),
        mix(lum * ring, cg, sat),
        mix(lum * ring, cb, sat),
    )
}
