//! PNG ingestion and emission (8- and 16-bit RGB) behind the `png` crate.
//!
//! Decoded code values map to [0,1] by `v / (2^bits - 1)` and are flagged
//! display-referred; encoding clamps to [0,1] and quantizes round-half-up.

use std::io::Cursor;

use crate::error::{Error, Result};
use crate::image::{DynamicRange, RgbImage};

use super::MAX_DIMENSION;

/// Decode PNG bytes; returns the image and its source bit depth.
pub fn decode(bytes: &[u8]) -> Result<(RgbImage, u8)> {
    let mut limits = png::Limits::default();
    limits.bytes = 1 << 28;
    let decoder = png::Decoder::new_with_limits(Cursor::new(bytes), limits);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(format!("png: {e}")))?;
    let mut buf = vec![
        0u8;
        reader
            .output_buffer_size()
            .ok_or_else(|| Error::format("png: output size overflow"))?
    ];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(format!("png: {e}")))?;
    let (w, h) = (info.width as usize, info.height as usize);
    if w == 0 || h == 0 || w > MAX_DIMENSION || h > MAX_DIMENSION {
        return Err(Error::format(format!("png dimensions {w}x{h} out of range")));
    }
    let channels = match info.color_type {
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        other => {
            return Err(Error::format(format!(
                "unsupported png color type {other:?} (need RGB or RGBA)"
            )))
        }
    };
    let bits = match info.bit_depth {
        png::BitDepth::Eight => 8u8,
        png::BitDepth::Sixteen => 16u8,
        other => {
            return Err(Error::format(format!(
                "unsupported png bit depth {other:?} (need 8 or 16)"
            )))
        }
    };
    let bytes_per_sample = (bits / 8) as usize;
    let expected = w * h * channels * bytes_per_sample;
    if buf.len() < expected {
        return Err(Error::format("png: frame smaller than declared"));
    }
    let max = ((1u32 << bits) - 1) as f64;
    let mut data = Vec::with_capacity(w * h * 3);
    for px in 0..w * h {
        let base = px * channels * bytes_per_sample;
        for ch in 0..3 {
            let o = base + ch * bytes_per_sample;
            let code = if bits == 8 {
                buf[o] as u32
            } else {
                ((buf[o] as u32) << 8) | buf[o + 1] as u32
            };
            data.push(code as f64 / max);
        }
    }
    Ok((RgbImage::from_raw(w, h, DynamicRange::Ldr, data), bits))
}

/// Encode a display-referred image to RGB PNG bytes at the given depth.
pub fn encode(img: &RgbImage, bits: u8) -> Result<Vec<u8>> {
    assert!(bits == 8 || bits == 16);
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 || w > MAX_DIMENSION || h > MAX_DIMENSION {
        return Err(Error::format(format!("png dimensions {w}x{h} out of range")));
    }
    let max = ((1u32 << bits) - 1) as f64;
    let mut raw = Vec::with_capacity(w * h * 3 * (bits as usize / 8));
    for v in img.data() {
        let code = (v.clamp(0.0, 1.0) * max).round() as u32;
        if bits == 8 {
            raw.push(code as u8);
        } else {
            raw.push((code >> 8) as u8);
            raw.push((code & 0xff) as u8);
        }
    }
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, w as u32, h as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(if bits == 8 {
            png::BitDepth::Eight
        } else {
            png::BitDepth::Sixteen
        });
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::format(format!("png: {e}")))?;
        writer
            .write_image_data(&raw)
            .map_err(|e| Error::format(format!("png: {e}")))?;
    }
    Ok(out)
}
