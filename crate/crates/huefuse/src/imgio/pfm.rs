//! Portable float map (color `PF`) codec; the lossless float interchange
//! format used by the tests.
//!
//! Header: `PF`, width, height, scale (negative scale = little endian), then
//! raw 32-bit float triples in rows ordered bottom to top.

use crate::error::{Error, Result};
use crate::image::{DynamicRange, RgbImage};

use super::MAX_DIMENSION;

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format("truncated pfm header"));
    }
    std::str::from_utf8(&bytes[start..*pos]).map_err(|_| Error::format("non-ascii pfm header"))
}

/// Decode a color PFM from raw bytes.
pub fn decode(bytes: &[u8]) -> Result<RgbImage> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)?;
    match magic {
        "PF" => {}
        "Pf" => return Err(Error::format("grayscale pfm is not supported (color PF only)")),
        _ => return Err(Error::format("not a pfm file (missing PF magic)")),
    }
    let w: usize = next_token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::format("bad pfm width"))?;
    let h: usize = next_token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::format("bad pfm height"))?;
    let scale: f64 = next_token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::format("bad pfm scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format("pfm scale must be finite and non-zero"));
    }
    if w == 0 || h == 0 || w > MAX_DIMENSION || h > MAX_DIMENSION {
        return Err(Error::format(format!("pfm dimensions {w}x{h} out of range")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format("pfm header not terminated"));
    }
    pos += 1;

    let need = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(12))
        .ok_or_else(|| Error::format("pfm dimensions overflow"))?;
    if bytes.len() - pos < need {
        return Err(Error::format("truncated pfm raster"));
    }
    let little_endian = scale < 0.0;
    let gain = scale.abs();
    let raster = &bytes[pos..pos + need];

    let mut data = vec![0.0f64; w * h * 3];
    // Rows are stored bottom-to-top.
    for row in 0..h {
        let y = h - 1 - row;
        for i in 0..w * 3 {
            let o = (row * w * 3 + i) * 4;
            let quad = [raster[o], raster[o + 1], raster[o + 2], raster[o + 3]];
            let v = if little_endian {
                f32::from_le_bytes(quad)
            } else {
                f32::from_be_bytes(quad)
            } as f64
                * gain;
            if !v.is_finite() {
                return Err(Error::format(format!(
                    "pfm sample at row {y}, index {i} is not finite"
                )));
            }
            if v < 0.0 {
                return Err(Error::format(format!(
                    "pfm sample at row {y}, index {i} is negative"
                )));
            }
            data[(y * w * 3) + i] = v;
        }
    }
    Ok(RgbImage::from_raw(w, h, DynamicRange::Hdr, data))
}

/// Encode to little-endian PFM bytes (scale -1.0). Values pass through an
/// f32 cast, so f32-valued images round-trip bit-exactly.
pub fn encode(img: &RgbImage) -> Result<Vec<u8>> {
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 || w > MAX_DIMENSION || h > MAX_DIMENSION {
        return Err(Error::format(format!("pfm dimensions {w}x{h} out of range")));
    }
    let mut out = Vec::with_capacity(32 + w * h * 12);
    out.extend_from_slice(format!("PF\n{w} {h}\n-1.0\n").as_bytes());
    for row in 0..h {
        let y = h - 1 - row;
        for x in 0..w {
            let p = img.pixel(x, y);
            for v in [p.r, p.g, p.b] {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::RgbPixel;
    use crate::util::Pcg32;

    #[test]
    fn roundtrip_is_bit_exact_for_f32_values() {
        let mut rng = Pcg32::new(7);
        let img = RgbImage::from_fn(13, 9, DynamicRange::Hdr, |_, _| {
            RgbPixel::new(
                (rng.next_f64() * 100.0) as f32 as f64,
                (rng.next_f64() * 0.01) as f32 as f64,
                (rng.next_f64()) as f32 as f64,
            )
        });
        let bytes = encode(&img).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back.width(), 13);
        assert_eq!(back.height(), 9);
        for (a, b) in img.data().iter().zip(back.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn big_endian_and_scale_are_honored() {
        // 1x1 big-endian with scale 2.0: sample 0.5 decodes to 1.0.
        let mut bytes = b"PF\n1 1\n2.0\n".to_vec();
        for _ in 0..3 {
            bytes.extend_from_slice(&0.5f32.to_be_bytes());
        }
        let img = decode(&bytes).unwrap();
        assert_eq!(img.pixel(0, 0), RgbPixel::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(decode(b"").is_err());
        assert!(decode(b"P6\n1 1\n255\n").is_err());
        assert!(decode(b"Pf\n1 1\n-1.0\n\0\0\0\0").is_err());
        assert!(decode(b"PF\n1 1\n-1.0\n\0\0").is_err()); // truncated raster
        assert!(decode(b"PF\n0 4\n-1.0\n").is_err());
        assert!(decode(b"PF\n70000 1\n-1.0\n").is_err());
        // NaN sample.
        let mut bytes = b"PF\n1 1\n-1.0\n".to_vec();
        bytes.extend_from_slice(&f32::NAN.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        assert!(decode(&bytes).is_err());
        // Negative sample.
        let mut bytes = b"PF\n1 1\n-1.0\n".to_vec();
        bytes.extend_from_slice(&(-1.0f32).to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        assert!(decode(&bytes).is_err());
    }
}
