//! Radiance RGBE (.hdr) codec.
//!
//! Shared-exponent pixels: byte value `m` with exponent byte `e` decodes to
//! `m/256 * 2^(e-128)`; an exponent of zero is black. Scanlines may be flat,
//! old-style run-length (1,1,1,count markers) or new-style component RLE.

use crate::error::{Error, Result};
use crate::image::{DynamicRange, RgbImage, RgbPixel};

use super::MAX_DIMENSION;

#[inline]
fn decode_pixel(r: u8, g: u8, b: u8, e: u8) -> RgbPixel {
    if e == 0 {
        return RgbPixel::new(0.0, 0.0, 0.0);
    }
    // m/256 * 2^(e-128)
    let scale = ((e as i32 - 136) as f64).exp2();
    RgbPixel::new(r as f64 * scale, g as f64 * scale, b as f64 * scale)
}

#[inline]
fn encode_pixel(p: RgbPixel) -> [u8; 4] {
    let v = p.max_channel();
    if v < 1e-38 {
        return [0, 0, 0, 0];
    }
    // Exponent such that v * 2^-e lands in [0.5, 1).
    let e = v.log2().floor() as i32 + 1;
    let scale = 256.0 * (-e as f64).exp2();
    [
        ((p.r * scale) as u32).min(255) as u8,
        ((p.g * scale) as u32).min(255) as u8,
        ((p.b * scale) as u32).min(255) as u8,
        (e + 128).clamp(0, 255) as u8,
    ]
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return Err(Error::format("truncated radiance header"));
        }
        let line = &self.bytes[start..self.pos];
        self.pos += 1;
        std::str::from_utf8(line).map_err(|_| Error::format("non-utf8 radiance header"))
    }

    fn byte(&mut self) -> Result<u8> {
        let b = *self
            .bytes
            .get(self.pos)
            .ok_or_else(|| Error::format("truncated radiance pixel data"))?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::format("truncated radiance pixel data"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

/// Decode a Radiance image from raw bytes.
pub fn decode(bytes: &[u8]) -> Result<RgbImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.line()?;
    if !magic.starts_with("#?") {
        return Err(Error::format("not a radiance file (missing #? magic)"));
    }
    let mut format_ok = false;
    loop {
        let line = cur.line()?;
        if line.is_empty() || line.chars().all(|c| c == '\r') {
            break;
        }
        if let Some(fmt) = line.strip_prefix("FORMAT=") {
            if fmt.trim() != "32-bit_rle_rgbe" {
                return Err(Error::format(format!("unsupported radiance format {fmt}")));
            }
            format_ok = true;
        }
        // EXPOSURE, comments and other header lines are ignored.
    }
    if !format_ok {
        return Err(Error::format("radiance header missing FORMAT line"));
    }
    let resolution = cur.line()?;
    let tokens: Vec<&str> = resolution.split_whitespace().collect();
    let (h, w) = match tokens.as_slice() {
        ["-Y", h, "+X", w] => (
            h.parse::<usize>()
                .map_err(|_| Error::format("bad radiance height"))?,
            w.parse::<usize>()
                .map_err(|_| Error::format("bad radiance width"))?,
        ),
        _ => {
            return Err(Error::format(
                "unsupported radiance orientation (expected -Y h +X w)",
            ))
        }
    };
    if w == 0 || h == 0 || w > MAX_DIMENSION || h > MAX_DIMENSION {
        return Err(Error::format(format!("radiance dimensions {w}x{h} out of range")));
    }

    let mut data: Vec<f64> = Vec::new();
    let mut scanline = vec![0u8; 4 * w];
    for _ in 0..h {
        read_scanline(&mut cur, w, &mut scanline)?;
        for px in scanline.chunks_exact(4) {
            let p = decode_pixel(px[0], px[1], px[2], px[3]);
            data.push(p.r);
            data.push(p.g);
            data.push(p.b);
        }
    }
    Ok(RgbImage::from_raw(w, h, DynamicRange::Hdr, data))
}

/// Fill one scanline of RGBE quads (interleaved r,g,b,e per pixel).
fn read_scanline(cur: &mut Cursor, width: usize, out: &mut [u8]) -> Result<()> {
    let first = cur.take(4)?;
    let (r, g, b, e) = (first[0], first[1], first[2], first[3]);
    let new_rle = r == 2 && g == 2 && (b & 0x80) == 0 && ((b as usize) << 8 | e as usize) == width;
    if new_rle && (8..=0x7fff).contains(&width) {
        // Component-planar RLE.
        for comp in 0..4 {
            let mut filled = 0usize;
            while filled < width {
                let count = cur.byte()? as usize;
                if count > 128 {
                    let run = count - 128;
                    if filled + run > width {
                        return Err(Error::format("radiance RLE run overflows scanline"));
                    }
                    let value = cur.byte()?;
                    for i in 0..run {
                        out[(filled + i) * 4 + comp] = value;
                    }
                    filled += run;
                } else {
                    if count == 0 {
                        return Err(Error::format("radiance RLE zero-length literal"));
                    }
                    if filled + count > width {
                        return Err(Error::format("radiance RLE literal overflows scanline"));
                    }
                    let lit = cur.take(count)?;
                    for (i, &v) in lit.iter().enumerate() {
                        out[(filled + i) * 4 + comp] = v;
                    }
                    filled += count;
                }
            }
        }
        return Ok(());
    }

    // Flat quads, possibly with old-style repeat markers.
    let mut filled = 0usize;
    let mut quad = [r, g, b, e];
    let mut shift = 0u32;
    loop {
        if quad[0] == 1 && quad[1] == 1 && quad[2] == 1 {
            // Old-style run marker: repeat the previous pixel.
            if filled == 0 {
                return Err(Error::format("radiance repeat marker without prior pixel"));
            }
            if shift > 24 {
                return Err(Error::format("radiance repeat shift overflow"));
            }
            let run = (quad[3] as usize) << shift;
            shift += 8;
            if filled + run > width {
                return Err(Error::format("radiance repeat overflows scanline"));
            }
            let prev = [
                out[(filled - 1) * 4],
                out[(filled - 1) * 4 + 1],
                out[(filled - 1) * 4 + 2],
                out[(filled - 1) * 4 + 3],
            ];
            for i in 0..run {
                out[(filled + i) * 4..(filled + i) * 4 + 4].copy_from_slice(&prev);
            }
            filled += run;
        } else {
            shift = 0;
            out[filled * 4..filled * 4 + 4].copy_from_slice(&quad);
            filled += 1;
        }
        if filled >= width {
            return Ok(());
        }
        let next = cur.take(4)?;
        quad = [next[0], next[1], next[2], next[3]];
    }
}

/// Encode to Radiance bytes with component RLE scanlines where the width
/// allows it.
pub fn encode(img: &RgbImage) -> Result<Vec<u8>> {
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 || w > MAX_DIMENSION || h > MAX_DIMENSION {
        return Err(Error::format(format!("radiance dimensions {w}x{h} out of range")));
    }
    let mut out = Vec::with_capacity(64 + w * h * 4);
    out.extend_from_slice(b"#?RADIANCE\n");
    out.extend_from_slice(b"FORMAT=32-bit_rle_rgbe\n\n");
    out.extend_from_slice(format!("-Y {h} +X {w}\n").as_bytes());

    let rle = (8..=0x7fff).contains(&w);
    let mut quads = vec![0u8; 4 * w];
    for y in 0..h {
        for x in 0..w {
            let q = encode_pixel(img.pixel(x, y));
            quads[x * 4..x * 4 + 4].copy_from_slice(&q);
        }
        if rle {
            out.extend_from_slice(&[2, 2, (w >> 8) as u8, (w & 0xff) as u8]);
            for comp in 0..4 {
                write_rle_component(&mut out, &quads, comp, w);
            }
        } else {
            out.extend_from_slice(&quads);
        }
    }
    Ok(out)
}

fn write_rle_component(out: &mut Vec<u8>, quads: &[u8], comp: usize, width: usize) {
    const MIN_RUN: usize = 4;
    let value = |i: usize| quads[i * 4 + comp];
    let mut i = 0usize;
    while i < width {
        // Find the next run of at least MIN_RUN equal bytes.
        let mut run_start = i;
        let mut run_len = 0usize;
        while run_start < width {
            run_len = 1;
            while run_start + run_len < width
                && run_len < 127
                && value(run_start + run_len) == value(run_start)
            {
                run_len += 1;
            }
            if run_len >= MIN_RUN {
                break;
            }
            run_start += run_len;
        }
        if run_start >= width {
            run_len = 0;
        }
        // Literals up to the run.
        let mut lit = i;
        while lit < run_start.min(width) {
            let chunk = (run_start.min(width) - lit).min(128);
            out.push(chunk as u8);
            for k in 0..chunk {
                out.push(value(lit + k));
            }
            lit += chunk;
        }
        if run_len >= MIN_RUN {
            out.push((128 + run_len) as u8);
            out.push(value(run_start));
            i = run_start + run_len;
        } else {
            i = run_start.max(lit);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_formula_samples() {
        // Crafted against the closed-form decode v = m/256 * 2^(e-128).
        let p = decode_pixel(128, 128, 128, 129);
        assert_eq!(p, RgbPixel::new(1.0, 1.0, 1.0));
        let p = decode_pixel(255, 0, 64, 128);
        assert!((p.r - 255.0 / 256.0).abs() < 1e-12);
        assert_eq!(p.g, 0.0);
        assert!((p.b - 0.25).abs() < 1e-12);
        // Exponent zero is black regardless of mantissas.
        assert_eq!(decode_pixel(200, 10, 3, 0), RgbPixel::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn roundtrip_within_mantissa_precision() {
        let img = RgbImage::from_fn(32, 8, DynamicRange::Hdr, |x, y| {
            let v = 0.001 * (1.5f64).powi(x as i32) + y as f64 * 0.37;
            RgbPixel::new(v, v * 0.5 + 0.01, v * 2.0 + 0.002)
        });
        let bytes = encode(&img).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back.width(), 32);
        assert_eq!(back.height(), 8);
        for (a, b) in img.pixels().zip(back.pixels()) {
            let m = a.max_channel();
            assert!((a.r - b.r).abs() <= m / 128.0 + 1e-12);
            assert!((a.g - b.g).abs() <= m / 128.0 + 1e-12);
            assert!((a.b - b.b).abs() <= m / 128.0 + 1e-12);
        }
    }

    #[test]
    fn flat_scanlines_roundtrip() {
        // Width below 8 forces flat quads through the writer.
        let img = RgbImage::from_fn(4, 4, DynamicRange::Hdr, |x, y| {
            RgbPixel::new(x as f64 + 0.5, y as f64 + 0.25, 1.0)
        });
        let bytes = encode(&img).unwrap();
        let back = decode(&bytes).unwrap();
        for (a, b) in img.pixels().zip(back.pixels()) {
            assert!((a.r - b.r).abs() <= a.max_channel() / 128.0);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"").is_err());
        assert!(decode(b"not radiance at all\n").is_err());
        assert!(decode(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 2 +X 2\n\x01\x02").is_err());
        assert!(decode(b"#?RADIANCE\nFORMAT=64-bit_xyze\n\n-Y 1 +X 1\n").is_err());
        assert!(decode(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n+Y 1 +X 1\n").is_err());
    }

    #[test]
    fn old_style_repeat_marker() {
        // One explicit pixel then a repeat-3 marker fills a 4-wide line.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 4\n");
        bytes.extend_from_slice(&[128, 64, 32, 129]); // pixel
        bytes.extend_from_slice(&[1, 1, 1, 3]); // repeat x3
        let img = decode(&bytes).unwrap();
        let first = img.pixel(0, 0);
        for x in 1..4 {
            assert_eq!(img.pixel(x, 0), first);
        }
    }
}
