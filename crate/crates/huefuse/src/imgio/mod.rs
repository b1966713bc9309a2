//! Image and sidecar file I/O.
//!
//! PNG holds display-referred (sRGB-encoded) data; Radiance `.hdr` and PFM
//! hold scene-referred linear floats. Readers dispatch on magic bytes and
//! never produce NaN or infinite samples. Writing scene-referred data to PNG
//! is refused rather than silently clamped; render it first.

mod pfm;
mod png_codec;
mod rgbe;

pub use pfm::{decode as decode_pfm, encode as encode_pfm};
pub use png_codec::{decode as decode_png, encode as encode_png};
pub use rgbe::{decode as decode_rgbe, encode as encode_rgbe};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{DynamicRange, RgbImage};

/// Hard cap on each image side.
pub const MAX_DIMENSION: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Png8,
    Png16,
    Rgbe,
    Pfm,
}

impl ImageFormat {
    /// Format implied by a file extension, 16-bit for PNG.
    pub fn for_path(path: &Path) -> Option<ImageFormat> {
        match path
            .extension()?
            .to_str()?
            .to_ascii_lowercase()
            .as_str()
        {
            "png" => Some(ImageFormat::Png16),
            "hdr" | "pic" => Some(ImageFormat::Rgbe),
            "pfm" => Some(ImageFormat::Pfm),
            _ => None,
        }
    }
}

/// Decoded-file metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageInfo {
    pub format: ImageFormat,
    pub width: usize,
    pub height: usize,
}

/// Decode an image from raw bytes, dispatching on magic bytes.
pub fn read_image_bytes(bytes: &[u8]) -> Result<(RgbImage, ImageInfo)> {
    if bytes.starts_with(&[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a]) {
        let (img, bits) = png_codec::decode(bytes)?;
        let format = if bits == 8 {
            ImageFormat::Png8
        } else {
            ImageFormat::Png16
        };
        let info = ImageInfo {
            format,
            width: img.width(),
            height: img.height(),
        };
        return Ok((img, info));
    }
    if bytes.starts_with(b"#?") {
        let img = rgbe::decode(bytes)?;
        let info = ImageInfo {
            format: ImageFormat::Rgbe,
            width: img.width(),
            height: img.height(),
        };
        return Ok((img, info));
    }
    if bytes.starts_with(b"PF") || bytes.starts_with(b"Pf") {
        let img = pfm::decode(bytes)?;
        let info = ImageInfo {
            format: ImageFormat::Pfm,
            width: img.width(),
            height: img.height(),
        };
        return Ok((img, info));
    }
    Err(Error::format("unrecognized image format"))
}

/// Read and decode an image file.
pub fn read_image(path: &Path) -> Result<(RgbImage, ImageInfo)> {
    let bytes = fs::read(path).map_err(|source| Error::IoPath {
        path: path.to_path_buf(),
        source,
    })?;
    read_image_bytes(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Encode an image to bytes in the requested format.
pub fn encode_image(image: &RgbImage, format: ImageFormat) -> Result<Vec<u8>> {
    match format {
        ImageFormat::Png8 | ImageFormat::Png16 => {
            if image.range() == DynamicRange::Hdr {
                return Err(Error::invalid(
                    "HDR to LDR format requires rendering (tone-map before writing PNG)",
                ));
            }
            let bits = if format == ImageFormat::Png8 { 8 } else { 16 };
            png_codec::encode(image, bits)
        }
        ImageFormat::Rgbe => rgbe::encode(image),
        ImageFormat::Pfm => pfm::encode(image),
    }
}

/// Encode and write an image file.
pub fn write_image(image: &RgbImage, path: &Path, format: ImageFormat) -> Result<()> {
    let bytes = encode_image(image, format)?;
    fs::write(path, bytes).map_err(|source| Error::IoPath {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse an EV sidecar: one float per line; blank lines and `#` comments are
/// skipped.
pub fn parse_ev_sidecar(text: &str) -> Result<Vec<f64>> {
    let mut evs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let ev: f64 = trimmed.parse().map_err(|_| {
            Error::format(format!(
                "ev sidecar line {}: not a number: {trimmed:?}",
                lineno + 1
            ))
        })?;
        if !ev.is_finite() {
            return Err(Error::format(format!(
                "ev sidecar line {}: value must be finite",
                lineno + 1
            )));
        }
        evs.push(ev);
    }
    if evs.is_empty() {
        return Err(Error::format("ev sidecar contains no values"));
    }
    Ok(evs)
}

/// Read an EV sidecar file.
pub fn read_ev_sidecar(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|source| Error::IoPath {
        path: path.to_path_buf(),
        source,
    })?;
    parse_ev_sidecar(&text)
}

/// Write an EV sidecar file, one value per line.
pub fn write_ev_sidecar(path: &Path, evs: &[f64]) -> Result<()> {
    let mut text = String::new();
    for ev in evs {
        text.push_str(&format!("{ev}\n"));
    }
    fs::write(path, text).map_err(|source| Error::IoPath {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::RgbPixel;
    use std::io::Write;

    #[test]
    fn dispatch_by_magic() {
        let ldr = RgbImage::from_fn(3, 2, DynamicRange::Ldr, |x, y| {
            RgbPixel::new(x as f64 / 3.0, y as f64 / 2.0, 0.5)
        });
        let hdr = ldr.map_pixels(DynamicRange::Hdr, |p| p.map(|v| 2.0 * v));

        let png = encode_image(&ldr, ImageFormat::Png16).unwrap();
        let (img, info) = read_image_bytes(&png).unwrap();
        assert_eq!(info.format, ImageFormat::Png16);
        assert_eq!(img.range(), DynamicRange::Ldr);

        let pf = encode_image(&hdr, ImageFormat::Pfm).unwrap();
        let (img, info) = read_image_bytes(&pf).unwrap();
        assert_eq!(info.format, ImageFormat::Pfm);
        assert_eq!(img.range(), DynamicRange::Hdr);

        let hd = encode_image(&hdr, ImageFormat::Rgbe).unwrap();
        let (_, info) = read_image_bytes(&hd).unwrap();
        assert_eq!(info.format, ImageFormat::Rgbe);

        assert!(read_image_bytes(b"GIF89a....").is_err());
    }

    #[test]
    fn hdr_to_png_is_refused() {
        let hdr = RgbImage::new(2, 2, DynamicRange::Hdr);
        match encode_image(&hdr, ImageFormat::Png16) {
            Err(Error::InvalidInput(msg)) => assert!(msg.contains("rendering")),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = RgbImage::from_fn(5, 4, DynamicRange::Ldr, |x, y| {
            RgbPixel::new(
                (x * 13 % 7) as f64 / 7.0,
                (y * 11 % 5) as f64 / 5.0,
                0.25,
            )
        });
        write_image(&img, &path, ImageFormat::Png16).unwrap();
        let (back, info) = read_image(&path).unwrap();
        assert_eq!((info.width, info.height), (5, 4));
        assert!(img.max_abs_diff(&back) <= 0.5 / 65535.0 + 1e-12);
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_image(Path::new("/nonexistent/image.png")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/image.png"));
    }

    #[test]
    fn truncated_png_file_fails() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.png");
        let img = RgbImage::new(8, 8, DynamicRange::Ldr);
        let bytes = encode_image(&img, ImageFormat::Png8).unwrap();
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(&bytes[..bytes.len() / 2]).unwrap();
        drop(f);
        assert!(read_image(&path).is_err());
    }

    #[test]
    fn ev_sidecar_parsing() {
        let evs = parse_ev_sidecar("-4\n-2\n0\n# comment\n\n2\n4\n").unwrap();
        assert_eq!(evs, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        assert!(parse_ev_sidecar("1\nnot-a-number\n").is_err());
        assert!(parse_ev_sidecar("\n# only comments\n").is_err());
        assert!(parse_ev_sidecar("inf\n").is_err());
    }

    #[test]
    fn ev_sidecar_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stack.evs");
        write_ev_sidecar(&path, &[-2.0, 0.0, 2.0]).unwrap();
        assert_eq!(read_ev_sidecar(&path).unwrap(), vec![-2.0, 0.0, 2.0]);
    }

    /// Decoders must reject, not panic on, every truncation and single-byte
    /// corruption of valid files.
    #[test]
    fn decoders_survive_mutations() {
        let ldr = RgbImage::from_fn(9, 5, DynamicRange::Ldr, |x, y| {
            RgbPixel::new(x as f64 / 9.0, y as f64 / 5.0, 0.4)
        });
        let hdr = ldr.map_pixels(DynamicRange::Hdr, |p| p.map(|v| 3.0 * v + 0.01));
        let wide = RgbImage::from_fn(24, 3, DynamicRange::Hdr, |x, _| {
            RgbPixel::new(0.5, x as f64, 1.0)
        });
        let samples = [
            encode_image(&ldr, ImageFormat::Png8).unwrap(),
            encode_image(&ldr, ImageFormat::Png16).unwrap(),
            encode_image(&hdr, ImageFormat::Rgbe).unwrap(),
            encode_image(&wide, ImageFormat::Rgbe).unwrap(),
            encode_image(&hdr, ImageFormat::Pfm).unwrap(),
        ];
        let mut rng = crate::util::Pcg32::new(42);
        for bytes in &samples {
            for len in 0..bytes.len() {
                let _ = read_image_bytes(&bytes[..len]);
            }
            for _ in 0..400 {
                let mut mutated = bytes.clone();
                let i = rng.next_below(mutated.len());
                mutated[i] ^= 1 << rng.next_below(8);
                let _ = read_image_bytes(&mutated);
            }
        }
    }

    #[test]
    fn format_for_path() {
        assert_eq!(
            ImageFormat::for_path(Path::new("a/b.PNG")),
            Some(ImageFormat::Png16)
        );
        assert_eq!(
            ImageFormat::for_path(Path::new("scene.hdr")),
            Some(ImageFormat::Rgbe)
        );
        assert_eq!(
            ImageFormat::for_path(Path::new("scene.pfm")),
            Some(ImageFormat::Pfm)
        );
        assert_eq!(ImageFormat::for_path(Path::new("scene.exr")), None);
    }
}
