//! In-memory raster types.
//!
//! All pixel data is stored as `f64`. Display-referred (LDR) images hold
//! values in [0,1]; scene-referred (HDR) images hold non-negative radiance
//! with no upper bound. The [`DynamicRange`] flag records which convention
//! a given image follows.

use crate::error::{Error, Result};

/// Whether pixel values are display-referred ([0,1]) or scene-referred
/// (linear radiance, unbounded above).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicRange {
    Ldr,
    Hdr,
}

/// A single linear-intensity RGB sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RgbPixel {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl RgbPixel {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Self { r, g, b }
    }

    pub fn min_channel(&self) -> f64 {
        self.r.min(self.g).min(self.b)
    }

    pub fn max_channel(&self) -> f64 {
        self.r.max(self.g).max(self.b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(f(self.r), f(self.g), f(self.b))
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.g.is_finite() && self.b.is_finite()
    }

    pub fn clamp01(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }
}

/// Row-major interleaved RGB raster.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    range: DynamicRange,
    data: Vec<f64>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, range: DynamicRange) -> Self {
        Self {
            width,
            height,
            range,
            data: vec![0.0; width * height * 3],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        range: DynamicRange,
        mut f: impl FnMut(usize, usize) -> RgbPixel,
    ) -> Self {
        let mut img = Self::new(width, height, range);
        for y in 0..height {
            for x in 0..width {
                img.set_pixel(x, y, f(x, y));
            }
        }
        img
    }

    /// Wrap interleaved row-major RGB data.
    pub fn from_raw(width: usize, height: usize, range: DynamicRange, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height * 3);
        Self {
            width,
            height,
            range,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn range(&self) -> DynamicRange {
        self.range
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> RgbPixel {
        let i = (y * self.width + x) * 3;
        RgbPixel::new(self.data[i], self.data[i + 1], self.data[i + 2])
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, p: RgbPixel) {
        let i = (y * self.width + x) * 3;
        self.data[i] = p.r;
        self.data[i + 1] = p.g;
        self.data[i + 2] = p.b;
    }

    pub fn pixels(&self) -> impl Iterator<Item = RgbPixel> + '_ {
        self.data
            .chunks_exact(3)
            .map(|c| RgbPixel::new(c[0], c[1], c[2]))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Same geometry, every pixel transformed.
    pub fn map_pixels(&self, range: DynamicRange, f: impl Fn(RgbPixel) -> RgbPixel) -> Self {
        let mut out = Self::new(self.width, self.height, range);
        for (o, c) in out.data.chunks_exact_mut(3).zip(self.data.chunks_exact(3)) {
            let p = f(RgbPixel::new(c[0], c[1], c[2]));
            o[0] = p.r;
            o[1] = p.g;
            o[2] = p.b;
        }
        out
    }

    pub fn same_dimensions(&self, other: &RgbImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_same_dimensions(&self, other: &RgbImage) -> Result<()> {
        if self.same_dimensions(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ))
        }
    }

    /// Largest absolute per-channel difference. Images must share dimensions.
    pub fn max_abs_diff(&self, other: &RgbImage) -> f64 {
        assert!(self.same_dimensions(other));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Row-major single-channel raster (luminance maps, weight maps, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ScalarImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut img = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.set(x, y, f(x, y));
            }
        }
        img
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn same_dimensions(&self, other: &ScalarImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn max_abs_diff(&self, other: &ScalarImage) -> f64 {
        assert!(self.same_dimensions(other));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
