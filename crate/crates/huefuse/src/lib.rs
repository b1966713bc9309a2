//! Hue-corrected multi-exposure image fusion.
//!
//! Fuses differently exposed photographs of a static scene into one
//! display-ready image and removes the hue distortion that exposure fusion
//! inherits from nonlinear camera responses. A scene-referred reference is
//! merged from the same stack via response-curve self-calibration; each
//! fused pixel then has its maximally saturated color replaced by the
//! reference pixel's, on the constant-hue plane spanned by white, black and
//! that color.
//!
//! Module map:
//!
//! - [`color_hue`] — constant-hue-plane decomposition and hue transplant
//! - [`ssla`] — scene-segmentation-based luminance adjustment
//! - [`fusion`] — exposure fusion with pyramid blending
//! - [`hdr`] — response calibration, radiance merge, stack synthesis
//! - [`metrics`] — CIEDE2000 hue difference, TMQI
//! - [`imgio`] — PNG / Radiance RGBE / PFM codecs and EV sidecars
//! - [`pipeline`], [`eval`], [`scenes`] — orchestration, the evaluation
//!   harness and its bundled synthetic scenes

pub mod color_hue;
pub mod error;
pub mod eval;
pub(crate) mod filter;
pub mod fusion;
pub(crate) mod gmm;
pub mod hdr;
pub mod image;
pub mod imgio;
pub mod metrics;
pub mod pipeline;
pub mod pyramid;
pub mod scenes;
pub mod srgb;
pub mod ssla;
pub(crate) mod util;

pub use error::{Error, Result};
pub use image::{DynamicRange, RgbImage, RgbPixel, ScalarImage};
