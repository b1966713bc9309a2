//! Full-pipeline orchestration: adjusted exposures, fusion, HDR reference,
//! hue correction, and the run manifest.
//!
//! The stage sequence on a display-encoded input stack:
//!
//! 1. decode to linear light and run the luminance adjustment, then
//!    re-encode the adjusted images for fusion,
//! 2. fuse the adjusted images,
//! 3. calibrate the inverse response on the original stack and merge it
//!    into the scene-referred reference,
//! 4. transplant the reference hues into the fused image.

use std::fmt::Write as _;
use std::path::Path;

use crate::color_hue;
use crate::error::{Error, Result};
use crate::fusion::{self, FusionParams, FusionStats};
use crate::gmm;
use crate::hdr::{self, CrfOptions, ExposureStack, ResponseCurve};
use crate::image::RgbImage;
use crate::imgio::{self, ImageFormat};
use crate::srgb;
use crate::ssla;

/// Every knob that affects pipeline output.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Segment count for the luminance adjustment; `None` means one segment
    /// per input exposure.
    pub segments: Option<usize>,
    /// Seed for the calibration position sampler.
    pub seed: u64,
    /// Pyramid depth override for fusion.
    pub pyramid_depth: Option<usize>,
    pub exponent_contrast: f64,
    pub exponent_saturation: f64,
    pub exponent_exposedness: f64,
    pub exposedness_sigma: f64,
    pub crf_degree: usize,
    pub crf_samples: usize,
    /// Forward-response gamma used by stack synthesis.
    pub synth_gamma: f64,
    /// Metric toggles for the evaluation harness.
    pub metric_delta_h: bool,
    pub metric_tmqi: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            segments: None,
            seed: 0,
            pyramid_depth: None,
            exponent_contrast: 1.0,
            exponent_saturation: 1.0,
            exponent_exposedness: 1.0,
            exposedness_sigma: 0.2,
            crf_degree: 5,
            crf_samples: 2000,
            synth_gamma: 2.2,
            metric_delta_h: true,
            metric_tmqi: true,
        }
    }
}

impl PipelineConfig {
    pub fn fusion_params(&self) -> FusionParams {
        FusionParams {
            exponent_contrast: self.exponent_contrast,
            exponent_saturation: self.exponent_saturation,
            exponent_exposedness: self.exponent_exposedness,
            sigma: self.exposedness_sigma,
            weight_floor: 1e-12,
            depth: self.pyramid_depth,
        }
    }

    pub fn crf_options(&self) -> CrfOptions {
        CrfOptions {
            degree: self.crf_degree,
            samples: self.crf_samples,
            seed: self.seed,
            ..CrfOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.segments {
            if m < 1 {
                return Err(Error::invalid("segments must be at least 1"));
            }
        }
        if let Some(d) = self.pyramid_depth {
            if d < 1 {
                return Err(Error::invalid("pyramid depth must be at least 1"));
            }
        }
        if self.exposedness_sigma <= 0.0 {
            return Err(Error::invalid("exposedness sigma must be positive"));
        }
        if self.crf_degree < 1 || self.crf_degree > 12 {
            return Err(Error::invalid("crf degree must be in 1..=12"));
        }
        if self.crf_samples < self.crf_degree + 1 {
            return Err(Error::invalid("crf sample count too small for the degree"));
        }
        if self.synth_gamma <= 0.0 {
            return Err(Error::invalid("synthesis gamma must be positive"));
        }
        for e in [
            self.exponent_contrast,
            self.exponent_saturation,
            self.exponent_exposedness,
        ] {
            if !(0.0..=16.0).contains(&e) {
                return Err(Error::invalid("fusion exponents must be in 0..=16"));
            }
        }
        Ok(())
    }

    /// Apply `key = value` lines; `#` starts a comment. Unknown keys are
    /// rejected.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::invalid(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                Error::invalid(format!("config line {}: bad {what}: {value:?}", lineno + 1))
            };
            match key {
                "segments" => {
                    self.segments = Some(value.parse().map_err(|_| bad("segment count"))?)
                }
                "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
                "pyramid_depth" => {
                    self.pyramid_depth = Some(value.parse().map_err(|_| bad("depth"))?)
                }
                "omega_contrast" => {
                    self.exponent_contrast = value.parse().map_err(|_| bad("exponent"))?
                }
                "omega_saturation" => {
                    self.exponent_saturation = value.parse().map_err(|_| bad("exponent"))?
                }
                "omega_exposedness" => {
                    self.exponent_exposedness = value.parse().map_err(|_| bad("exponent"))?
                }
                "sigma" => self.exposedness_sigma = value.parse().map_err(|_| bad("sigma"))?,
                "crf_degree" => self.crf_degree = value.parse().map_err(|_| bad("degree"))?,
                "crf_samples" => self.crf_samples = value.parse().map_err(|_| bad("samples"))?,
                "gamma" => self.synth_gamma = value.parse().map_err(|_| bad("gamma"))?,
                "metric_delta_h" => {
                    self.metric_delta_h = value.parse().map_err(|_| bad("bool"))?
                }
                "metric_tmqi" => self.metric_tmqi = value.parse().map_err(|_| bad("bool"))?,
                other => {
                    return Err(Error::invalid(format!(
                        "config line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        self.validate()
    }
}

/// Artifacts of one full pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Fused image before hue correction.
    pub fused: RgbImage,
    /// Scene-referred reference merged from the stack.
    pub reference: RgbImage,
    /// Hue-corrected fused image.
    pub corrected: RgbImage,
    pub curve: ResponseCurve,
    pub fusion_stats: FusionStats,
    /// Number of segments actually used.
    pub segments_used: usize,
    pub manifest: String,
}

/// The adjusted-exposure + fusion front half, shared by the pipeline and the
/// evaluation harness. Input images are display-encoded; the luminance
/// adjustment itself runs in linear light.
pub fn adjusted_fusion(
    images: &[RgbImage],
    config: &PipelineConfig,
) -> Result<(RgbImage, FusionStats, usize)> {
    let m = config.segments.unwrap_or(images.len());
    let linear: Vec<RgbImage> = images.iter().map(srgb::decode_image).collect();
    let adjusted = ssla::run_ssla(&linear, m)?;
    let display: Vec<RgbImage> = adjusted.images.iter().map(srgb::encode_image).collect();
    let (fused, stats) = fusion::fuse_with_stats(&display, &config.fusion_params())?;
    Ok((fused, stats, adjusted.segmentation.count))
}

/// Run the full pipeline over a display-encoded stack.
pub fn run_pipeline(stack: &ExposureStack, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let (fused, fusion_stats, segments_used) = adjusted_fusion(stack.images(), config)?;
    let curve = hdr::estimate_crf(stack, &config.crf_options())?;
    let reference = hdr::merge_hdr(stack, &curve)?;
    let corrected = color_hue::correct_image_hue(&fused, &reference)?;
    let manifest = render_manifest(stack, config, segments_used, &curve, &fusion_stats);
    Ok(PipelineOutput {
        fused,
        reference,
        corrected,
        curve,
        fusion_stats,
        segments_used,
        manifest,
    })
}

/// File names used by [`write_outputs`].
pub const FUSED_NAME: &str = "fused.png";
pub const REFERENCE_NAME: &str = "reference.hdr";
pub const CORRECTED_NAME: &str = "corrected.png";
pub const MANIFEST_NAME: &str = "manifest.txt";

/// Write the three image artifacts plus the manifest into `dir`.
pub fn write_outputs(output: &PipelineOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::IoPath {
        path: dir.to_path_buf(),
        source,
    })?;
    imgio::write_image(&output.fused, &dir.join(FUSED_NAME), ImageFormat::Png16)?;
    imgio::write_image(&output.reference, &dir.join(REFERENCE_NAME), ImageFormat::Rgbe)?;
    imgio::write_image(&output.corrected, &dir.join(CORRECTED_NAME), ImageFormat::Png16)?;
    std::fs::write(dir.join(MANIFEST_NAME), &output.manifest).map_err(|source| {
        Error::IoPath {
            path: dir.join(MANIFEST_NAME),
            source,
        }
    })?;
    Ok(())
}

/// Deterministic key-value manifest: one `key = value` line per parameter
/// that affects the output, sorted by key. No timestamps.
fn render_manifest(
    stack: &ExposureStack,
    config: &PipelineConfig,
    segments_used: usize,
    curve: &ResponseCurve,
    stats: &FusionStats,
) -> String {
    let evs: Vec<String> = stack.evs().iter().map(|e| format!("{e}")).collect();
    let coeffs: Vec<String> = curve
        .coefficients()
        .iter()
        .map(|c| format!("{c:.12e}"))
        .collect();
    let mut entries: Vec<(String, String)> = vec![
        ("achromatic_epsilon".into(), format!("{}", color_hue::CHROMA_EPSILON)),
        ("anchor_middle_gray".into(), format!("{}", ssla::MIDDLE_GRAY)),
        ("base_exposure_index".into(), format!("{}", stack.middle_index())),
        ("crf_coefficients".into(), coeffs.join(",")),
        ("crf_degree_fitted".into(), format!("{}", curve.degree())),
        ("crf_degree_requested".into(), format!("{}", config.crf_degree)),
        ("crf_sample_range".into(), "0.05..0.95".into()),
        ("crf_samples".into(), format!("{}", config.crf_samples)),
        ("dodge_burn_sigma".into(), "min(width,height)/16".into()),
        ("evs".into(), evs.join(",")),
        ("fusion_overshoot_above".into(), format!("{:.6e}", stats.overshoot_above)),
        ("fusion_overshoot_below".into(), format!("{:.6e}", stats.overshoot_below)),
        (
            "fusion_pyramid_depth".into(),
            config
                .pyramid_depth
                .map(|d| d.to_string())
                .unwrap_or_else(|| "floor(log2(min(width,height)))".into()),
        ),
        ("fusion_weight_floor".into(), "1e-12".into()),
        ("gmm_iteration_cap".into(), format!("{}", gmm::MAX_ITERATIONS)),
        ("gmm_tolerance".into(), format!("{}", gmm::LOG_LIKELIHOOD_TOL)),
        ("gmm_variance_floor".into(), format!("{}", gmm::VARIANCE_FLOOR)),
        ("gray_conversion".into(), "(r+g+b)/3".into()),
        ("luma_weights".into(), "0.2126,0.7152,0.0722".into()),
        ("omega_contrast".into(), format!("{}", config.exponent_contrast)),
        ("omega_exposedness".into(), format!("{}", config.exponent_exposedness)),
        ("omega_saturation".into(), format!("{}", config.exponent_saturation)),
        ("seed".into(), format!("{}", config.seed)),
        (
            "segments_requested".into(),
            config
                .segments
                .map(|m| m.to_string())
                .unwrap_or_else(|| "stack size".into()),
        ),
        ("segments_used".into(), format!("{segments_used}")),
        ("sigma_exposedness".into(), format!("{}", config.exposedness_sigma)),
        ("synth_gamma".into(), format!("{}", config.synth_gamma)),
        ("tone_curve".into(), "x/(1+x)".into()),
    ];
    entries.sort();
    let mut out = String::new();
    for (k, v) in entries {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}
