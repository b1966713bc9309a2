//! Desk-scale evaluation harness: run the fusion methods over scene
//! directories and score hue distortion and tone-mapped quality against the
//! scene's ground-truth radiance.
//!
//! A scene directory holds one ground-truth radiance file (`.pfm` or
//! `.hdr`), the display-encoded stack as `.png` files (sorted by name), and
//! an `evs.txt` sidecar with one EV per line.

use std::path::{Path, PathBuf};

use crate::color_hue;
use crate::error::{Error, Result};
use crate::fusion;
use crate::hdr::{self, ExposureStack, SynthOptions};
use crate::image::{DynamicRange, RgbImage};
use crate::imgio::{self, ImageFormat};
use crate::metrics::{self, TmqiScore};
use crate::pipeline::{adjusted_fusion, PipelineConfig};
use crate::scenes;

/// The fusion methods under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Plain exposure fusion of the input stack.
    Mertens,
    /// Exposure fusion of the luminance-adjusted images.
    SslaMertens,
    /// Luminance-adjusted fusion plus hue correction from the merged
    /// reference.
    Proposed,
}

pub const ALL_METHODS: [Method; 3] = [Method::Mertens, Method::SslaMertens, Method::Proposed];

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Mertens => "mertens",
            Method::SslaMertens => "ssla-mertens",
            Method::Proposed => "proposed",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        match name {
            "mertens" => Some(Method::Mertens),
            "ssla-mertens" => Some(Method::SslaMertens),
            "proposed" => Some(Method::Proposed),
            _ => None,
        }
    }
}

/// One scored (scene, method) pair.
#[derive(Debug, Clone)]
pub struct ScoreRow {
    pub scene: String,
    pub method: Method,
    pub mean_delta_h: Option<f64>,
    pub tmqi: Option<TmqiScore>,
}

/// Full evaluation output.
#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    pub rows: Vec<ScoreRow>,
    /// Scenes skipped with the reason.
    pub skipped: Vec<(String, String)>,
}

impl EvalReport {
    /// Mean of a column over scenes for one method.
    pub fn aggregate(&self, method: Method, f: impl Fn(&ScoreRow) -> Option<f64>) -> Option<f64> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method)
            .filter_map(f)
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    /// Machine-readable CSV, one row per scene and method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scene,method,mean_dH,TMQI_Q,TMQI_S,TMQI_N\n");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.scene,
                row.method.name(),
                fmt(row.mean_delta_h),
                fmt(row.tmqi.map(|t| t.q)),
                fmt(row.tmqi.map(|t| t.s)),
                fmt(row.tmqi.map(|t| t.n)),
            ));
        }
        out
    }

    /// Human-readable table with aggregate means per method.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:<14} {:>10} {:>8} {:>8} {:>8}\n",
            "scene", "method", "mean_dH", "TMQI_Q", "TMQI_S", "TMQI_N"
        ));
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        for row in &self.rows {
            out.push_str(&format!(
                "{:<12} {:<14} {:>10} {:>8} {:>8} {:>8}\n",
                row.scene,
                row.method.name(),
                fmt(row.mean_delta_h),
                fmt(row.tmqi.map(|t| t.q)),
                fmt(row.tmqi.map(|t| t.s)),
                fmt(row.tmqi.map(|t| t.n)),
            ));
        }
        out.push('\n');
        for method in ALL_METHODS {
            if !self.rows.iter().any(|r| r.method == method) {
                continue;
            }
            out.push_str(&format!(
                "{:<12} {:<14} {:>10} {:>8}\n",
                "(mean)",
                method.name(),
                fmt(self.aggregate(method, |r| r.mean_delta_h)),
                fmt(self.aggregate(method, |r| r.tmqi.map(|t| t.q))),
            ));
        }
        for (scene, reason) in &self.skipped {
            out.push_str(&format!("skipped {scene}: {reason}\n"));
        }
        out
    }
}

/// Score the requested methods on one scene.
pub fn evaluate_scene(
    scene: &str,
    truth: &RgbImage,
    stack: &ExposureStack,
    methods: &[Method],
    config: &PipelineConfig,
) -> Result<Vec<ScoreRow>> {
    let hue_reference = metrics::prepare_hue_reference(truth)?;

    // Method outputs; the adjusted fusion is shared between ssla-mertens and
    // proposed.
    let needs_ssla = methods
        .iter()
        .any(|m| matches!(m, Method::SslaMertens | Method::Proposed));
    let ssla_fused = if needs_ssla {
        Some(adjusted_fusion(stack.images(), config)?.0)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(methods.len());
    for &method in methods {
        let rendered = match method {
            Method::Mertens => fusion::fuse(stack.images(), &config.fusion_params())?,
            Method::SslaMertens => ssla_fused.clone().unwrap(),
            Method::Proposed => {
                let curve = hdr::estimate_crf(stack, &config.crf_options())?;
                let merged = hdr::merge_hdr(stack, &curve)?;
                color_hue::correct_image_hue(ssla_fused.as_ref().unwrap(), &merged)?
            }
        };
        let mean_delta_h = if config.metric_delta_h {
            Some(metrics::mean_delta_h(&rendered, &hue_reference)?)
        } else {
            None
        };
        let tmqi = if config.metric_tmqi {
            Some(metrics::tmqi(truth, &rendered)?)
        } else {
            None
        };
        rows.push(ScoreRow {
            scene: scene.to_string(),
            method,
            mean_delta_h,
            tmqi,
        });
    }
    Ok(rows)
}

/// Locate ground truth, stack and EVs inside one scene directory.
pub fn load_scene_dir(dir: &Path) -> Result<(RgbImage, ExposureStack)> {
    let mut truth_path: Option<PathBuf> = None;
    let mut stack_paths: Vec<PathBuf> = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| Error::IoPath {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in entries {
        match path.extension().and_then(|e| e.to_str()) {
            Some("pfm") | Some("hdr") | Some("pic") => {
                if truth_path.is_some() {
                    return Err(Error::invalid(format!(
                        "{}: more than one ground-truth radiance file",
                        dir.display()
                    )));
                }
                truth_path = Some(path);
            }
            Some("png") => stack_paths.push(path),
            _ => {}
        }
    }
    let truth_path = truth_path.ok_or_else(|| {
        Error::invalid(format!("{}: no ground-truth radiance file", dir.display()))
    })?;
    if stack_paths.is_empty() {
        return Err(Error::invalid(format!("{}: no stack images", dir.display())));
    }
    let evs = imgio::read_ev_sidecar(&dir.join("evs.txt"))?;
    let (truth, _) = imgio::read_image(&truth_path)?;
    let mut images = Vec::with_capacity(stack_paths.len());
    for p in &stack_paths {
        let (img, _) = imgio::read_image(p)?;
        if img.range() != DynamicRange::Ldr {
            return Err(Error::invalid(format!(
                "{}: stack image is not display-referred",
                p.display()
            )));
        }
        images.push(img);
    }
    let stack = ExposureStack::new(images, evs)?;
    Ok((truth, stack))
}

/// Evaluate every scene subdirectory under `root`.
pub fn evaluate_dir(
    root: &Path,
    methods: &[Method],
    config: &PipelineConfig,
) -> Result<EvalReport> {
    let mut scene_dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(|source| Error::IoPath {
            path: root.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    scene_dirs.sort();
    let mut report = EvalReport::default();
    for dir in scene_dirs {
        let scene = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        match load_scene_dir(&dir)
            .and_then(|(truth, stack)| evaluate_scene(&scene, &truth, &stack, methods, config))
        {
            Ok(rows) => report.rows.extend(rows),
            Err(e) => report.skipped.push((scene, e.to_string())),
        }
    }
    Ok(report)
}

/// Materialize a builtin scene as a scene directory: ground truth PFM,
/// synthesized PNG-16 stack, and the EV sidecar.
pub fn materialize_builtin_scene(
    name: &str,
    size: usize,
    evs: &[f64],
    gamma: f64,
    dir: &Path,
) -> Result<()> {
    let truth = scenes::builtin(name, size, size)
        .ok_or_else(|| Error::invalid(format!("unknown builtin scene {name:?}")))?;
    std::fs::create_dir_all(dir).map_err(|source| Error::IoPath {
        path: dir.to_path_buf(),
        source,
    })?;
    let stack = hdr::synthesize_stack(
        &truth,
        evs,
        &SynthOptions {
            crf: hdr::ForwardCrf::Gamma(gamma),
            quantize_bits: None,
        },
    )?;
    imgio::write_image(&truth, &dir.join("reference.pfm"), ImageFormat::Pfm)?;
    for (i, img) in stack.images().iter().enumerate() {
        imgio::write_image(
            img,
            &dir.join(format!("stack_{i:02}.png")),
            ImageFormat::Png16,
        )?;
    }
    imgio::write_ev_sidecar(&dir.join("evs.txt"), evs)?;
    Ok(())
}
