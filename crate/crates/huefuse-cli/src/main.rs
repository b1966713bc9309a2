//! Command-line front end for hue-corrected multi-exposure fusion.
//!
//! Every pipeline stage is also exposed as its own subcommand so runs can be
//! scripted and inspected stage by stage. Exit codes: 0 success, 1 stage
//! error, 2 usage or validation error, 3 nothing to do.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use huefuse::eval::{self, Method};
use huefuse::hdr::{ExposureStack, ForwardCrf, SynthOptions};
use huefuse::image::{DynamicRange, RgbImage};
use huefuse::imgio::{self, ImageFormat};
use huefuse::pipeline::{self, PipelineConfig};
use huefuse::{scenes, srgb, ssla};

#[derive(Parser)]
#[command(
    name = "huefuse",
    version,
    about = "Hue-corrected multi-exposure image fusion",
    after_help = "Exit codes: 0 success, 1 stage error, 2 usage/validation, 3 no work done."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an exposure stack from a scene-referred image.
    Synth(SynthArgs),
    /// Write the luminance-adjusted images for a stack.
    Ssla(SslaArgs),
    /// Fuse display-referred exposures into one image.
    Fuse(FuseArgs),
    /// Calibrate the inverse response and merge the stack into radiance.
    Hdr(HdrArgs),
    /// Transplant reference hues into a fused image.
    Correct(CorrectArgs),
    /// Score fusion methods over scene directories (CSV + table).
    Eval(EvalArgs),
    /// Run the whole pipeline: adjust, fuse, merge, hue-correct.
    Pipeline(PipelineArgs),
}

/// Flags shared by subcommands that tune the pipeline.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Flat key = value config file; flags override file entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of scene segments (default: one per input exposure).
    #[arg(long)]
    segments: Option<usize>,
    /// Seed for the calibration sampler.
    #[arg(long)]
    seed: Option<u64>,
    /// Pyramid depth override for fusion.
    #[arg(long)]
    pyramid_depth: Option<usize>,
    /// Contrast exponent.
    #[arg(long)]
    omega_contrast: Option<f64>,
    /// Saturation exponent.
    #[arg(long)]
    omega_saturation: Option<f64>,
    /// Well-exposedness exponent.
    #[arg(long)]
    omega_exposedness: Option<f64>,
    /// Well-exposedness width.
    #[arg(long)]
    sigma: Option<f64>,
    /// Polynomial degree of the inverse response fit.
    #[arg(long)]
    crf_degree: Option<usize>,
    /// Pixel positions sampled for calibration.
    #[arg(long)]
    crf_samples: Option<usize>,
    /// Forward-response gamma for synthesis.
    #[arg(long)]
    gamma: Option<f64>,
}

impl ConfigArgs {
    fn build(&self) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
            cfg.apply_config_text(&text)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
        }
        if let Some(v) = self.segments {
            cfg.segments = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.pyramid_depth {
            cfg.pyramid_depth = Some(v);
        }
        if let Some(v) = self.omega_contrast {
            cfg.exponent_contrast = v;
        }
        if let Some(v) = self.omega_saturation {
            cfg.exponent_saturation = v;
        }
        if let Some(v) = self.omega_exposedness {
            cfg.exponent_exposedness = v;
        }
        if let Some(v) = self.sigma {
            cfg.exposedness_sigma = v;
        }
        if let Some(v) = self.crf_degree {
            cfg.crf_degree = v;
        }
        if let Some(v) = self.crf_samples {
            cfg.crf_samples = v;
        }
        if let Some(v) = self.gamma {
            cfg.synth_gamma = v;
        }
        cfg.validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Scene-referred input (.hdr or .pfm); omit when using --builtin.
    input: Option<PathBuf>,
    /// Use a bundled synthetic scene instead of an input file.
    #[arg(long, conflicts_with = "input")]
    builtin: Option<String>,
    /// List bundled scene names and exit.
    #[arg(long)]
    list_builtins: bool,
    /// Square size of the bundled scene.
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Comma-separated exposure values, ascending.
    #[arg(long, default_value = "-4,-2,0,2,4", allow_hyphen_values = true)]
    evs: String,
    /// Forward-response gamma.
    #[arg(long, default_value_t = 2.2)]
    gamma: f64,
    /// Quantize the stack to this bit depth before writing.
    #[arg(long)]
    bits: Option<u32>,
    /// Output directory for the stack and the EV sidecar.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SslaArgs {
    /// Display-referred input images.
    #[arg(required = true)]
    images: Vec<PathBuf>,
    /// Number of scene segments (default: one per input).
    #[arg(long)]
    segments: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FuseArgs {
    /// Display-referred input images.
    #[arg(required = true)]
    images: Vec<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output PNG path.
    #[arg(long, default_value = "fused.png")]
    out: PathBuf,
}

#[derive(Args)]
struct HdrArgs {
    /// Display-referred stack images, ordered by exposure.
    #[arg(required = true)]
    images: Vec<PathBuf>,
    /// Comma-separated exposure values matching the stack.
    #[arg(long, allow_hyphen_values = true)]
    evs: Option<String>,
    /// EV sidecar file (one value per line).
    #[arg(long, conflicts_with = "evs")]
    ev_file: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Fit one curve per channel instead of sharing the green fit.
    #[arg(long)]
    per_channel: bool,
    /// Output radiance path (.hdr or .pfm).
    #[arg(long, default_value = "merged.hdr")]
    out: PathBuf,
}

#[derive(Args)]
struct CorrectArgs {
    /// Fused display-referred image.
    #[arg(long)]
    fused: PathBuf,
    /// Scene-referred hue reference (.hdr or .pfm).
    #[arg(long)]
    reference: PathBuf,
    /// Output PNG path.
    #[arg(long, default_value = "corrected.png")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Root directory of scene subdirectories.
    #[arg(long)]
    scenes: PathBuf,
    /// Comma-separated methods: mertens, ssla-mertens, proposed.
    #[arg(long, default_value = "mertens,ssla-mertens,proposed")]
    methods: String,
    /// CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct PipelineArgs {
    /// Display-referred stack images, ordered by exposure.
    #[arg(required = true)]
    images: Vec<PathBuf>,
    /// Comma-separated exposure values matching the stack.
    #[arg(long, allow_hyphen_values = true)]
    evs: Option<String>,
    /// EV sidecar file (one value per line).
    #[arg(long, conflicts_with = "evs")]
    ev_file: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value = "huefuse-out")]
    out_dir: PathBuf,
}

enum CliError {
    /// Bad flags or inconsistent inputs.
    Usage(String),
    /// A pipeline stage failed.
    Stage(String),
    /// Nothing to do (all scenes skipped, ...).
    NoWork(String),
}

impl CliError {
    fn report(&self) -> ExitCode {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliError::Stage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            CliError::NoWork(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

fn stage<T>(name: &str, r: huefuse::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| match e {
        huefuse::Error::InvalidInput(msg) => CliError::Usage(format!("{name}: {msg}")),
        other => CliError::Stage(format!("{name}: {other}")),
    })
}

fn parse_ev_list(text: &str) -> Result<Vec<f64>, CliError> {
    let evs: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match evs {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Usage(format!("--evs: cannot parse {text:?}"))),
    }
}

fn resolve_evs(
    evs: &Option<String>,
    ev_file: &Option<PathBuf>,
    n_images: usize,
) -> Result<Vec<f64>, CliError> {
    let evs = match (evs, ev_file) {
        (Some(list), _) => parse_ev_list(list)?,
        (None, Some(path)) => imgio::read_ev_sidecar(path)
            .map_err(|e| CliError::Usage(format!("--ev-file: {e}")))?,
        (None, None) => {
            return Err(CliError::Usage(
                "exposure values required: pass --evs or --ev-file".into(),
            ))
        }
    };
    if evs.len() != n_images {
        return Err(CliError::Usage(format!(
            "--evs: {} values for {} images",
            evs.len(),
            n_images
        )));
    }
    Ok(evs)
}

fn load_images(paths: &[PathBuf]) -> Result<Vec<RgbImage>, CliError> {
    let mut images = Vec::with_capacity(paths.len());
    for p in paths {
        let (img, _) = stage("read", imgio::read_image(p))?;
        images.push(img);
    }
    Ok(images)
}

fn load_stack(
    paths: &[PathBuf],
    evs: &Option<String>,
    ev_file: &Option<PathBuf>,
) -> Result<ExposureStack, CliError> {
    let evs = resolve_evs(evs, ev_file, paths.len())?;
    let images = load_images(paths)?;
    stage("stack", ExposureStack::new(images, evs))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Stage(format!("create {}: {e}", dir.display())))
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    if args.list_builtins {
        for name in scenes::BUILTIN_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let evs = parse_ev_list(&args.evs)?;
    let source = match (&args.input, &args.builtin) {
        (Some(path), None) => {
            let (img, _) = stage("read", imgio::read_image(path))?;
            if img.range() != DynamicRange::Hdr {
                return Err(CliError::Usage(format!(
                    "{}: synthesis input must be scene-referred (.hdr or .pfm)",
                    path.display()
                )));
            }
            img
        }
        (None, Some(name)) => scenes::builtin(name, args.size, args.size).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown builtin scene {name:?}; try --list-builtins"
            ))
        })?,
        _ => {
            return Err(CliError::Usage(
                "pass a scene-referred input file or --builtin <name>".into(),
            ))
        }
    };
    if args.gamma <= 0.0 {
        return Err(CliError::Usage("--gamma must be positive".into()));
    }
    let options = SynthOptions {
        crf: ForwardCrf::Gamma(args.gamma),
        quantize_bits: args.bits,
    };
    let stack = stage("synth", huefuse::hdr::synthesize_stack(&source, &evs, &options))?;
    ensure_dir(&args.out_dir)?;
    for (i, img) in stack.images().iter().enumerate() {
        let path = args.out_dir.join(format!("stack_{i:02}.png"));
        stage("write", imgio::write_image(img, &path, ImageFormat::Png16))?;
        println!("wrote {}", path.display());
    }
    let sidecar = args.out_dir.join("evs.txt");
    stage("write", imgio::write_ev_sidecar(&sidecar, &evs))?;
    println!("wrote {}", sidecar.display());
    if args.builtin.is_some() {
        let reference = args.out_dir.join("reference.pfm");
        stage("write", imgio::write_image(&source, &reference, ImageFormat::Pfm))?;
        println!("wrote {}", reference.display());
    }
    Ok(())
}

fn cmd_ssla(args: &SslaArgs) -> Result<(), CliError> {
    let images = load_images(&args.images)?;
    let m = args.segments.unwrap_or(images.len());
    let linear: Vec<RgbImage> = images.iter().map(srgb::decode_image).collect();
    let out = stage("ssla", ssla::run_ssla(&linear, m))?;
    ensure_dir(&args.out_dir)?;
    for (i, img) in out.images.iter().enumerate() {
        let display = srgb::encode_image(img);
        let path = args.out_dir.join(format!("adjusted_{i:02}.png"));
        stage("write", imgio::write_image(&display, &path, ImageFormat::Png16))?;
        println!(
            "wrote {} (segment scale {:.4}, {} clipped px)",
            path.display(),
            out.factors[i],
            out.clipped[i]
        );
    }
    if out.segmentation.collapsed {
        eprintln!(
            "warning: segmentation collapsed to {} areas",
            out.segmentation.count
        );
    }
    if !out.segmentation.converged {
        eprintln!("warning: segmentation hit the iteration cap");
    }
    Ok(())
}

fn cmd_fuse(args: &FuseArgs) -> Result<(), CliError> {
    let cfg = args.config.build()?;
    let images = load_images(&args.images)?;
    let (fused, stats) =
        stage("fuse", huefuse::fusion::fuse_with_stats(&images, &cfg.fusion_params()))?;
    stage("write", imgio::write_image(&fused, &args.out, ImageFormat::Png16))?;
    println!(
        "wrote {} (pre-clamp overshoot +{:.3e}/-{:.3e})",
        args.out.display(),
        stats.overshoot_above,
        stats.overshoot_below
    );
    Ok(())
}

fn cmd_hdr(args: &HdrArgs) -> Result<(), CliError> {
    let cfg = args.config.build()?;
    let stack = load_stack(&args.images, &args.evs, &args.ev_file)?;
    let merged = if args.per_channel {
        let curves =
            stage("calibrate", huefuse::hdr::estimate_crf_per_channel(&stack, &cfg.crf_options()))?;
        for (ch, curve) in ["r", "g", "b"].iter().zip(curves.iter()) {
            println!("inverse response ({ch}): degree {} {:?}", curve.degree(), curve.coefficients());
        }
        stage("merge", huefuse::hdr::merge_hdr_channels(&stack, &curves))?
    } else {
        let curve = stage("calibrate", huefuse::hdr::estimate_crf(&stack, &cfg.crf_options()))?;
        println!(
            "inverse response: degree {} {:?}",
            curve.degree(),
            curve.coefficients()
        );
        stage("merge", huefuse::hdr::merge_hdr(&stack, &curve))?
    };
    let format = ImageFormat::for_path(&args.out)
        .filter(|f| matches!(f, ImageFormat::Rgbe | ImageFormat::Pfm))
        .ok_or_else(|| {
            CliError::Usage(format!(
                "--out {}: radiance output must be .hdr or .pfm",
                args.out.display()
            ))
        })?;
    stage("write", imgio::write_image(&merged, &args.out, format))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_correct(args: &CorrectArgs) -> Result<(), CliError> {
    let (fused, _) = stage("read", imgio::read_image(&args.fused))?;
    let (reference, _) = stage("read", imgio::read_image(&args.reference))?;
    let corrected = stage(
        "correct",
        huefuse::color_hue::correct_image_hue(&fused, &reference),
    )?;
    stage("write", imgio::write_image(&corrected, &args.out, ImageFormat::Png16))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let cfg = args.config.build()?;
    let mut methods = Vec::new();
    for name in args.methods.split(',') {
        let name = name.trim();
        methods.push(Method::from_name(name).ok_or_else(|| {
            CliError::Usage(format!(
                "--methods: unknown method {name:?} (expected mertens, ssla-mertens, proposed)"
            ))
        })?);
    }
    let report = stage("eval", eval::evaluate_dir(&args.scenes, &methods, &cfg))?;
    for (scene, reason) in &report.skipped {
        eprintln!("warning: skipped {scene}: {reason}");
    }
    if report.rows.is_empty() {
        return Err(CliError::NoWork(format!(
            "no scenes evaluated under {}",
            args.scenes.display()
        )));
    }
    print!("{}", report.to_table());
    if let Some(csv_path) = &args.csv {
        std::fs::write(csv_path, report.to_csv())
            .map_err(|e| CliError::Stage(format!("write {}: {e}", csv_path.display())))?;
        println!("wrote {}", csv_path.display());
    }
    Ok(())
}

fn cmd_pipeline(args: &PipelineArgs) -> Result<(), CliError> {
    let cfg = args.config.build()?;
    let stack = load_stack(&args.images, &args.evs, &args.ev_file)?;
    let output = stage("pipeline", pipeline::run_pipeline(&stack, &cfg))?;
    stage("write", pipeline::write_outputs(&output, &args.out_dir))?;
    println!(
        "wrote {}, {}, {}, {} (segments {}, overshoot +{:.3e}/-{:.3e})",
        args.out_dir.join(pipeline::FUSED_NAME).display(),
        args.out_dir.join(pipeline::REFERENCE_NAME).display(),
        args.out_dir.join(pipeline::CORRECTED_NAME).display(),
        args.out_dir.join(pipeline::MANIFEST_NAME).display(),
        output.segments_used,
        output.fusion_stats.overshoot_above,
        output.fusion_stats.overshoot_below,
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Ssla(args) => cmd_ssla(args),
        Command::Fuse(args) => cmd_fuse(args),
        Command::Hdr(args) => cmd_hdr(args),
        Command::Correct(args) => cmd_correct(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Pipeline(args) => cmd_pipeline(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
