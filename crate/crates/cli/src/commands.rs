//! Subcommand bodies. Each resolves its slice of the configuration, fills
//! in defaults, computes, and writes its artifacts.

use crate::config::{at_least, parse_grid, positive, require, RunConfig};
use crate::overlay::{load_overlay, LoadedOverlay};
use crate::report::{output_path, sidecar_path, write_bytes, Envelope};
use anyhow::{bail, Context, Result};
use image::{codecs::png::PngEncoder, ExtendedColorType, ImageEncoder};
use julialab_core::boettcher::{
    distortion_probe, psi_check_grid, trace_ray, verify_derivative_identity, Angle, DerivativeIdentity,
    DistortionReport, PsiGridReport, RayOptions, MIN_IDENTITY_IM,
};
use julialab_core::classify::{
    brjuno_data, indifferent_cycles, small_multiplier_scan, BrjunoRule, IndifferentCycle, RotationData,
    RotationNumber, ScanReport,
};
use julialab_core::ergodic::{brolin_sample, lyapunov_estimate, ruelle_check, ErgodicEstimate, RuelleVerdict, DEFAULT_BURN};
use julialab_core::poly::parse_complex;
use julialab_core::render::{draw_overlays, render_julia, ColorMode, ImageSpec, Overlay};
use julialab_core::spectrum::{
    growth_check, multiplier_spectrum, GrowthReport, MultiplierSpectrum, SpectrumFailure, SpectrumOptions,
};
use julialab_core::tree::{
    build_tree, summability_report, theorem_pipeline_report, CrossReport, PreimageTree, SummabilityReport,
    SummabilityVerdict, DEFAULT_TREE_BUDGET,
};
use julialab_core::{ComplexPoint, Polynomial};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// How a command ended once its arguments were accepted.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// Artifacts were written but the computation stopped short.
    NumericalFailure(String),
}

pub const DEFAULT_NMAX: usize = 8;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_TREE_DEPTH: usize = 10;
pub const DEFAULT_S_HI: f64 = 4.0;
pub const DEFAULT_S_LO: f64 = 1e-10;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BRJUNO_DEPTH: usize = 40;
pub const DEFAULT_RESOLUTION: usize = 1024;
pub const DEFAULT_WIDTH: f64 = 4.0;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_IDENTITY_SAMPLES: usize = 50;
pub const DEFAULT_DISTORTION_SAMPLES: usize = 1000;
/// Summability needs this many levels.
const MIN_TREE_DEPTH: usize = 3;

const RAY_COLORS: [[u8; 3]; 5] = [[220, 30, 30], [30, 90, 220], [20, 150, 60], [230, 140, 0], [150, 40, 170]];
const POINT_COLOR: [u8; 3] = [0, 170, 200];

fn polynomial(cfg: &RunConfig) -> Result<(String, Polynomial)> {
    let text = require(&cfg.poly, "poly")?;
    let poly = text.parse().with_context(|| format!("--poly {text:?}"))?;
    Ok((text, poly))
}

fn point_text(z: ComplexPoint) -> String {
    format!("{},{}", z.re, z.im)
}

fn point(text: &str, flag: &str) -> Result<ComplexPoint> {
    parse_complex(text).with_context(|| format!("--{flag} {text:?}"))
}

/// A point on the positive real axis beyond the escape radius.
fn default_base_point(poly: &Polynomial) -> ComplexPoint {
    Complex64::new(poly.escape_radius(), 0.0)
}

fn spectrum_options(cfg: &RunConfig) -> Result<SpectrumOptions> {
    let defaults = SpectrumOptions::default();
    Ok(SpectrumOptions {
        budget: cfg.budget.unwrap_or(defaults.budget),
        indifference_tolerance: positive(
            cfg.indifference_tolerance.unwrap_or(defaults.indifference_tolerance),
            "indifference-tolerance",
        )?,
        precision_escalation: cfg.precision_escalation.unwrap_or(defaults.precision_escalation),
        ..defaults
    })
}

/// The spectrum settings with defaults filled in.
fn resolve_spectrum(cfg: &RunConfig) -> Result<RunConfig> {
    let options = spectrum_options(cfg)?;
    Ok(RunConfig {
        poly: Some(require(&cfg.poly, "poly")?),
        nmax: Some(at_least(cfg.nmax.unwrap_or(DEFAULT_NMAX), 1, "nmax")?),
        epsilon: Some(positive(cfg.epsilon.unwrap_or(DEFAULT_EPSILON), "epsilon")?),
        budget: Some(options.budget),
        indifference_tolerance: Some(options.indifference_tolerance),
        precision_escalation: Some(options.precision_escalation),
        out: cfg.out.clone(),
        ..Default::default()
    })
}

fn failure_outcome(failure: &Option<SpectrumFailure>) -> Outcome {
    match failure {
        None => Outcome::Done,
        Some(f) => Outcome::NumericalFailure(format!("spectrum stopped at period {}: {}", f.period, f.message)),
    }
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    #[serde(flatten)]
    spectrum: &'a MultiplierSpectrum,
    growth: Option<GrowthReport>,
    growth_error: Option<String>,
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let cfg = resolve_spectrum(cfg)?;
    let (_, poly) = polynomial(&cfg)?;
    let spectrum = multiplier_spectrum(&poly, cfg.nmax.unwrap(), &spectrum_options(&cfg)?)?;
    let (growth, growth_error) = match growth_check(&spectrum, cfg.epsilon.unwrap()) {
        Ok(g) => (Some(g), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = SpectrumReport {
        spectrum: &spectrum,
        growth,
        growth_error,
    };
    let path = output_path(&cfg, "spectrum.json");
    Envelope::new("spectrum", &cfg, Some(poly.fingerprint()), report).write(&path)?;
    Ok(failure_outcome(&spectrum.failure))
}

#[derive(Serialize)]
struct TreeSummary {
    w0: ComplexPoint,
    green_w0: f64,
    depth: usize,
    level_sizes: Vec<usize>,
}

impl TreeSummary {
    fn of(tree: &PreimageTree) -> Self {
        Self {
            w0: tree.w0,
            green_w0: tree.green_w0,
            depth: tree.levels.len() - 1,
            level_sizes: tree.levels.iter().map(|l| l.nodes.len()).collect(),
        }
    }
}

#[derive(Serialize)]
struct TreeReport {
    tree: TreeSummary,
    summability: SummabilityReport,
}

fn write_tree_csv(tree: &PreimageTree, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["depth", "index", "parent", "re", "im", "log_deriv"])?;
    for level in &tree.levels {
        for (k, node) in level.nodes.iter().enumerate() {
            w.write_record([
                level.depth.to_string(),
                k.to_string(),
                node.parent.map(|p| p.to_string()).unwrap_or_default(),
                node.z.re.to_string(),
                node.z.im.to_string(),
                node.log_derivative.to_string(),
            ])?;
        }
    }
    write_bytes(path, &w.into_inner()?)
}

fn resolve_tree(cfg: &RunConfig, poly: &Polynomial, default_depth: usize) -> Result<(RunConfig, ComplexPoint)> {
    let w0 = match &cfg.w0 {
        Some(text) => point(text, "w0")?,
        None => default_base_point(poly),
    };
    let resolved = RunConfig {
        w0: Some(point_text(w0)),
        depth: Some(at_least(cfg.depth.unwrap_or(default_depth), MIN_TREE_DEPTH, "depth")?),
        budget: Some(cfg.budget.unwrap_or(DEFAULT_TREE_BUDGET)),
        ..Default::default()
    };
    Ok((resolved, w0))
}

pub fn tree(cfg: &RunConfig) -> Result<Outcome> {
    let (text, poly) = polynomial(cfg)?;
    let (resolved, w0) = resolve_tree(cfg, &poly, DEFAULT_TREE_DEPTH)?;
    let cfg = RunConfig {
        poly: Some(text),
        out: cfg.out.clone(),
        ..resolved
    };
    let tree = build_tree(&poly, w0, cfg.depth.unwrap(), cfg.budget.unwrap())?;
    let summability = summability_report(&tree)?;
    let csv_path = output_path(&cfg, "tree.csv");
    write_tree_csv(&tree, &csv_path)?;
    let report = TreeReport {
        tree: TreeSummary::of(&tree),
        summability,
    };
    Envelope::new("tree", &cfg, Some(poly.fingerprint()), report).write(&sidecar_path(&csv_path))?;
    Ok(Outcome::Done)
}

fn ray_options(cfg: &RunConfig) -> Result<RayOptions> {
    let defaults = RayOptions::default();
    Ok(RayOptions {
        levels_per_factor: at_least(cfg.levels_per_factor.unwrap_or(defaults.levels_per_factor), 1, "levels-per-factor")?,
        landing_tolerance: positive(cfg.landing_tolerance.unwrap_or(defaults.landing_tolerance), "landing-tolerance")?,
        ..defaults
    })
}

fn potentials(cfg: &RunConfig) -> Result<(f64, f64)> {
    let s_hi = positive(cfg.shi.unwrap_or(DEFAULT_S_HI), "shi")?;
    let s_lo = positive(cfg.slo.unwrap_or(DEFAULT_S_LO), "slo")?;
    if s_lo >= s_hi {
        bail!("--slo ({s_lo}) must be below --shi ({s_hi})");
    }
    Ok((s_hi, s_lo))
}

fn angle(text: &str) -> Result<Angle> {
    text.parse().with_context(|| format!("angle {text:?}"))
}

#[derive(Serialize)]
struct RayReport {
    angle: Angle,
    s_hi: f64,
    s_lo: f64,
    sample_count: usize,
    orbit_type: (usize, usize),
    landing: Option<ComplexPoint>,
    landing_estimate: Option<ComplexPoint>,
    landing_spread: Option<f64>,
    failure: Option<String>,
}

pub fn ray(cfg: &RunConfig) -> Result<Outcome> {
    let (text, poly) = polynomial(cfg)?;
    let theta = angle(&require(&cfg.angle, "angle")?)?;
    let options = ray_options(cfg)?;
    let (s_hi, s_lo) = potentials(cfg)?;
    let cfg = RunConfig {
        poly: Some(text),
        angle: Some(theta.to_string()),
        shi: Some(s_hi),
        slo: Some(s_lo),
        levels_per_factor: Some(options.levels_per_factor),
        landing_tolerance: Some(options.landing_tolerance),
        out: cfg.out.clone(),
        ..Default::default()
    };
    let ray = trace_ray(&poly, theta, s_hi, s_lo, options)?;
    let csv_path = output_path(&cfg, "ray.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["potential", "re", "im"])?;
    for s in &ray.samples {
        w.write_record([s.potential.to_string(), s.z.re.to_string(), s.z.im.to_string()])?;
    }
    write_bytes(&csv_path, &w.into_inner()?)?;
    let failure = ray
        .failure
        .as_ref()
        .map(|f| format!("truncated at potential {:e} (level {}): {}", f.potential, f.level, f.detail));
    let report = RayReport {
        angle: theta,
        s_hi,
        s_lo,
        sample_count: ray.samples.len(),
        orbit_type: ray.orbit_type,
        landing: ray.landing,
        landing_estimate: ray.landing_estimate,
        landing_spread: ray.landing_spread,
        failure: failure.clone(),
    };
    Envelope::new("ray", &cfg, Some(poly.fingerprint()), report).write(&sidecar_path(&csv_path))?;
    Ok(match failure {
        Some(msg) => Outcome::NumericalFailure(format!("ray {theta} {msg}")),
        None => Outcome::Done,
    })
}

#[derive(Serialize)]
struct IdentityReport {
    samples: Vec<DerivativeIdentity>,
    max_residual: f64,
    pass: bool,
}

#[derive(Serialize)]
struct PsiCheckReport {
    grid: PsiGridReport,
    identity: IdentityReport,
    distortion: DistortionReport,
}

/// Seeded `(t, n)` pairs with `Im(t) >= MIN_IDENTITY_IM` and `Im(d^(n-1) t) < 1/2`.
fn identity_pairs(degree: usize, count: usize, seed: u64) -> Vec<(Complex64, usize)> {
    let d = degree as f64;
    let mut n_max = 1;
    while 0.5 / d.powi(n_max as i32) > MIN_IDENTITY_IM {
        n_max += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=n_max);
            let top = 0.5 / d.powi(n as i32 - 1);
            let im = rng.gen_range(MIN_IDENTITY_IM..top);
            (Complex64::new(rng.gen_range(0.0..1.0), im), n)
        })
        .collect()
}

pub fn psi_check(cfg: &RunConfig) -> Result<Outcome> {
    let (text, poly) = polynomial(cfg)?;
    let grid = cfg.grid.clone().unwrap_or_else(|| "16x16".into());
    let (cols, rows) = parse_grid(&grid)?;
    let im_min = positive(cfg.im_min.unwrap_or(MIN_IDENTITY_IM), "im-min")?;
    let im_max = positive(cfg.im_max.unwrap_or(0.5), "im-max")?;
    let cfg = RunConfig {
        poly: Some(text),
        grid: Some(format!("{cols}x{rows}")),
        im_min: Some(im_min),
        im_max: Some(im_max),
        identity_samples: Some(at_least(cfg.identity_samples.unwrap_or(DEFAULT_IDENTITY_SAMPLES), 1, "identity-samples")?),
        distortion_samples: Some(cfg.distortion_samples.unwrap_or(DEFAULT_DISTORTION_SAMPLES)),
        seed: Some(cfg.seed.unwrap_or(DEFAULT_SEED)),
        out: cfg.out.clone(),
        ..Default::default()
    };
    let seed = cfg.seed.unwrap();
    let grid = psi_check_grid(&poly, cols, rows, (im_min, im_max))?;
    let samples = identity_pairs(poly.degree(), cfg.identity_samples.unwrap(), seed)
        .into_iter()
        .map(|(t, n)| verify_derivative_identity(&poly, t, n))
        .collect::<julialab_core::Result<Vec<_>>>()?;
    let identity = IdentityReport {
        max_residual: samples.iter().map(|s| s.residual).fold(0.0, f64::max),
        pass: samples.iter().all(|s| s.pass),
        samples,
    };
    let distortion = distortion_probe(&poly, cfg.distortion_samples.unwrap(), seed)?;
    let report = PsiCheckReport {
        grid,
        identity,
        distortion,
    };
    let path = output_path(&cfg, "psi-check.json");
    Envelope::new("psi-check", &cfg, Some(poly.fingerprint()), report)
        .seed("identity", seed)
        .seed("distortion", seed)
        .write(&path)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct LyapunovReport {
    #[serde(flatten)]
    estimate: ErgodicEstimate,
    ruelle: RuelleVerdict,
    z0: ComplexPoint,
    burn: usize,
}

pub fn lyapunov(cfg: &RunConfig) -> Result<Outcome> {
    let (text, poly) = polynomial(cfg)?;
    let z0 = match &cfg.z0 {
        Some(t) => point(t, "z0")?,
        None => default_base_point(&poly),
    };
    let cfg = RunConfig {
        poly: Some(text),
        z0: Some(point_text(z0)),
        burn: Some(cfg.burn.unwrap_or(DEFAULT_BURN)),
        samples: Some(cfg.samples.unwrap_or(DEFAULT_SAMPLES)),
        seed: Some(cfg.seed.unwrap_or(DEFAULT_SEED)),
        out: cfg.out.clone(),
        ..Default::default()
    };
    let seed = cfg.seed.unwrap();
    let burn = cfg.burn.unwrap();
    let samples = brolin_sample(&poly, z0, burn, cfg.samples.unwrap(), seed)?;
    let estimate = lyapunov_estimate(&poly, &samples, Some(seed))?;
    let report = LyapunovReport {
        ruelle: ruelle_check(&estimate),
        estimate,
        z0,
        burn,
    };
    let path = output_path(&cfg, "ergodic.json");
    Envelope::new("lyapunov", &cfg, Some(poly.fingerprint()), report)
        .seed("sampler", seed)
        .write(&path)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct PeriodSummary {
    period: usize,
    root_count: usize,
    distinct_roots: usize,
    multiplicity_defect: usize,
    orbit_count: usize,
    lambda_min: Option<f64>,
}

#[derive(Serialize)]
struct ClassifiedCycle {
    #[serde(flatten)]
    cycle: IndifferentCycle,
    rotation: RotationData,
}

#[derive(Serialize)]
struct ClassifyReport {
    periods: Vec<PeriodSummary>,
    failure: Option<SpectrumFailure>,
    indifferent: Vec<ClassifiedCycle>,
    scan: ScanReport,
}

fn brjuno_depth(cfg: &RunConfig) -> Result<usize> {
    let depth = cfg.depth.unwrap_or(DEFAULT_BRJUNO_DEPTH);
    if depth > julialab_core::classify::MAX_DEPTH {
        bail!("--depth must be at most {}, got {depth}", julialab_core::classify::MAX_DEPTH);
    }
    Ok(depth)
}

pub fn classify(cfg: &RunConfig) -> Result<Outcome> {
    let depth = brjuno_depth(cfg)?;
    let cfg = RunConfig {
        depth: Some(depth),
        ..resolve_spectrum(cfg)?
    };
    let (_, poly) = polynomial(&cfg)?;
    let spectrum = multiplier_spectrum(&poly, cfg.nmax.unwrap(), &spectrum_options(&cfg)?)?;
    let indifferent = indifferent_cycles(&spectrum)
        .into_iter()
        .map(|cycle| {
            let alpha = RotationNumber::Float(cycle.rotation_number);
            Ok(ClassifiedCycle {
                rotation: brjuno_data(&alpha, depth, BrjunoRule::default())?,
                cycle,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = ClassifyReport {
        periods: spectrum
            .periods
            .iter()
            .map(|p| PeriodSummary {
                period: p.period,
                root_count: p.root_count,
                distinct_roots: p.distinct_roots,
                multiplicity_defect: p.multiplicity_defect,
                orbit_count: p.orbits.len(),
                lambda_min: p.lambda_min,
            })
            .collect(),
        failure: spectrum.failure.clone(),
        indifferent,
        scan: small_multiplier_scan(&spectrum, cfg.epsilon.unwrap())?,
    };
    let path = output_path(&cfg, "classify.json");
    Envelope::new("classify", &cfg, Some(poly.fingerprint()), report).write(&path)?;
    Ok(failure_outcome(&spectrum.failure))
}

pub fn brjuno(cfg: &RunConfig) -> Result<Outcome> {
    let text = require(&cfg.alpha, "alpha")?;
    let alpha: RotationNumber = text.parse().with_context(|| format!("--alpha {text:?}"))?;
    let cfg = RunConfig {
        alpha: Some(text),
        depth: Some(brjuno_depth(cfg)?),
        out: cfg.out.clone(),
        ..Default::default()
    };
    let data = brjuno_data(&alpha, cfg.depth.unwrap(), BrjunoRule::default())?;
    let path = output_path(&cfg, "brjuno.json");
    Envelope::new("brjuno", &cfg, None, data).write(&path)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct RayOverlaySummary {
    angle: Angle,
    samples: usize,
    landing: Option<ComplexPoint>,
    landing_estimate: Option<ComplexPoint>,
    failure: Option<String>,
}

#[derive(Serialize)]
struct RenderReport {
    image: ImageSpec,
    png_sha256: String,
    png_bytes: usize,
    rays: Vec<RayOverlaySummary>,
    overlays: Vec<LoadedOverlay>,
}

pub fn encode_png(raster: &julialab_core::render::Raster) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    PngEncoder::new(&mut buf).write_image(
        &raster.pixels,
        raster.width as u32,
        raster.height as u32,
        ExtendedColorType::Rgb8,
    )?;
    Ok(buf)
}

pub fn render(cfg: &RunConfig) -> Result<Outcome> {
    let (text, poly) = polynomial(cfg)?;
    let mode_text = cfg.mode.clone().unwrap_or_else(|| "escape-time".into());
    let mode: ColorMode = mode_text.parse()?;
    let center = match &cfg.center {
        Some(t) => point(t, "center")?,
        None => Complex64::new(0.0, 0.0),
    };
    let spec = ImageSpec {
        center,
        width: positive(cfg.width.unwrap_or(DEFAULT_WIDTH), "width")?,
        resolution: cfg.res.unwrap_or(DEFAULT_RESOLUTION),
        max_iter: at_least(cfg.max_iter.unwrap_or(DEFAULT_MAX_ITER), 1, "max-iter")?,
        mode,
    };
    spec.validate()?;
    let angles = cfg
        .rays
        .clone()
        .unwrap_or_default()
        .iter()
        .map(|a| angle(a))
        .collect::<Result<Vec<_>>>()?;
    let traced = !angles.is_empty();
    let options = ray_options(cfg)?;
    let (s_hi, s_lo) = potentials(cfg)?;
    let overlay_paths: Vec<PathBuf> = cfg.overlay.clone().unwrap_or_default();
    let cfg = RunConfig {
        poly: Some(text),
        mode: Some(mode_text),
        res: Some(spec.resolution),
        center: Some(point_text(center)),
        width: Some(spec.width),
        max_iter: Some(spec.max_iter),
        rays: traced.then(|| angles.iter().map(|a| a.to_string()).collect()),
        shi: traced.then_some(s_hi),
        slo: traced.then_some(s_lo),
        levels_per_factor: traced.then_some(options.levels_per_factor),
        landing_tolerance: traced.then_some(options.landing_tolerance),
        overlay: (!overlay_paths.is_empty()).then(|| overlay_paths.clone()),
        out: cfg.out.clone(),
        ..Default::default()
    };

    let mut raster = render_julia(&poly, &spec)?;
    let mut overlays = Vec::new();
    let mut loaded = Vec::new();
    for (k, path) in overlay_paths.iter().enumerate() {
        let (shape, summary) = load_overlay(path, RAY_COLORS[(angles.len() + k) % RAY_COLORS.len()], POINT_COLOR)?;
        overlays.push(shape);
        loaded.push(summary);
    }
    let mut rays = Vec::new();
    for (k, theta) in angles.iter().enumerate() {
        let ray = trace_ray(&poly, *theta, s_hi, s_lo, options)?;
        overlays.push(Overlay::Polyline {
            points: ray.samples.iter().map(|s| s.z).collect(),
            color: RAY_COLORS[k % RAY_COLORS.len()],
        });
        rays.push(RayOverlaySummary {
            angle: *theta,
            samples: ray.samples.len(),
            landing: ray.landing,
            landing_estimate: ray.landing_estimate,
            failure: ray.failure.as_ref().map(|f| f.detail.clone()),
        });
    }
    draw_overlays(&mut raster, &spec, &overlays);
    let png = encode_png(&raster)?;
    let path = output_path(&cfg, "julia.png");
    write_bytes(&path, &png)?;
    let report = RenderReport {
        image: spec,
        png_sha256: hex::encode(Sha256::digest(&png)),
        png_bytes: png.len(),
        rays,
        overlays: loaded,
    };
    Envelope::new("render", &cfg, Some(poly.fingerprint()), report).write(&sidecar_path(&path))?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct PipelineSummary {
    c_star: f64,
    c2_star: f64,
    /// `S_N` at the deepest tree level.
    partial_sum: f64,
    depth: usize,
    verdict: SummabilityVerdict,
    growth_holds_on_tested_range: bool,
    consistent: bool,
}

#[derive(Serialize)]
struct PipelineReport<'a> {
    summary: Option<PipelineSummary>,
    spectrum: &'a MultiplierSpectrum,
    tree: Option<TreeSummary>,
    summability: Option<SummabilityReport>,
    cross: Option<CrossReport>,
}

pub fn pipeline(cfg: &RunConfig) -> Result<Outcome> {
    let spectrum_cfg = resolve_spectrum(cfg)?;
    let (_, poly) = polynomial(&spectrum_cfg)?;
    let nmax = spectrum_cfg.nmax.unwrap();
    let (tree_cfg, w0) = resolve_tree(cfg, &poly, nmax)?;
    let cfg = RunConfig {
        w0: tree_cfg.w0,
        depth: tree_cfg.depth,
        ..spectrum_cfg
    };
    let epsilon = cfg.epsilon.unwrap();
    let options = spectrum_options(&cfg)?;
    let spectrum = multiplier_spectrum(&poly, nmax, &options)?;
    let path = output_path(&cfg, "pipeline.json");
    if spectrum.failure.is_some() {
        let report = PipelineReport {
            summary: None,
            spectrum: &spectrum,
            tree: None,
            summability: None,
            cross: None,
        };
        Envelope::new("pipeline", &cfg, Some(poly.fingerprint()), report).write(&path)?;
        return Ok(failure_outcome(&spectrum.failure));
    }
    let tree = build_tree(&poly, w0, cfg.depth.unwrap(), options.budget)?;
    let summability = summability_report(&tree)?;
    let cross = theorem_pipeline_report(&spectrum, &tree, epsilon)?;
    let summary = PipelineSummary {
        c_star: cross.growth.c_star,
        c2_star: cross.c2_star,
        partial_sum: *summability.partial_sums.last().unwrap(),
        depth: cfg.depth.unwrap(),
        verdict: summability.verdict,
        growth_holds_on_tested_range: cross.growth.holds_on_tested_range,
        consistent: cross.consistent,
    };
    let report = PipelineReport {
        summary: Some(summary),
        spectrum: &spectrum,
        tree: Some(TreeSummary::of(&tree)),
        summability: Some(summability),
        cross: Some(cross),
    };
    Envelope::new("pipeline", &cfg, Some(poly.fingerprint()), report).write(&path)?;
    Ok(Outcome::Done)
}
