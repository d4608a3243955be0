//! Command-line front end for `julialab-core`.
//!
//! Every subcommand reads its parameters from flags, optionally layered over
//! a JSON config file (`--config`, same keys as the long flags), and writes
//! JSON reports, CSV point tables or PNG images. Exit status: 0 success,
//! 1 usage error, 2 invalid input, 3 numerical failure.

pub mod commands;
pub mod config;
pub mod overlay;
pub mod report;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use commands::Outcome;
use config::RunConfig;
use std::ffi::OsString;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "julialab", version, about = "Dynamics diagnostics for complex polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file with the same keys as the long flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: under $JULIALAB_OUT_DIR or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PolyArg {
    /// `z^d+c` shorthand or ascending coefficients, e.g. `[-2, 0, 1]`.
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
}

#[derive(Debug, Args)]
struct SpectrumFlags {
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Largest `d^n` attempted.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    indifference_tolerance: Option<f64>,
    #[arg(long)]
    precision_escalation: Option<bool>,
}

#[derive(Debug, Args)]
struct RayFlags {
    #[arg(long, allow_hyphen_values = true)]
    shi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    slo: Option<f64>,
    #[arg(long)]
    levels_per_factor: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    landing_tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct SpectrumCmd {
    #[command(flatten)]
    poly: PolyArg,
    #[command(flatten)]
    spectrum: SpectrumFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct TreeCmd {
    #[command(flatten)]
    poly: PolyArg,
    /// Base point `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    w0: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RayCmd {
    #[command(flatten)]
    poly: PolyArg,
    /// Exact angle `p/q` in turns.
    #[arg(long)]
    angle: Option<String>,
    #[command(flatten)]
    ray: RayFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct PsiCheckCmd {
    #[command(flatten)]
    poly: PolyArg,
    /// `COLSxROWS`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    im_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    im_max: Option<f64>,
    #[arg(long)]
    identity_samples: Option<usize>,
    #[arg(long)]
    distortion_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct LyapunovCmd {
    #[command(flatten)]
    poly: PolyArg,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    burn: Option<usize>,
    /// Starting point `re,im` of the backward orbit.
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ClassifyCmd {
    #[command(flatten)]
    poly: PolyArg,
    #[command(flatten)]
    spectrum: SpectrumFlags,
    /// Continued-fraction depth for each indifferent cycle.
    #[arg(long)]
    depth: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct BrjunoCmd {
    /// `golden`, `silver`, `liouville:N`, `surd:P,D,Q`, `p/q` or a decimal.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RenderCmd {
    #[command(flatten)]
    poly: PolyArg,
    /// `escape-time`, `distance-estimate` or `binary`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    res: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    width: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Ray angles to trace and draw, comma separated.
    #[arg(long, value_delimiter = ',')]
    rays: Option<Vec<String>>,
    /// Earlier ray/tree CSV or spectrum/ray JSON reports to draw; repeatable.
    #[arg(long)]
    overlay: Vec<PathBuf>,
    #[command(flatten)]
    ray: RayFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct PipelineCmd {
    #[command(flatten)]
    poly: PolyArg,
    #[command(flatten)]
    spectrum: SpectrumFlags,
    #[arg(long, allow_hyphen_values = true)]
    w0: Option<String>,
    /// Tree depth; defaults to `nmax`.
    #[arg(long)]
    depth: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Periodic orbits, multipliers and the growth check.
    Spectrum(SpectrumCmd),
    /// Backward orbit tree as CSV plus the summability report.
    Tree(TreeCmd),
    /// External ray as CSV plus its landing report.
    Ray(RayCmd),
    /// Residual checks for the half-plane covering map.
    PsiCheck(PsiCheckCmd),
    /// Lyapunov exponent of the balanced measure.
    Lyapunov(LyapunovCmd),
    /// Indifferent cycles and the small-multiplier scan.
    Classify(ClassifyCmd),
    /// Continued fraction and Brjuno sums of a rotation number.
    Brjuno(BrjunoCmd),
    /// PNG of the filled Julia set.
    Render(RenderCmd),
    /// Spectrum, growth, tree, summability and the combined report.
    Pipeline(PipelineCmd),
}

fn spectrum_flags(f: &SpectrumFlags) -> RunConfig {
    RunConfig {
        nmax: f.nmax,
        epsilon: f.epsilon,
        budget: f.budget,
        indifference_tolerance: f.indifference_tolerance,
        precision_escalation: f.precision_escalation,
        ..Default::default()
    }
}

fn ray_flags(f: &RayFlags) -> RunConfig {
    RunConfig {
        shi: f.shi,
        slo: f.slo,
        levels_per_factor: f.levels_per_factor,
        landing_tolerance: f.landing_tolerance,
        ..Default::default()
    }
}

type Handler = fn(&RunConfig) -> anyhow::Result<Outcome>;

impl Command {
    /// Flag values as a config overlay, the config file path and the handler.
    fn split(&self) -> (RunConfig, Option<PathBuf>, Handler) {
        let (flags, common, handler): (RunConfig, &Common, Handler) = match self {
            Command::Spectrum(c) => (
                RunConfig {
                    poly: c.poly.poly.clone(),
                    ..spectrum_flags(&c.spectrum)
                },
                &c.common,
                commands::spectrum,
            ),
            Command::Tree(c) => (
                RunConfig {
                    poly: c.poly.poly.clone(),
                    w0: c.w0.clone(),
                    depth: c.depth,
                    budget: c.budget,
                    ..Default::default()
                },
                &c.common,
                commands::tree,
            ),
            Command::Ray(c) => (
                RunConfig {
                    poly: c.poly.poly.clone(),
                    angle: c.angle.clone(),
                    ..ray_flags(&c.ray)
                },
                &c.common,
                commands::ray,
            ),
            Command::PsiCheck(c) => (
                RunConfig {
                    poly: c.poly.poly.clone(),
                    grid: c.grid.clone(),
                    im_min: c.im_min,
                    im_max: c.im_max,
                    identity_samples: c.identity_samples,
                    distortion_samples: c.distortion_samples,
                    seed: c.seed,
                    ..Default::default()
                },
                &c.common,
                commands::psi_check,
            ),
            Command::Lyapunov(c) => (
                RunConfig {
                    poly: c.poly.poly.clone(),
                    samples: c.samples,
                    seed: c.seed,
                    burn: c.burn,
                    z0: c.z0.clone(),
                    ..Default::default()
                },
                &c.common,
                commands::lyapunov,
            ),
            Command::Classify(c) => (
                RunConfig {
                    poly: c.poly.poly.clone(),
                    depth: c.depth,
                    ..spectrum_flags(&c.spectrum)
                },
                &c.common,
                commands::classify,
            ),
            Command::Brjuno(c) => (
                RunConfig {
                    alpha: c.alpha.clone(),
                    depth: c.depth,
                    ..Default::default()
                },
                &c.common,
                commands::brjuno,
            ),
            Command::Render(c) => (
                RunConfig {
                    poly: c.poly.poly.clone(),
                    mode: c.mode.clone(),
                    res: c.res,
                    center: c.center.clone(),
                    width: c.width,
                    max_iter: c.max_iter,
                    rays: c.rays.clone(),
                    overlay: (!c.overlay.is_empty()).then(|| c.overlay.clone()),
                    ..ray_flags(&c.ray)
                },
                &c.common,
                commands::render,
            ),
            Command::Pipeline(c) => (
                RunConfig {
                    poly: c.poly.poly.clone(),
                    w0: c.w0.clone(),
                    depth: c.depth,
                    ..spectrum_flags(&c.spectrum)
                },
                &c.common,
                commands::pipeline,
            ),
        };
        let flags = RunConfig {
            out: common.out.clone(),
            ..flags
        };
        (flags, common.config.clone(), handler)
    }
}

/// A core numerical failure anywhere in the chain means exit 3.
fn error_code(e: &anyhow::Error) -> i32 {
    let numerical = e
        .chain()
        .any(|c| c.downcast_ref::<julialab_core::Error>().is_some_and(|x| x.is_numerical()));
    if numerical {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::ValueValidation | ErrorKind::InvalidValue => EXIT_INVALID,
                _ => EXIT_USAGE,
            };
        }
    };
    let (flags, config_path, handler) = cli.command.split();
    let result = config_path
        .map_or_else(|| Ok(RunConfig::default()), |p| RunConfig::load(&p))
        .and_then(|file| handler(&file.overridden_by(&flags)));
    match result {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::NumericalFailure(msg)) => {
            eprintln!("julialab: numerical failure: {msg}");
            EXIT_NUMERICAL
        }
        Err(e) => {
            eprintln!("julialab: error: {e:#}");
            error_code(&e)
        }
    }
}
