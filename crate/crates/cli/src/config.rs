//! Run configuration shared by the config file and the command-line flags.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Every parameter any subcommand accepts. The config file uses this schema
/// directly; flags given on the command line override file values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indifference_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_escalation: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels_per_factor: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landing_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub res: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rays: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlay: Option<Vec<PathBuf>>,
    /// Output file. Not part of the embedded config: where a report is
    /// written does not change what it contains.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// `self` with every value set in `flags` replaced by the flag value.
    pub fn overridden_by(mut self, flags: &RunConfig) -> Self {
        overlay_fields!(
            self, flags, poly, nmax, epsilon, budget, indifference_tolerance, precision_escalation, w0, depth,
            angle, shi, slo, levels_per_factor, landing_tolerance, grid, im_min, im_max, identity_samples,
            distortion_samples, samples, burn, seed, z0, alpha, mode, res, center, width, max_iter, rays,
            overlay, out
        );
        self
    }

    /// The copy embedded in reports.
    pub fn for_report(&self) -> Self {
        Self {
            out: None,
            ..self.clone()
        }
    }
}

pub fn require<T: Clone>(value: &Option<T>, flag: &str) -> Result<T> {
    match value {
        Some(v) => Ok(v.clone()),
        None => bail!("missing required --{flag}"),
    }
}

pub fn positive(value: f64, flag: &str) -> Result<f64> {
    if !(value > 0.0 && value.is_finite()) {
        bail!("--{flag} must be positive, got {value}");
    }
    Ok(value)
}

pub fn at_least(value: usize, min: usize, flag: &str) -> Result<usize> {
    if value < min {
        bail!("--{flag} must be at least {min}, got {value}");
    }
    Ok(value)
}

/// `COLSxROWS`, e.g. `16x16`.
pub fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .with_context(|| format!("grid must look like 16x16, got {text:?}"))?;
    let cols = a.trim().parse().with_context(|| format!("bad grid columns in {text:?}"))?;
    let rows = b.trim().parse().with_context(|| format!("bad grid rows in {text:?}"))?;
    Ok((cols, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = RunConfig {
            poly: Some("z^2".into()),
            nmax: Some(4),
            seed: Some(1),
            ..Default::default()
        };
        let flags = RunConfig {
            nmax: Some(8),
            ..Default::default()
        };
        let merged = file.overridden_by(&flags);
        assert_eq!(merged.nmax, Some(8));
        assert_eq!(merged.seed, Some(1));
        assert_eq!(merged.poly.as_deref(), Some("z^2"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = RunConfig {
            poly: Some("[-2, 0, 1]".into()),
            epsilon: Some(0.1),
            slo: Some(1e-10),
            im_min: Some(0.05000000000000001),
            rays: Some(vec!["1/3".into(), "2/3".into()]),
            precision_escalation: Some(false),
            ..Default::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"polly": "z^2"}"#).is_err());
    }

    #[test]
    fn grids_parse() {
        assert_eq!(parse_grid("16x8").unwrap(), (16, 8));
        assert!(parse_grid("16").is_err());
    }
}
