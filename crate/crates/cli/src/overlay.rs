//! Overlays read back from earlier report files.
//!
//! `ray.csv` tables become polylines; `tree.csv` tables, spectrum, classify
//! and pipeline reports become periodic or preimage point markers; a ray
//! report contributes its landing point.

use anyhow::{bail, Context, Result};
use julialab_core::render::Overlay;
use julialab_core::ComplexPoint;
use serde::Serialize;
use serde_json::Value;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct LoadedOverlay {
    pub path: PathBuf,
    pub kind: &'static str,
    pub points: usize,
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn load_csv(path: &Path) -> Result<(bool, Vec<ComplexPoint>)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let (Some(re), Some(im)) = (column(&headers, "re"), column(&headers, "im")) else {
        bail!("{}: CSV overlay needs `re` and `im` columns", path.display());
    };
    let is_ray = column(&headers, "potential").is_some();
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let x: f64 = record[re].trim().parse().with_context(|| format!("{}: bad re", path.display()))?;
        let y: f64 = record[im].trim().parse().with_context(|| format!("{}: bad im", path.display()))?;
        points.push(ComplexPoint::new(x, y));
    }
    Ok((is_ray, points))
}

fn pair(v: &Value) -> Option<ComplexPoint> {
    let a = v.as_array()?;
    Some(ComplexPoint::new(a.first()?.as_f64()?, a.get(1)?.as_f64()?))
}

fn orbit_points(periods: &Value, out: &mut Vec<ComplexPoint>) {
    for period in periods.as_array().into_iter().flatten() {
        for orbit in period["orbits"].as_array().into_iter().flatten() {
            out.extend(orbit["points"].as_array().into_iter().flatten().filter_map(pair));
        }
    }
}

fn load_json(path: &Path) -> Result<Vec<ComplexPoint>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let report = &doc["report"];
    let mut points = Vec::new();
    match doc["command"].as_str() {
        Some("spectrum") => orbit_points(&report["periods"], &mut points),
        Some("pipeline") => orbit_points(&report["spectrum"]["periods"], &mut points),
        Some("classify") => {
            for c in report["indifferent"].as_array().into_iter().flatten() {
                points.extend(c["orbit"]["points"].as_array().into_iter().flatten().filter_map(pair));
            }
        }
        Some("ray") => points.extend(pair(&report["landing"])),
        other => bail!("{}: no overlay for report type {other:?}", path.display()),
    }
    Ok(points)
}

/// Overlay shape for one file plus a record of what was drawn.
pub fn load_overlay(path: &Path, line_color: [u8; 3], point_color: [u8; 3]) -> Result<(Overlay, LoadedOverlay)> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (overlay, kind) = if is_json {
        let points = load_json(path)?;
        (
            Overlay::Points {
                points,
                color: point_color,
                radius: 1,
            },
            "points",
        )
    } else {
        match load_csv(path)? {
            (true, points) => (
                Overlay::Polyline {
                    points,
                    color: line_color,
                },
                "polyline",
            ),
            (false, points) => (
                Overlay::Points {
                    points,
                    color: point_color,
                    radius: 0,
                },
                "points",
            ),
        }
    };
    let count = match &overlay {
        Overlay::Polyline { points, .. } | Overlay::Points { points, .. } => points.len(),
    };
    Ok((
        overlay,
        LoadedOverlay {
            path: path.to_path_buf(),
            kind,
            points: count,
        },
    ))
}
