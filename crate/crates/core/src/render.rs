//! Rasters of filled Julia sets with optional ray and point overlays.

use crate::boettcher::Boettcher;
use crate::error::{Error, Result};
use crate::poly::{ComplexPoint, Polynomial};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const MAX_RESOLUTION: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorMode {
    EscapeTime,
    DistanceEstimate,
    Binary,
}

impl std::str::FromStr for ColorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "escape-time" => Ok(Self::EscapeTime),
            "distance-estimate" => Ok(Self::DistanceEstimate),
            "binary" => Ok(Self::Binary),
            other => Err(Error::Parse(format!("unknown color mode `{other}`"))),
        }
    }
}

/// A square viewport sampled at pixel centers; row 0 is the top edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub center: ComplexPoint,
    pub width: f64,
    pub resolution: usize,
    pub max_iter: usize,
    pub mode: ColorMode,
}

impl ImageSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::Precondition(format!("width must be positive, got {}", self.width)));
        }
        if self.resolution == 0 || self.resolution > MAX_RESOLUTION {
            return Err(Error::Precondition(format!(
                "resolution must be in 1..={MAX_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(Error::Precondition("center must be finite".into()));
        }
        Ok(())
    }

    pub fn pixel_size(&self) -> f64 {
        self.width / self.resolution as f64
    }

    /// Plane point at the center of pixel `(col, row)`.
    pub fn point(&self, col: usize, row: usize) -> ComplexPoint {
        let half = self.resolution as f64 / 2.0;
        let h = self.pixel_size();
        ComplexPoint::new(
            self.center.re + (col as f64 + 0.5 - half) * h,
            self.center.im - (row as f64 + 0.5 - half) * h,
        )
    }

    /// Continuous pixel coordinates `(col, row)` of a plane point.
    pub fn to_pixel(&self, z: ComplexPoint) -> (f64, f64) {
        let half = self.resolution as f64 / 2.0;
        let h = self.pixel_size();
        ((z.re - self.center.re) / h + half - 0.5, (self.center.im - z.im) / h + half - 0.5)
    }
}

/// RGB raster, rows top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn get(&self, col: usize, row: usize) -> [u8; 3] {
        let k = 3 * (row * self.width + col);
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }

    fn put(&mut self, col: i64, row: i64, rgb: [u8; 3]) {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            return;
        }
        let k = 3 * (row as usize * self.width + col as usize);
        self.pixels[k..k + 3].copy_from_slice(&rgb);
    }
}

/// Interior color; every mode paints the filled set with it.
pub const INTERIOR: [u8; 3] = [0, 0, 0];
const EXTERIOR: [u8; 3] = [255, 255, 255];

fn gray(v: f64) -> [u8; 3] {
    let b = (255.0 * v.clamp(0.0, 1.0)).round() as u8;
    [b, b, b]
}

fn shade(b: &Boettcher<'_>, z: ComplexPoint, spec: &ImageSpec) -> [u8; 3] {
    let g = b.green(z, spec.max_iter);
    if g.undecided {
        return INTERIOR;
    }
    let pixel = spec.pixel_size();
    match spec.mode {
        ColorMode::Binary => {
            if g.distance_estimate() < pixel {
                INTERIOR
            } else {
                EXTERIOR
            }
        }
        ColorMode::DistanceEstimate => {
            let de = g.distance_estimate() / pixel;
            if de < 1.0 {
                INTERIOR
            } else {
                gray((de.ln() / 6.0).min(1.0).sqrt())
            }
        }
        ColorMode::EscapeTime => {
            // continuous escape count
            let nu = -g.g.ln() / b.degree().ln();
            let band = 0.5 + 0.5 * (0.35 * nu).cos();
            gray(0.25 + 0.75 * band)
        }
    }
}

/// Colors every pixel of the viewport. Undecided pixels count as interior.
pub fn render_julia(poly: &Polynomial, spec: &ImageSpec) -> Result<Raster> {
    spec.validate()?;
    let b = Boettcher::new(poly);
    let n = spec.resolution;
    let rows: Vec<Vec<u8>> = (0..n)
        .into_par_iter()
        .map(|row| (0..n).flat_map(|col| shade(&b, spec.point(col, row), spec)).collect())
        .collect();
    Ok(Raster {
        width: n,
        height: n,
        pixels: rows.concat(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Overlay {
    Polyline { points: Vec<ComplexPoint>, color: [u8; 3] },
    Points { points: Vec<ComplexPoint>, color: [u8; 3], radius: usize },
}

/// Liang-Barsky clip of a segment to `[-1, w] x [-1, h]`.
fn clip(a: (f64, f64), b: (f64, f64), (w, h): (f64, f64)) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    if !(a.0.is_finite() && a.1.is_finite() && dx.is_finite() && dy.is_finite()) {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for (p, q) in [(-dx, a.0 + 1.0), (dx, w - a.0), (-dy, a.1 + 1.0), (dy, h - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
    }
    (lo <= hi).then_some(((a.0 + lo * dx, a.1 + lo * dy), (a.0 + hi * dx, a.1 + hi * dy)))
}

/// Draws overlays in order; segments are sampled at half-pixel spacing.
pub fn draw_overlays(raster: &mut Raster, spec: &ImageSpec, overlays: &[Overlay]) {
    for overlay in overlays {
        match overlay {
            Overlay::Polyline { points, color } => {
                for pair in points.windows(2) {
                    let a = spec.to_pixel(pair[0]);
                    let b = spec.to_pixel(pair[1]);
                    let bounds = (raster.width as f64, raster.height as f64);
                    let Some(((x0, y0), (x1, y1))) = clip(a, b, bounds) else {
                        continue;
                    };
                    let len = (x1 - x0).hypot(y1 - y0);
                    let steps = (2.0 * len).ceil().max(1.0) as usize;
                    for k in 0..=steps {
                        let s = k as f64 / steps as f64;
                        raster.put(
                            (x0 + s * (x1 - x0)).round() as i64,
                            (y0 + s * (y1 - y0)).round() as i64,
                            *color,
                        );
                    }
                }
            }
            Overlay::Points { points, color, radius } => {
                let r = *radius as i64;
                for &z in points {
                    let (x, y) = spec.to_pixel(z);
                    if !(x.is_finite() && y.is_finite()) {
                        continue;
                    }
                    let (cx, cy) = (x.round() as i64, y.round() as i64);
                    for dy in -r..=r {
                        for dx in -r..=r {
                            raster.put(cx + dx, cy + dy, *color);
                        }
                    }
                }
            }
        }
    }
}
