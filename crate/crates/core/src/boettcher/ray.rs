use super::{Angle, Boettcher, RayAngle, FAR_POTENTIAL};
use crate::error::{Error, Result};
use crate::numeric::cdiv;
use crate::poly::{ComplexPoint, Polynomial};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayOptions {
    /// Geometric potential levels per factor-of-`d` descent.
    pub levels_per_factor: usize,
    /// Newton corrections per level.
    pub max_corrections: usize,
    /// Corrections allowed at the last level.
    pub final_corrections: usize,
    /// Admissible Böttcher angle error, in turns.
    pub angle_tolerance: f64,
    /// Extrapolated landing estimates must agree this closely.
    pub landing_tolerance: f64,
}

impl Default for RayOptions {
    fn default() -> Self {
        Self {
            levels_per_factor: 64,
            max_corrections: 5,
            final_corrections: 40,
            angle_tolerance: 1e-6,
            landing_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub potential: f64,
    pub z: ComplexPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFailure {
    pub potential: f64,
    pub level: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalRay {
    pub angle: Angle,
    /// Strictly decreasing potentials, from `s_hi` down to `s_lo`.
    pub samples: Vec<RaySample>,
    /// Extrapolated landing point; `None` means undecided.
    pub landing: Option<ComplexPoint>,
    /// Best extrapolation even when undecided.
    pub landing_estimate: Option<ComplexPoint>,
    /// Distance between the last two extrapolations.
    pub landing_spread: Option<f64>,
    /// `(preperiod, period)` of the angle under multiplication by `d`.
    pub orbit_type: (usize, usize),
    /// Set when the trace was cut short.
    pub failure: Option<RayFailure>,
}

/// Continuation state at one potential level.
#[derive(Debug, Clone, Copy)]
struct LevelState {
    potential: f64,
    z: Complex64,
    /// `dz/ds` along the ray.
    tangent: Complex64,
}

pub(crate) struct Tracer<'b, 'a> {
    pub b: &'b Boettcher<'a>,
    pub angle: RayAngle,
    pub options: RayOptions,
}

impl<'b, 'a> Tracer<'b, 'a> {
    fn degree(&self) -> usize {
        self.b.poly.degree()
    }

    /// Smallest `n` with `d^n s >= FAR_POTENTIAL`.
    fn lift(&self, s: f64) -> usize {
        let d = self.b.degree();
        let mut n = 0;
        let mut lifted = s;
        while lifted < FAR_POTENTIAL {
            lifted *= d;
            n += 1;
        }
        n
    }

    /// Solves for the ray point at potential `s` from the guess `z`.
    fn solve(&self, s: f64, mut z: Complex64, corrections: usize, tight: bool) -> std::result::Result<LevelState, String> {
        let n = self.lift(s);
        let scale = self.b.degree().powi(n as i32);
        let theta = self.angle.multiplied_turns(self.degree(), n);
        let target = Complex64::new(scale * s, TAU * theta);
        for _ in 0..corrections {
            let (step, _, _, _) = self.b.level_step(z, n, target).ok_or("orbit overflow or critical point")?;
            z -= step;
            let tol = if tight { 4.0 * f64::EPSILON } else { 1e-13 };
            if step.norm() <= tol * (1.0 + z.norm()) {
                break;
            }
        }
        let (_, residual, u, g) = self.b.level_step(z, n, target).ok_or("orbit overflow or critical point")?;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err("non-finite iterate".into());
        }
        // residual is measured in ln phi(P^n z); rescale to turns at z
        let turns = residual / (TAU * scale);
        if turns > self.options.angle_tolerance {
            return Err(format!("Newton correction left an angle error of {turns:e} turns"));
        }
        Ok(LevelState {
            potential: s,
            z,
            tangent: cdiv(u * scale, g),
        })
    }

    /// Potential of level `i` above `s_lo`.
    fn level(&self, s_lo: f64, i: usize) -> f64 {
        s_lo * self.b.degree().powf(i as f64 / self.options.levels_per_factor as f64)
    }

    /// Traces down to `s_lo`, calling `visit(i, state)` at every level `i`
    /// (level 0 is `s_lo`). Returns the failing level on breakdown.
    fn run(&self, s_lo: f64, mut visit: impl FnMut(usize, Complex64)) -> std::result::Result<Complex64, RayFailure> {
        let l = self.options.levels_per_factor as f64;
        let top = if s_lo >= FAR_POTENTIAL {
            0
        } else {
            (l * (FAR_POTENTIAL / s_lo).ln() / self.b.degree().ln()).ceil() as usize
        };
        let fail = |i: usize, detail: String| RayFailure {
            potential: self.level(s_lo, i),
            level: i,
            detail,
        };
        let s_top = self.level(s_lo, top);
        let guess = self
            .b
            .inverse_far_guess(Complex64::new(s_top, TAU * self.angle.turns()));
        let mut state = self
            .solve(s_top, guess, self.options.final_corrections, top == 0)
            .map_err(|e| fail(top, e))?;
        visit(top, state.z);
        for i in (0..top).rev() {
            let s = self.level(s_lo, i);
            let predicted = state.z + state.tangent * (s - state.potential);
            let corrections = if i == 0 {
                self.options.final_corrections
            } else {
                self.options.max_corrections
            };
            state = self.solve(s, predicted, corrections, i == 0).map_err(|e| fail(i, e))?;
            visit(i, state.z);
        }
        Ok(state.z)
    }
}

/// Point of the ray of angle `angle` at potential `s`.
pub(crate) fn ray_point(b: &Boettcher<'_>, angle: RayAngle, s: f64) -> Result<ComplexPoint> {
    let tracer = Tracer {
        b,
        angle,
        options: RayOptions::default(),
    };
    tracer.run(s, |_, _| {}).map_err(|f| Error::RayTracing {
        potential: f.potential,
        detail: f.detail,
    })
}

/// Aitken's delta-squared transform of a complex sequence.
fn aitken(xs: &[Complex64]) -> Vec<Complex64> {
    xs.windows(3)
        .map(|w| {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            let dd = d2 - d1;
            if dd.norm() <= 1e-14 * (1.0 + w[2].norm()) {
                w[2]
            } else {
                w[2] - cdiv(d2 * d2, dd)
            }
        })
        .collect()
}

/// Landing estimate from samples spaced by one period of the angle.
/// Returns `(estimate, spread)`.
fn extrapolate(points: &[Complex64]) -> Option<(Complex64, f64)> {
    if points.len() < 3 {
        return None;
    }
    let mut seq = points.to_vec();
    let mut best = (seq[seq.len() - 1], (seq[seq.len() - 1] - seq[seq.len() - 2]).norm());
    while seq.len() >= 3 {
        let next = aitken(&seq);
        let spread = if next.len() >= 2 {
            (next[next.len() - 1] - next[next.len() - 2]).norm()
        } else {
            f64::INFINITY
        };
        if next.len() >= 2 && spread <= best.1 {
            best = (next[next.len() - 1], spread);
        }
        seq = next;
    }
    Some(best)
}

/// Number of period-spaced samples fed to the landing extrapolation.
const LANDING_POINTS: usize = 7;

/// Traces the external ray of angle `angle` from potential `s_hi` down to `s_lo`.
pub fn trace_ray(poly: &Polynomial, angle: Angle, s_hi: f64, s_lo: f64, options: RayOptions) -> Result<ExternalRay> {
    if !(s_lo > 0.0 && s_hi > s_lo) {
        return Err(Error::Precondition(format!(
            "need s_hi > s_lo > 0, got s_hi = {s_hi}, s_lo = {s_lo}"
        )));
    }
    if options.levels_per_factor == 0 {
        return Err(Error::Precondition("levels per factor must be positive".into()));
    }
    let b = Boettcher::new(poly);
    let tracer = Tracer {
        b: &b,
        angle: RayAngle::Rational(angle),
        options,
    };
    let d = poly.degree();
    let orbit_type = angle.orbit_type(d);
    let spacing = orbit_type.1 * options.levels_per_factor;

    let mut all: Vec<(usize, Complex64)> = Vec::new();
    let outcome = tracer.run(s_lo, |i, z| all.push((i, z)));
    let samples: Vec<RaySample> = all
        .iter()
        .map(|&(i, z)| RaySample {
            potential: tracer.level(s_lo, i),
            z,
        })
        .filter(|s| s.potential <= s_hi * (1.0 + 1e-12))
        .collect();

    let mut ray = ExternalRay {
        angle,
        samples,
        landing: None,
        landing_estimate: None,
        landing_spread: None,
        orbit_type,
        failure: None,
    };
    match outcome {
        Err(f) => ray.failure = Some(f),
        Ok(_) => {
            // all[k] holds level top - k; pick levels 0, spacing, 2 spacing, ...
            let top = all[0].0;
            let mut picked: Vec<Complex64> = (0..LANDING_POINTS)
                .map(|j| j * spacing)
                .take_while(|&i| i <= top && tracer.level(s_lo, i) <= 1.0)
                .map(|i| all[top - i].1)
                .collect();
            picked.reverse();
            if let Some((estimate, spread)) = extrapolate(&picked) {
                ray.landing_estimate = Some(estimate);
                ray.landing_spread = Some(spread);
                if spread <= options.landing_tolerance {
                    ray.landing = Some(estimate);
                }
            }
        }
    }
    Ok(ray)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_ray_zero_is_the_real_axis() {
        let p: Polynomial = "z^2".parse().unwrap();
        let ray = trace_ray(&p, Angle::zero(), 2.0, 1e-6, RayOptions::default()).unwrap();
        assert!(ray.failure.is_none());
        for s in &ray.samples {
            assert!((s.z - Complex64::new(s.potential.exp(), 0.0)).norm() < 1e-12 * s.z.norm());
        }
        let landing = ray.landing.expect("decided");
        assert!((landing - 1.0).norm() < 1e-9);
        let pot: Vec<f64> = ray.samples.iter().map(|s| s.potential).collect();
        assert!(pot.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn aitken_is_exact_on_geometric_sequences() {
        let z = Complex64::new(0.3, -0.2);
        let r = Complex64::new(0.4, 0.3);
        let xs: Vec<Complex64> = (0..5).map(|j| z + r.powu(j) * 2.0).collect();
        let (est, _) = extrapolate(&xs).unwrap();
        assert!((est - z).norm() < 1e-14);
    }
}
