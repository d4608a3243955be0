use super::ray::ray_point;
use super::{Boettcher, RayAngle};
use crate::error::{Error, Result};
use crate::orbit::iterate_value_and_derivative;
use crate::poly::{ComplexPoint, Polynomial};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Smallest admissible `Im(t)` for direct evaluation of `psi`.
pub const PSI_T_MIN: f64 = 0.02;
/// Smallest `Im(t)` accepted by the derivative identity check.
pub const MIN_IDENTITY_IM: f64 = 0.05;
/// `2pi Im(d^n t)` must stay below this for `exp` to remain finite.
const POTENTIAL_LIMIT: f64 = 300.0;

fn angle_of(t: Complex64) -> RayAngle {
    let theta = (-t.re).rem_euclid(1.0);
    // rem_euclid can round up to exactly 1
    RayAngle::Real(if theta >= 1.0 { 0.0 } else { theta })
}

fn psi_unchecked(b: &Boettcher<'_>, t: Complex64) -> Result<ComplexPoint> {
    ray_point(b, angle_of(t), TAU * t.im)
}

/// The covering map `psi` of the upper half plane onto the basin of infinity.
pub fn psi(poly: &Polynomial, t: Complex64) -> Result<ComplexPoint> {
    if !(t.im >= PSI_T_MIN) {
        return Err(Error::BelowMinimumPotential {
            im: t.im,
            min: PSI_T_MIN,
        });
    }
    psi_unchecked(&Boettcher::new(poly), t)
}

fn central_difference(b: &Boettcher<'_>, t: Complex64, h: f64) -> Result<Complex64> {
    let plus = psi_unchecked(b, t + h)?;
    let minus = psi_unchecked(b, t - h)?;
    Ok((plus - minus) / (2.0 * h))
}

/// `psi'(t)` by central differences along the real direction with step
/// `1e-5 Im(t)`, checked against the half step.
pub fn psi_derivative(poly: &Polynomial, t: Complex64) -> Result<Complex64> {
    if !(t.im >= PSI_T_MIN) {
        return Err(Error::BelowMinimumPotential {
            im: t.im,
            min: PSI_T_MIN,
        });
    }
    let b = Boettcher::new(poly);
    derivative_checked(&b, t)
}

fn derivative_checked(b: &Boettcher<'_>, t: Complex64) -> Result<Complex64> {
    let h = 1e-5 * t.im;
    let full = central_difference(b, t, h)?;
    let half = central_difference(b, t, 0.5 * h)?;
    let gap = (full - half).norm() / full.norm();
    if !(gap <= 1e-6) {
        return Err(Error::FiniteDifference(format!(
            "step-halving disagreement {gap:e} at t = {t}"
        )));
    }
    Ok(full)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeIdentity {
    pub t: Complex64,
    pub n: usize,
    /// `(P^n)'(psi(t)) psi'(t)`.
    pub lhs: Complex64,
    /// `d^n psi'(d^n t)`.
    pub rhs: Complex64,
    pub residual: f64,
    pub pass: bool,
}

/// Relative residual of `(P^n)'(psi(t)) psi'(t) = d^n psi'(d^n t)`.
pub fn verify_derivative_identity(poly: &Polynomial, t: Complex64, n: usize) -> Result<DerivativeIdentity> {
    if !(t.im >= MIN_IDENTITY_IM) {
        return Err(Error::Precondition(format!(
            "identity check needs Im(t) >= {MIN_IDENTITY_IM}, got {}",
            t.im
        )));
    }
    let d = poly.degree() as f64;
    let scale = d.powi(n as i32);
    let lifted_im = scale * t.im;
    let limit = POTENTIAL_LIMIT / TAU;
    if lifted_im > limit {
        return Err(Error::OverflowRange {
            value: lifted_im,
            limit,
        });
    }
    let b = Boettcher::new(poly);
    let z = psi_unchecked(&b, t)?;
    let (_, dpn) = iterate_value_and_derivative(poly, z, n);
    let lhs = dpn * derivative_checked(&b, t)?;
    let rhs = derivative_checked(&b, t * scale)? * scale;
    let residual = (lhs - rhs).norm() / rhs.norm();
    Ok(DerivativeIdentity {
        t,
        n,
        lhs,
        rhs,
        residual,
        pass: residual <= 1e-4,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiResidual {
    pub t: Complex64,
    pub psi: ComplexPoint,
    /// `|P(psi(t)) - psi(d t)| / (1 + |psi(d t)|)`.
    pub residual: f64,
    /// `psi(t + 1)` is bit-identical to `psi(t)`.
    pub deck_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiGridReport {
    pub columns: usize,
    pub rows: usize,
    pub im_range: (f64, f64),
    pub entries: Vec<PsiResidual>,
    pub max_residual: f64,
    pub deck_exact: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// Functional-equation and deck-periodicity residuals on the grid
/// `Re(t) = j / columns`, `Im(t)` evenly spaced in `im_range`.
pub fn psi_check_grid(poly: &Polynomial, columns: usize, rows: usize, im_range: (f64, f64)) -> Result<PsiGridReport> {
    if columns == 0 || rows < 2 {
        return Err(Error::Precondition("grid needs at least 1 column and 2 rows".into()));
    }
    if !(im_range.0 >= PSI_T_MIN && im_range.1 > im_range.0) {
        return Err(Error::Precondition(format!("bad Im range {:?}", im_range)));
    }
    let b = Boettcher::new(poly);
    let d = poly.degree() as f64;
    let grid: Vec<Complex64> = (0..rows)
        .flat_map(|k| {
            let im = im_range.0 + (im_range.1 - im_range.0) * k as f64 / (rows - 1) as f64;
            (0..columns).map(move |j| Complex64::new(j as f64 / columns as f64, im))
        })
        .collect();
    let entries: Vec<PsiResidual> = grid
        .par_iter()
        .map(|&t| {
            let z = psi_unchecked(&b, t)?;
            let image = psi_unchecked(&b, t * d)?;
            let shifted = psi_unchecked(&b, t + 1.0)?;
            Ok(PsiResidual {
                t,
                psi: z,
                residual: (poly.eval(z) - image).norm() / (1.0 + image.norm()),
                deck_exact: shifted == z,
            })
        })
        .collect::<Result<_>>()?;
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    let deck_exact = entries.iter().all(|e| e.deck_exact);
    let tolerance = 1e-6;
    Ok(PsiGridReport {
        columns,
        rows,
        im_range,
        max_residual,
        deck_exact,
        tolerance,
        pass: deck_exact && max_residual < tolerance,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    /// `max ratio * (h/s)^4` over the accepted pairs.
    pub d_hat: f64,
    pub t: Complex64,
    pub t_prime: Complex64,
    /// `|psi'(t)| / |psi'(t')|` at the attaining pair.
    pub ratio: f64,
    pub samples: usize,
    /// Proposals with `s > 1/2` that were discarded.
    pub rejected: usize,
    pub seed: u64,
}

/// Empirical constant in `|psi'(t)| / |psi'(t')| <= D (s/h)^4` for pairs at
/// common height `h = Im t = Im t'` and distance `h <= s = |t - t'| <= 1/2`.
pub fn distortion_probe(poly: &Polynomial, samples: usize, seed: u64) -> Result<DistortionReport> {
    if samples < 100 {
        return Err(Error::Precondition(format!("distortion probe needs >= 100 samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(samples);
    let mut rejected = 0;
    while pairs.len() < samples {
        let h: f64 = rng.gen_range(PSI_T_MIN..0.5);
        let s: f64 = rng.gen_range(h..0.75);
        let x: f64 = rng.gen_range(0.0..1.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        if s > 0.5 {
            rejected += 1;
            continue;
        }
        let t = Complex64::new(x, h);
        pairs.push((t, t + sign * s, h, s));
    }
    let b = Boettcher::new(poly);
    let values: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(t, tp, h, s)| {
            let a = central_difference(&b, t, 1e-5 * h)?.norm();
            let c = central_difference(&b, tp, 1e-5 * h)?.norm();
            let ratio = a / c;
            Ok((ratio * (h / s).powi(4), ratio))
        })
        .collect::<Result<_>>()?;
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v.0 > acc.1 { (k, v.0) } else { acc });
    Ok(DistortionReport {
        d_hat: values[best].0,
        t: pairs[best].0,
        t_prime: pairs[best].1,
        ratio: values[best].1,
        samples,
        rejected,
        seed,
    })
}
