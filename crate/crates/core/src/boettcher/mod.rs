//! Green's function, the Böttcher coordinate near infinity, external rays
//! and the half-plane covering map.
//!
//! Conventions. `phi` is the Böttcher coordinate with `phi(P(z)) = phi(z)^d`
//! and `phi(z) / z -> a_d^{1/(d-1)}` (principal root). A point has potential
//! `s = ln|phi(z)|` and angle `arg(phi(z)) / 2pi` in turns. The covering map
//! is `psi(t)` = the point of angle `-Re(t) mod 1` at potential `2pi Im(t)`,
//! so `phi(psi(t)) = exp(-2pi i t)`, `psi(t + 1) = psi(t)` and
//! `P(psi(t)) = psi(d t)`. For `z^2` this is `psi(t) = exp(-2pi i t)`.

mod angle;
mod psi;
mod ray;

pub use angle::{Angle, RayAngle};
pub use psi::{
    distortion_probe, psi, psi_check_grid, psi_derivative, verify_derivative_identity, DerivativeIdentity,
    DistortionReport, PsiGridReport, PsiResidual, MIN_IDENTITY_IM, PSI_T_MIN,
};
pub use ray::{trace_ray, ExternalRay, RayOptions, RaySample};

use crate::numeric::{cdiv, ScaledComplex};
use crate::poly::{ComplexPoint, Polynomial};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Potential above which the far-field expansion of `phi` is used directly.
pub(crate) const FAR_POTENTIAL: f64 = 40.0;

/// Default iteration cap for [`green`].
pub const GREEN_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub z: ComplexPoint,
    /// Potential; `0` when undecided.
    pub g: f64,
    pub iterations: usize,
    /// The orbit never left the escape region within the cap.
    pub undecided: bool,
    /// `|grad G(z)|`; `0` when undecided.
    pub gradient: f64,
}

impl GreenValue {
    /// `G / |grad G|`, comparable to the distance from `z` to the Julia set.
    pub fn distance_estimate(&self) -> f64 {
        if self.undecided || self.gradient == 0.0 {
            0.0
        } else {
            self.g / self.gradient
        }
    }
}

/// Far-field data for one polynomial.
#[derive(Debug, Clone)]
pub struct Boettcher<'a> {
    pub poly: &'a Polynomial,
    degree: f64,
    /// Principal `ln a_d^{1/(d-1)}`.
    log_c: Complex64,
    /// `a_i / a_d`.
    normalized: Vec<Complex64>,
    /// Radius beyond which the one-term expansion is accurate to rounding.
    far_radius: f64,
}

impl<'a> Boettcher<'a> {
    pub fn new(poly: &'a Polynomial) -> Self {
        let d = poly.degree();
        let lead = poly.leading();
        let normalized = poly.coefficients().iter().map(|a| a / lead).collect();
        Self {
            poly,
            degree: d as f64,
            log_c: lead.ln() / (d - 1) as f64,
            normalized,
            far_radius: poly.escape_radius() * 1e8,
        }
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    /// `ln(P(u) / (a_d u^d))`, evaluated in powers of `1/u`.
    fn log_ratio(&self, u: Complex64) -> Complex64 {
        let v = cdiv(Complex64::new(1.0, 0.0), u);
        let mut r = Complex64::new(0.0, 0.0);
        for a in &self.normalized {
            r = r * v + a;
        }
        r.ln()
    }

    /// `ln phi(u)` for `|u|` beyond the far radius. The imaginary part is
    /// only meaningful mod `2pi`.
    pub fn log_phi_far(&self, u: Complex64) -> Complex64 {
        // ln phi(u) = ln(c u) + sum_k d^{-k-1} ln(P(u_k)/(a_d u_k^d)); the terms
        // after the first are below rounding out here
        self.log_c + u.ln() + self.log_ratio(u) / self.degree
    }

    /// Approximate inverse of `phi` for `|zeta|` large, `zeta = exp(log_zeta)`.
    pub(crate) fn inverse_far_guess(&self, log_zeta: Complex64) -> Complex64 {
        let d = self.degree;
        let shift = self.normalized[self.normalized.len() - 2] / d;
        (log_zeta - self.log_c).exp() - shift
    }

    /// Green's function with `G(z) = ln|z| + ln|c| + o(1)` at infinity.
    pub fn green(&self, z: ComplexPoint, max_iter: usize) -> GreenValue {
        let mut u = z;
        let mut derivative = ScaledComplex::ONE;
        for k in 0..=max_iter {
            let r = u.norm();
            if r >= self.far_radius {
                let scale = self.degree.powi(-(k as i32));
                let g = self.log_phi_far(u).re * scale;
                // |d ln phi / dz| = |(P^k)'| / (|u| d^k)
                let gradient = (derivative.ln_abs() - r.ln()).exp() * scale;
                return GreenValue {
                    z,
                    g,
                    iterations: k,
                    undecided: false,
                    gradient,
                };
            }
            if k == max_iter || !r.is_finite() {
                break;
            }
            let (p, dp) = self.poly.eval_with_derivative(u);
            derivative *= dp;
            u = p;
        }
        GreenValue {
            z,
            g: 0.0,
            iterations: max_iter,
            undecided: true,
            gradient: 0.0,
        }
    }

    /// Newton correction towards `ln phi(P^n(z)) = target` (imaginary part mod `2pi`).
    /// Returns `(step, |residual|, P^n(z), (P^n)'(z))`.
    fn level_step(&self, z: Complex64, n: usize, target: Complex64) -> Option<(Complex64, f64, Complex64, Complex64)> {
        let mut u = z;
        let mut g = Complex64::new(1.0, 0.0);
        for _ in 0..n {
            let (p, dp) = self.poly.eval_with_derivative(u);
            g *= dp;
            u = p;
        }
        if !(u.re.is_finite() && u.im.is_finite() && g.re.is_finite() && g.im.is_finite()) {
            return None;
        }
        if g.norm() == 0.0 {
            return None;
        }
        let mut f = self.log_phi_far(u) - target;
        f.im = wrap_angle(f.im);
        // d/dz ln phi(P^n z) = (P^n)'(z) / P^n(z) up to the far-field correction
        let step = cdiv(f * u, g);
        Some((step, f.norm(), u, g))
    }
}

/// Reduces an angle in radians to `(-pi, pi]`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Green's function of `poly` at `z` with the default iteration cap.
pub fn green(poly: &Polynomial, z: ComplexPoint) -> GreenValue {
    Boettcher::new(poly).green(z, GREEN_MAX_ITER)
}
