//! Simultaneous root iteration (Aberth–Ehrlich) and small-degree solvers.

use num_complex::Complex64;
use rayon::prelude::*;

/// Outcome of a simultaneous iteration.
#[derive(Debug, Clone)]
pub struct AberthRun {
    pub roots: Vec<Complex64>,
    pub converged: Vec<bool>,
    pub iterations: usize,
}

/// Jacobi-style Aberth iteration: every approximation is updated from the
/// previous sweep, so the result does not depend on thread scheduling.
///
/// `newton_ratio(z)` must return `F(z)/F'(z)` for the target function.
pub fn aberth<F>(newton_ratio: F, init: Vec<Complex64>, max_iter: usize, tol: f64) -> AberthRun
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let frozen = vec![false; init.len()];
    aberth_resume(newton_ratio, init, frozen, max_iter, tol)
}

/// [`aberth`] with some approximations frozen from the start. Frozen
/// entries still repel the others, which deflates their roots away.
pub fn aberth_resume<F>(newton_ratio: F, init: Vec<Complex64>, frozen: Vec<bool>, max_iter: usize, tol: f64) -> AberthRun
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    assert_eq!(init.len(), frozen.len());
    let n = init.len();
    let mut roots = init;
    let mut converged = frozen;
    let mut iterations = 0;
    for _ in 0..max_iter {
        if converged.iter().all(|&c| c) {
            break;
        }
        iterations += 1;
        let snapshot = &roots;
        let updates: Vec<Option<(Complex64, bool)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if converged[i] {
                    return None;
                }
                let z = snapshot[i];
                let w = newton_ratio(z);
                if !(w.re.is_finite() && w.im.is_finite()) {
                    return Some((z, false));
                }
                let mut s = Complex64::new(0.0, 0.0);
                for (j, zj) in snapshot.iter().enumerate() {
                    if j != i {
                        s += (z - zj).inv();
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - w * s;
                let step = if denom.norm() > 0.0 && denom.re.is_finite() && denom.im.is_finite() {
                    w / denom
                } else {
                    w
                };
                let next = z - step;
                let done = step.norm() <= tol * (1.0 + next.norm());
                Some((next, done))
            })
            .collect();
        for (i, u) in updates.into_iter().enumerate() {
            if let Some((z, done)) = u {
                if z.re.is_finite() && z.im.is_finite() {
                    roots[i] = z;
                }
                converged[i] = done;
            }
        }
    }
    AberthRun {
        roots,
        converged,
        iterations,
    }
}

/// Evenly spaced starting points on a circle, rotated off the real axis.
pub fn circle_start(count: usize, radius: f64, phase: f64) -> Vec<Complex64> {
    (0..count)
        .map(|j| {
            let t = std::f64::consts::TAU * (j as f64 + phase) / count as f64;
            Complex64::from_polar(radius, t)
        })
        .collect()
}

/// Roots of `a z^2 + b z + c` by the cancellation-free formula.
pub fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - a * c * 4.0).sqrt();
    // pick the sign that avoids cancellation in b + sqrt(disc)
    let q = if (b.conj() * disc).re >= 0.0 {
        -(b + disc) * 0.5
    } else {
        -(b - disc) * 0.5
    };
    if q.norm() == 0.0 {
        let r = -b / (a * 2.0);
        return [r, r];
    }
    [q / a, c / q]
}

fn horner_ratio(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut p = *coeffs.last().unwrap();
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev().skip(1) {
        dp = dp * z + p;
        p = p * z + c;
    }
    p / dp
}

/// All roots (with multiplicity) of a polynomial given in ascending powers.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() == 0.0 {
        coeffs.pop();
    }
    let degree = coeffs.len() - 1;
    match degree {
        0 => Vec::new(),
        1 => vec![-coeffs[0] / coeffs[1]],
        2 => quadratic_roots(coeffs[2], coeffs[1], coeffs[0]).to_vec(),
        _ => {
            let lead = coeffs[degree].norm();
            // Fujiwara-type bound on the root moduli
            let bound = (0..degree)
                .map(|i| (coeffs[i].norm() / lead).powf(1.0 / (degree - i) as f64))
                .fold(0.0, f64::max)
                * 2.0;
            let init = circle_start(degree, bound.max(1e-3) * 0.7, 0.37);
            let run = aberth(|z| horner_ratio(&coeffs, z), init, 500, 1e-15);
            run.roots
                .into_iter()
                .map(|mut z| {
                    for _ in 0..2 {
                        let r = horner_ratio(&coeffs, z);
                        if r.re.is_finite() && r.im.is_finite() {
                            z -= r;
                        }
                    }
                    z
                })
                .collect()
        }
    }
}
