use super::{check_budget, SpectrumOptions};
use crate::error::{Error, Result};
use crate::numeric::{cdiv, ComplexDd, ScaledComplex};
use crate::poly::{ComplexPoint, Polynomial};
use crate::boettcher::Boettcher;
use crate::roots::{aberth, aberth_resume};
use crate::tree::preimages;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A root of `P^n(z) - z` with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicRoot {
    pub z: ComplexPoint,
    pub multiplicity: usize,
}

/// All roots of `P^n(z) - z`, validated to sum to `d^n` with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoints {
    pub period: usize,
    /// Sorted by `(re, im)`.
    pub roots: Vec<PeriodicRoot>,
    /// Escalation stages used (0 = first attempt succeeded).
    pub escalations: usize,
}

impl PeriodicPoints {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn multiplicity_defect(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity - 1).sum()
    }
}

/// `F(z) = P^n(z) - z`, evaluated by iteration.
#[derive(Debug, Clone, Copy)]
pub struct IterateEquation<'a> {
    pub poly: &'a Polynomial,
    pub n: usize,
}

const FAR: f64 = 1e100;

impl<'a> IterateEquation<'a> {
    pub fn new(poly: &'a Polynomial, n: usize) -> Self {
        Self { poly, n }
    }

    /// `(F(z), F'(z))`; non-finite once the orbit overflows.
    pub fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let (u, g) = crate::orbit::iterate_value_and_derivative(self.poly, z, self.n);
        (u - z, g - 1.0)
    }

    /// `(F, F', F'')`.
    pub fn eval2(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let mut u = z;
        let mut g = Complex64::new(1.0, 0.0);
        let mut h = Complex64::new(0.0, 0.0);
        for _ in 0..self.n {
            let (p, dp, ddp) = self.poly.eval_with_two_derivatives(u);
            h = ddp * g * g + dp * h;
            g *= dp;
            u = p;
        }
        (u - z, g - 1.0, h)
    }

    /// `F(z)/F'(z)` without overflow for points far outside the filled set.
    pub fn newton_ratio(&self, z: Complex64) -> Complex64 {
        let d = self.poly.degree() as f64;
        let mut u = z;
        let mut g = ScaledComplex::ONE;
        for k in 0..self.n {
            if u.norm() > FAR {
                // each further step contributes P(u)/(u P'(u)) = 1/d to working precision
                return g.divide_into(u) * d.powi(-((self.n - k) as i32));
            }
            let (p, dp) = self.poly.eval_with_derivative(u);
            g *= dp;
            u = p;
        }
        if g.ln_abs() > 600.0 {
            return g.divide_into(u - z);
        }
        cdiv(u - z, g.to_complex() - 1.0)
    }

    pub fn residual(&self, z: Complex64) -> f64 {
        self.eval(z).0.norm()
    }

    /// `F(z)` evaluated in double-double arithmetic.
    pub fn residual_dd(&self, z: Complex64) -> Complex64 {
        let z_dd = ComplexDd::from_complex(z);
        let mut u = z_dd;
        for _ in 0..self.n {
            u = self.poly.eval_dd(u);
        }
        u.sub(z_dd).to_complex()
    }

    /// Zeros of `F` inside the circle `|w - center| = radius`.
    pub fn winding_number(&self, center: Complex64, radius: f64) -> i64 {
        const SAMPLES: usize = 512;
        let mut total = 0.0;
        let mut prev = self.eval(center + radius).0;
        for k in 1..=SAMPLES {
            let w = center + Complex64::from_polar(radius, TAU * k as f64 / SAMPLES as f64);
            let f = self.eval(w).0;
            total += (f / prev).arg();
            prev = f;
        }
        (total / TAU).round() as i64
    }
}

const RESCUE_ROUNDS: usize = 3;
const RESCUE_LEVELS: [f64; RESCUE_ROUNDS] = [1.25, 3.0, 1.1];

struct Attempt {
    /// Modulus of the base point whose `n`-th preimages seed the iteration,
    /// in units of the escape radius.
    level: f64,
    phase: f64,
    max_iter: usize,
    polish_dd: bool,
}

/// Roots of `P^n(z) - z`. Runs simultaneous iteration, then escalates
/// (longer run from a rotated start, then double-double polishing) before
/// reporting an undercount with whatever was found.
pub fn periodic_points(poly: &Polynomial, n: usize, options: &SpectrumOptions) -> Result<PeriodicPoints> {
    if n == 0 {
        return Err(Error::Precondition("period must be at least 1".into()));
    }
    check_budget(poly, n, options.budget)?;
    let expected = poly.degree().pow(n as u32);
    let eq = IterateEquation::new(poly, n);

    let mut attempts = vec![
        Attempt {
            level: 1.0,
            phase: 0.5,
            max_iter: 400,
            polish_dd: false,
        },
        Attempt {
            level: 2.0,
            phase: 0.181,
            max_iter: 1600,
            polish_dd: false,
        },
    ];
    if options.precision_escalation {
        attempts.push(Attempt {
            level: 1.5,
            phase: 0.727,
            max_iter: 1600,
            polish_dd: true,
        });
    }

    let mut best: Vec<PeriodicRoot> = Vec::new();
    for (stage, attempt) in attempts.iter().enumerate() {
        let roots = attempt_roots(&eq, expected, attempt, options);
        let total: usize = roots.iter().map(|r| r.multiplicity).sum();
        if total == expected {
            return Ok(PeriodicPoints {
                period: n,
                roots,
                escalations: stage,
            });
        }
        if total > best.iter().map(|r| r.multiplicity).sum() {
            best = roots;
        }
    }
    Err(Error::Undercount {
        period: n,
        expected,
        found_count: best.iter().map(|r| r.multiplicity).sum(),
        found: best.iter().map(|r| (r.z, r.multiplicity)).collect(),
    })
}

fn attempt_roots(
    eq: &IterateEquation<'_>,
    expected: usize,
    attempt: &Attempt,
    options: &SpectrumOptions,
) -> Vec<PeriodicRoot> {
    let radius = eq.poly.escape_radius();
    let start = seed_points(eq.poly, eq.n, attempt.level, attempt.phase);
    let mut run = aberth(|z| eq.newton_ratio(z), start, attempt.max_iter, 1e-14);

    let residual_ok = |z: Complex64, dd: bool| {
        let r = if dd { eq.residual_dd(z).norm() } else { eq.residual(z) };
        r <= options.residual_factor * (1.0 + z.norm())
    };

    // Approximations stranded where F overflows restart from a fresh start
    // curve with the accepted ones frozen.
    for (round, level) in RESCUE_LEVELS.iter().enumerate() {
        let good: Vec<bool> = run
            .roots
            .iter()
            .zip(&run.converged)
            .map(|(z, &c)| c && z.re.is_finite() && z.im.is_finite() && residual_ok(*z, false))
            .collect();
        let missing = good.iter().filter(|&&g| !g).count();
        if missing == 0 {
            break;
        }
        let pool = seed_points(eq.poly, eq.n, attempt.level * level, attempt.phase + 0.31 * (round + 1) as f64);
        let mut fresh = widest_gaps(pool, &run.roots, &good, missing).into_iter();
        let init: Vec<Complex64> = run
            .roots
            .iter()
            .zip(&good)
            .map(|(z, &g)| if g { *z } else { fresh.next().unwrap() })
            .collect();
        run = aberth_resume(|z| eq.newton_ratio(z), init, good, attempt.max_iter, 1e-14);
    }

    let mut candidates: Vec<Complex64> = Vec::with_capacity(expected);
    for z in run.roots {
        if !(z.re.is_finite() && z.im.is_finite()) {
            continue;
        }
        if residual_ok(z, false) {
            candidates.push(polish_simple(eq, z));
        } else if attempt.polish_dd {
            let mut w = z;
            for _ in 0..8 {
                let f = eq.residual_dd(w);
                let fp = eq.eval(w).1;
                let step = f / fp;
                if !(step.re.is_finite() && step.im.is_finite()) {
                    break;
                }
                w -= step;
            }
            if residual_ok(w, true) {
                candidates.push(w);
            }
        }
    }
    cluster(eq, candidates, radius, options)
}

/// The `d^n` preimages under `P^n` of a base point on the circle of radius
/// `level * escape_radius`. They sit on a thin equipotential and are spread by
/// harmonic measure, as the periodic points are. Falls back to a radial
/// search for the same equipotential if a preimage solve fails.
fn seed_points(poly: &Polynomial, n: usize, level: f64, phase: f64) -> Vec<Complex64> {
    let d = poly.degree();
    let coeffs = poly.coefficients();
    let center = -coeffs[d - 1] / (coeffs[d] * d as f64);
    let base = center + Complex64::from_polar(level * poly.escape_radius(), TAU * phase);
    let mut points = vec![base];
    for _ in 0..n {
        let next: Result<Vec<Vec<Complex64>>> = points.par_iter().map(|&w| preimages(poly, w)).collect();
        match next {
            Ok(levels) => points = levels.concat(),
            Err(_) => return equipotential_start(poly, n, d.pow(n as u32), 1.0, phase),
        }
    }
    points
}

/// The `count` pool points farthest from every accepted approximation.
fn widest_gaps(pool: Vec<Complex64>, roots: &[Complex64], good: &[bool], count: usize) -> Vec<Complex64> {
    let accepted: Vec<Complex64> = roots.iter().zip(good).filter(|(_, &g)| g).map(|(z, _)| *z).collect();
    let mut scored: Vec<(f64, usize)> = pool
        .par_iter()
        .enumerate()
        .map(|(k, z)| (accepted.iter().map(|a| (a - z).norm()).fold(f64::INFINITY, f64::min), k))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(count).map(|(_, k)| pool[k]).collect()
}

/// `count` points on the curve `G = level * G(escape circle) / d^n`, one per
/// direction from the critical centroid. `F` stays moderate there, so the
/// simultaneous iteration does not crawl in from far outside. Directions
/// that miss the curve take the point of least potential along the ray.
fn equipotential_start(poly: &Polynomial, n: usize, count: usize, level: f64, phase: f64) -> Vec<Complex64> {
    const STEPS: usize = 96;
    let b = Boettcher::new(poly);
    let d = poly.degree();
    let coeffs = poly.coefficients();
    let center = -coeffs[d - 1] / (coeffs[d] * d as f64);
    let radius = poly.escape_radius() + center.norm();
    let max_iter = 2 * n + 64;
    let green = |z: Complex64| b.green(z, max_iter).g;
    let target = level * green(center + radius) / (d as f64).powi(n as i32);
    (0..count)
        .into_par_iter()
        .map(|j| {
            let dir = Complex64::from_polar(1.0, TAU * (j as f64 + phase) / count as f64);
            let at = |r: f64| green(center + dir * r);
            let mut outer = radius;
            let mut best = (f64::INFINITY, radius);
            for k in 1..STEPS {
                let r = radius * (1.0 - k as f64 / STEPS as f64);
                let g = at(r);
                if g <= target {
                    let (mut lo, mut hi) = (r, outer);
                    for _ in 0..40 {
                        let mid = 0.5 * (lo + hi);
                        if at(mid) <= target {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    return center + dir * hi;
                }
                if g < best.0 {
                    best = (g, r);
                }
                outer = r;
            }
            center + dir * best.1
        })
        .collect()
}

/// One guarded Newton step; kept only if it lowers the residual.
fn polish_simple(eq: &IterateEquation<'_>, z: Complex64) -> Complex64 {
    let (f, fp) = eq.eval(z);
    let step = f / fp;
    if !(step.re.is_finite() && step.im.is_finite()) {
        return z;
    }
    let w = z - step;
    if eq.residual(w) < f.norm() {
        w
    } else {
        z
    }
}

fn sort_points(points: &mut [Complex64]) {
    points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Groups of indices whose members chain together within `radius`.
fn clusters_within(points: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut k = i;
        while parent[k] != r {
            let next = parent[k];
            parent[k] = r;
            k = next;
        }
        r
    }
    // points are sorted by re, so neighbours lie in a forward window
    for i in 0..n {
        for j in i + 1..n {
            if points[j].re - points[i].re > radius {
                break;
            }
            if (points[j] - points[i]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Splits a proximity cluster into groups of approximations that Newton
/// cannot tell apart. Two simple roots closer than the dedupe radius stay
/// separate when their distance dwarfs both Newton corrections.
fn split_resolved(eq: &IterateEquation<'_>, points: &[Complex64], group: Vec<usize>) -> Vec<Vec<usize>> {
    if group.len() < 2 {
        return vec![group];
    }
    let steps: Vec<f64> = group.iter().map(|&k| eq.newton_ratio(points[k]).norm()).collect();
    let local: Vec<Complex64> = group.iter().map(|&k| points[k]).collect();
    let mut label: Vec<usize> = (0..group.len()).collect();
    for i in 0..group.len() {
        for j in i + 1..group.len() {
            let scale = 8.0 * (steps[i] + steps[j]) + 1e-15 * (1.0 + local[i].norm());
            if !((local[i] - local[j]).norm() > scale) {
                let (a, b) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == b {
                        *l = a;
                    }
                }
            }
        }
    }
    let mut out: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (pos, &l) in label.iter().enumerate() {
        out.entry(l).or_default().push(group[pos]);
    }
    out.into_values().collect()
}

fn cluster(
    eq: &IterateEquation<'_>,
    mut candidates: Vec<Complex64>,
    escape_radius: f64,
    options: &SpectrumOptions,
) -> Vec<PeriodicRoot> {
    sort_points(&mut candidates);
    let dedupe = options.dedupe_factor * escape_radius;
    let mut merged: Vec<(Complex64, usize)> = clusters_within(&candidates, dedupe)
        .into_iter()
        .flat_map(|g| split_resolved(eq, &candidates, g))
        .map(|g| {
            let sum: Complex64 = g.iter().map(|&k| candidates[k]).sum();
            (sum / g.len() as f64, g.len())
        })
        .collect();

    // Multiple roots: clusters where F' nearly vanishes are counted by the
    // argument principle and absorb every candidate inside the circle.
    let r = options.multiplicity_radius;
    let mut absorbed = vec![false; merged.len()];
    let mut out = Vec::with_capacity(merged.len());
    for i in 0..merged.len() {
        if absorbed[i] {
            continue;
        }
        let (center, count) = merged[i];
        let fp = eq.eval(center).1;
        if fp.norm() < options.multiple_root_derivative {
            let m = eq.winding_number(center, r);
            let mut members = vec![i];
            for (j, other) in merged.iter().enumerate() {
                if j != i && !absorbed[j] && (other.0 - center).norm() < r {
                    members.push(j);
                }
            }
            for &j in &members {
                absorbed[j] = true;
            }
            let multiplicity = if m >= 1 { m as usize } else { count };
            let z = polish_multiple(eq, center, multiplicity);
            out.push(PeriodicRoot { z, multiplicity });
        } else {
            absorbed[i] = true;
            // several approximations on one simple root still count once
            out.push(PeriodicRoot {
                z: center,
                multiplicity: 1,
            });
        }
    }
    merged.clear();
    out.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    out
}

/// Newton on `F'` (which has a root of multiplicity `m - 1` there).
fn polish_multiple(eq: &IterateEquation<'_>, center: Complex64, multiplicity: usize) -> Complex64 {
    if multiplicity < 2 {
        return center;
    }
    let mut z = center;
    let factor = (multiplicity - 1) as f64;
    for _ in 0..20 {
        let (_, fp, fpp) = eq.eval2(z);
        let step = fp / fpp * factor;
        if !(step.re.is_finite() && step.im.is_finite()) || step.norm() > 1e-3 {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    if (z - center).norm() < 1e-4 {
        z
    } else {
        center
    }
}
