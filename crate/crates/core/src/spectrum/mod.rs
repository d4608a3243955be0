//! Periodic points, cycles and the multiplier spectrum.
//!
//! Periodic points of period dividing `n` are the `d^n` roots of
//! `F(z) = P^n(z) - z`. The coefficients of `P^n` are never formed: every
//! root finder here evaluates `F` and `F'` by iterating `P` with the chain
//! rule.

mod growth;
mod periodic;

pub use growth::{growth_check, GrowthReport, GrowthRow};
pub(crate) use growth::least_squares_slope;
pub use periodic::{periodic_points, IterateEquation, PeriodicPoints, PeriodicRoot};

use crate::error::{Error, Result};
use crate::orbit::iterate_with_derivative;
use crate::poly::{ComplexPoint, Polynomial};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Tolerances and budgets for the spectrum computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Maximum `d^n` accepted.
    pub budget: u64,
    /// Roots closer than `dedupe_factor * escape_radius` are merged.
    pub dedupe_factor: f64,
    /// Divisor sieve distance, `sieve_factor * escape_radius`.
    pub sieve_factor: f64,
    /// `|F(z)| <= residual_factor * (1 + |z|)` for a validated root.
    pub residual_factor: f64,
    /// `kind = indifferent` iff `||lambda| - 1| <= indifference_tolerance`.
    pub indifference_tolerance: f64,
    /// Clusters with `|F'| < multiple_root_derivative` get an argument-principle count.
    pub multiple_root_derivative: f64,
    /// Radius of the argument-principle circle.
    pub multiplicity_radius: f64,
    /// Allow the double-double polishing stage.
    pub precision_escalation: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            budget: 1 << 16,
            dedupe_factor: 1e-7,
            sieve_factor: 1e-6,
            residual_factor: 1e-9,
            indifference_tolerance: 1e-8,
            multiple_root_derivative: 1e-6,
            multiplicity_radius: 1e-4,
            precision_escalation: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    Repelling,
    Indifferent,
    Attracting,
}

impl OrbitKind {
    pub fn classify(multiplier: Complex64, tolerance: f64) -> Self {
        let m = multiplier.norm();
        if (m - 1.0).abs() <= tolerance {
            OrbitKind::Indifferent
        } else if m > 1.0 {
            OrbitKind::Repelling
        } else {
            OrbitKind::Attracting
        }
    }
}

/// One cycle of exact period `period`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub period: usize,
    pub points: Vec<ComplexPoint>,
    pub multiplier: Complex64,
    pub kind: OrbitKind,
    /// Multiplicity of `points[0]` as a root of `P^period(z) - z`.
    pub multiplicity: usize,
}

impl PeriodicOrbit {
    pub fn abs_multiplier(&self) -> f64 {
        self.multiplier.norm()
    }
}

/// Orbits and counts for one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodEntry {
    pub period: usize,
    pub orbits: Vec<PeriodicOrbit>,
    /// Smallest `|lambda|` over repelling orbits of this exact period.
    pub lambda_min: Option<f64>,
    /// Roots of `P^n(z) - z` counted with multiplicity (equals `d^n`).
    pub root_count: usize,
    pub distinct_roots: usize,
    /// Sum of `(multiplicity - 1)` over the roots of `P^n(z) - z`.
    pub multiplicity_defect: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFailure {
    pub period: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpectrum {
    pub fingerprint: String,
    pub degree: usize,
    pub n_max: usize,
    pub periods: Vec<PeriodEntry>,
    /// Set when the computation stopped early; `periods` holds what succeeded.
    pub failure: Option<SpectrumFailure>,
}

impl MultiplierSpectrum {
    pub fn period(&self, n: usize) -> Option<&PeriodEntry> {
        self.periods.iter().find(|p| p.period == n)
    }

    pub fn orbits(&self) -> impl Iterator<Item = &PeriodicOrbit> {
        self.periods.iter().flat_map(|p| p.orbits.iter())
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|m| n.is_multiple_of(*m)).collect()
}

pub fn mobius(n: usize) -> i64 {
    let mut n = n;
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of cycles of exact period `n` for a degree-`d` map with simple roots.
pub fn necklace_count(d: usize, n: usize) -> i128 {
    let total: i128 = divisors(n)
        .into_iter()
        .map(|m| mobius(n / m) as i128 * (d as i128).pow(m as u32))
        .sum();
    total / n as i128
}

/// Caches periodic-point sets so divisor sieves reuse earlier periods.
pub struct SpectrumBuilder<'a> {
    poly: &'a Polynomial,
    options: SpectrumOptions,
    points: BTreeMap<usize, PeriodicPoints>,
}

impl<'a> SpectrumBuilder<'a> {
    pub fn new(poly: &'a Polynomial, options: SpectrumOptions) -> Self {
        Self {
            poly,
            options,
            points: BTreeMap::new(),
        }
    }

    pub fn periodic_points(&mut self, n: usize) -> Result<&PeriodicPoints> {
        if !self.points.contains_key(&n) {
            let pts = periodic_points(self.poly, n, &self.options)?;
            self.points.insert(n, pts);
        }
        Ok(&self.points[&n])
    }

    /// Cycles of exact period `n`.
    pub fn exact_period_orbits(&mut self, n: usize) -> Result<PeriodEntry> {
        for m in divisors(n) {
            self.periodic_points(m)?;
        }
        let radius = self.poly.escape_radius();
        let sieve = self.options.sieve_factor * radius;
        let all = &self.points[&n];
        let lower: Vec<&PeriodicRoot> = divisors(n)
            .into_iter()
            .filter(|&m| m < n)
            .flat_map(|m| self.points[&m].roots.iter())
            .collect();
        let exact: Vec<PeriodicRoot> = all
            .roots
            .iter()
            .filter(|r| lower.iter().all(|l| (l.z - r.z).norm() > sieve))
            .cloned()
            .collect();

        let orbits = group_cycles(self.poly, n, &exact, sieve, &self.options)?;

        let defect = all.multiplicity_defect();
        let has_multiplicity = divisors(n)
            .into_iter()
            .any(|m| self.points[&m].multiplicity_defect() > 0);
        if !has_multiplicity {
            let expected = necklace_count(self.poly.degree(), n);
            if orbits.len() as i128 != expected {
                return Err(Error::CycleGrouping {
                    period: n,
                    detail: format!(
                        "found {} cycles, necklace count predicts {}",
                        orbits.len(),
                        expected
                    ),
                });
            }
        }

        let lambda_min = orbits
            .iter()
            .filter(|o| o.kind == OrbitKind::Repelling)
            .map(|o| o.abs_multiplier())
            .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.min(m))));
        Ok(PeriodEntry {
            period: n,
            orbits,
            lambda_min,
            root_count: all.total_multiplicity(),
            distinct_roots: all.roots.len(),
            multiplicity_defect: defect,
        })
    }
}

fn group_cycles(
    poly: &Polynomial,
    n: usize,
    exact: &[PeriodicRoot],
    tolerance: f64,
    options: &SpectrumOptions,
) -> Result<Vec<PeriodicOrbit>> {
    let mut assigned = vec![false; exact.len()];
    let mut orbits = Vec::new();
    for start in 0..exact.len() {
        if assigned[start] {
            continue;
        }
        assigned[start] = true;
        let mut members = vec![start];
        let mut current = exact[start].z;
        for step in 1..n {
            let image = poly.eval(current);
            let next = nearest_unassigned(exact, &assigned, image, tolerance).ok_or_else(|| {
                Error::CycleGrouping {
                    period: n,
                    detail: format!(
                        "no root near P^{step}({}) = {image} within {tolerance:e}",
                        exact[start].z
                    ),
                }
            })?;
            assigned[next] = true;
            members.push(next);
            current = exact[next].z;
        }
        let closing = poly.eval(current);
        let gap = (closing - exact[start].z).norm();
        if gap > tolerance {
            return Err(Error::CycleGrouping {
                period: n,
                detail: format!("cycle from {} does not close: gap {gap:e}", exact[start].z),
            });
        }
        let points: Vec<ComplexPoint> = members.iter().map(|&k| exact[k].z).collect();
        let multiplier = iterate_with_derivative(poly, points[0], n).derivative.to_complex();
        orbits.push(PeriodicOrbit {
            period: n,
            kind: OrbitKind::classify(multiplier, options.indifference_tolerance),
            multiplier,
            multiplicity: exact[start].multiplicity,
            points,
        });
    }
    Ok(orbits)
}

fn nearest_unassigned(
    roots: &[PeriodicRoot],
    assigned: &[bool],
    target: Complex64,
    tolerance: f64,
) -> Option<usize> {
    roots
        .iter()
        .enumerate()
        .filter(|(k, _)| !assigned[*k])
        .map(|(k, r)| (k, (r.z - target).norm()))
        .filter(|(_, d)| *d <= tolerance)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
}

/// Cycles of exact period `n`.
pub fn exact_period_orbits(poly: &Polynomial, n: usize, options: &SpectrumOptions) -> Result<Vec<PeriodicOrbit>> {
    Ok(SpectrumBuilder::new(poly, *options).exact_period_orbits(n)?.orbits)
}

/// Spectrum for periods `1..=n_max`. Stops at the first failing period and
/// records it in [`MultiplierSpectrum::failure`].
pub fn multiplier_spectrum(poly: &Polynomial, n_max: usize, options: &SpectrumOptions) -> Result<MultiplierSpectrum> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    check_budget(poly, n_max, options.budget)?;
    let mut builder = SpectrumBuilder::new(poly, *options);
    let mut periods = Vec::with_capacity(n_max);
    let mut failure = None;
    for n in 1..=n_max {
        match builder.exact_period_orbits(n) {
            Ok(entry) => periods.push(entry),
            Err(e) => {
                failure = Some(SpectrumFailure {
                    period: n,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    Ok(MultiplierSpectrum {
        fingerprint: poly.fingerprint(),
        degree: poly.degree(),
        n_max,
        periods,
        failure,
    })
}

pub(crate) fn check_budget(poly: &Polynomial, n: usize, budget: u64) -> Result<()> {
    let needed = (poly.degree() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "periodic points",
            needed,
            budget,
        });
    }
    Ok(())
}
