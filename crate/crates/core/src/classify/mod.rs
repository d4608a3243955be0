//! Indifferent cycles, rotation numbers and scans for repelling cycles with
//! small multipliers.

mod rotation;

pub use rotation::{
    brjuno_data, rational_approximation, BrjunoFlag, BrjunoRule, RotationData, RotationNumber, MAX_DEPTH,
    ROOT_OF_UNITY_MAX_DENOMINATOR, ROOT_OF_UNITY_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::spectrum::{MultiplierSpectrum, OrbitKind, PeriodicOrbit};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndifferentCycle {
    pub orbit: PeriodicOrbit,
    /// `arg(lambda) / 2pi` in `[0, 1)`.
    pub rotation_number: f64,
    /// `p/q` when `lambda` is a root of unity.
    pub root_of_unity: Option<(u64, u64)>,
}

impl IndifferentCycle {
    pub fn is_root_of_unity(&self) -> bool {
        self.root_of_unity.is_some()
    }
}

/// `arg(lambda) / 2pi` reduced to `[0, 1)`.
pub fn rotation_number(multiplier: num_complex::Complex64) -> f64 {
    let t = (multiplier.arg() / TAU).rem_euclid(1.0);
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// Every indifferent orbit of the spectrum, tagged root of unity or not.
pub fn indifferent_cycles(spectrum: &MultiplierSpectrum) -> Vec<IndifferentCycle> {
    spectrum
        .orbits()
        .filter(|o| o.kind == OrbitKind::Indifferent)
        .map(|o| {
            let alpha = rotation_number(o.multiplier);
            IndifferentCycle {
                orbit: o.clone(),
                rotation_number: alpha,
                root_of_unity: rational_approximation(alpha, ROOT_OF_UNITY_MAX_DENOMINATOR, ROOT_OF_UNITY_TOLERANCE),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallMultiplierHit {
    pub period: usize,
    /// Index of the orbit within its period entry.
    pub orbit_index: usize,
    pub point: crate::poly::ComplexPoint,
    pub abs_multiplier: f64,
    /// `n^(5 + epsilon)`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub epsilon: f64,
    pub exponent: f64,
    pub hits: Vec<SmallMultiplierHit>,
    pub periods_with_hits: Vec<usize>,
    pub largest_period: usize,
    pub note: String,
}

/// Repelling orbits with `|lambda| <= n^(5 + epsilon)`, sorted by period.
pub fn small_multiplier_scan(spectrum: &MultiplierSpectrum, epsilon: f64) -> Result<ScanReport> {
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!("epsilon must be positive, got {epsilon}")));
    }
    let exponent = 5.0 + epsilon;
    let mut hits = Vec::new();
    for entry in &spectrum.periods {
        let bound = (entry.period as f64).powf(exponent);
        for (k, o) in entry.orbits.iter().enumerate() {
            let a = o.abs_multiplier();
            if o.kind == OrbitKind::Repelling && a > 1.0 && a <= bound {
                hits.push(SmallMultiplierHit {
                    period: entry.period,
                    orbit_index: k,
                    point: o.points[0],
                    abs_multiplier: a,
                    bound,
                });
            }
        }
    }
    let mut periods_with_hits: Vec<usize> = hits.iter().map(|h| h.period).collect();
    periods_with_hits.dedup();
    let largest_period = spectrum.periods.last().map_or(0, |p| p.period);
    Ok(ScanReport {
        epsilon,
        exponent,
        periods_with_hits,
        note: format!(
            "finite scan up to period {largest_period}; it neither confirms nor refutes an infinite sequence of such cycles"
        ),
        largest_period,
        hits,
    })
}
