use super::MultiplierSpectrum;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Minimum number of periods with a repelling orbit.
pub const MIN_GROWTH_PERIODS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub period: usize,
    pub lambda_min: f64,
    /// `lambda_min / period^exponent`.
    pub ratio: f64,
}

/// Best constant in `lambda_min(n) >= C n^(5 + epsilon)` over the tested periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub epsilon: f64,
    pub exponent: f64,
    pub rows: Vec<GrowthRow>,
    /// `min_n ratio`; the largest admissible constant on this range.
    pub c_star: f64,
    pub c_star_period: usize,
    /// Least-squares slope of `ln lambda_min` against `ln n`, all periods.
    pub slope: f64,
    /// Same fit restricted to the upper half of the periods.
    pub upper_slope: f64,
    pub upper_range: (usize, usize),
    /// `c_star > 0`.
    pub holds_on_tested_range: bool,
    pub largest_period: usize,
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn growth_check(spectrum: &MultiplierSpectrum, epsilon: f64) -> Result<GrowthReport> {
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!("epsilon must be positive, got {epsilon}")));
    }
    let exponent = 5.0 + epsilon;
    let rows: Vec<GrowthRow> = spectrum
        .periods
        .iter()
        .filter_map(|p| {
            p.lambda_min.map(|l| GrowthRow {
                period: p.period,
                lambda_min: l,
                ratio: l / (p.period as f64).powf(exponent),
            })
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyRepellingSpectrum);
    }
    if rows.len() < MIN_GROWTH_PERIODS {
        return Err(Error::InsufficientPeriods {
            needed: MIN_GROWTH_PERIODS,
            available: rows.len(),
        });
    }
    let best = rows
        .iter()
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .unwrap();
    let logs: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.period as f64).ln(), r.lambda_min.ln()))
        .collect();
    // the slope is undefined through a single abscissa; n = 1 sits at ln n = 0
    let slope = least_squares_slope(&logs);
    let upper_start = rows.len() / 2;
    let upper = &logs[upper_start..];
    let upper_slope = least_squares_slope(upper);
    Ok(GrowthReport {
        epsilon,
        exponent,
        c_star: best.ratio,
        c_star_period: best.period,
        holds_on_tested_range: best.ratio > 0.0,
        slope,
        upper_slope,
        upper_range: (rows[upper_start].period, rows.last().unwrap().period),
        largest_period: rows.last().unwrap().period,
        rows,
    })
}
