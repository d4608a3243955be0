#![allow(dead_code)]

use julialab_core::Polynomial;
use num_complex::Complex64;
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn poly(text: &str) -> Polynomial {
    text.parse().unwrap()
}

/// A point of the closed disk of radius `r`.
pub fn disk_point(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..=r, 0.0..std::f64::consts::TAU).prop_map(|(m, t)| Complex64::from_polar(m, t))
}

/// Degree 2..=`max_degree`, coefficients in the unit disk, `|a_d| >= 0.2`.
pub fn unit_disk_poly(max_degree: usize) -> impl Strategy<Value = Polynomial> {
    (2..=max_degree)
        .prop_flat_map(|d| (prop::collection::vec(disk_point(1.0), d), (0.2..1.0f64, 0.0..std::f64::consts::TAU)))
        .prop_map(|(mut lower, (m, t))| {
            lower.push(Complex64::from_polar(m, t));
            Polynomial::new(lower).unwrap()
        })
}

/// `z^2 + c` with `|c| <= 2`.
pub fn quadratic() -> impl Strategy<Value = Polynomial> {
    disk_point(2.0).prop_map(|c| Polynomial::unicritical(2, c).unwrap())
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
