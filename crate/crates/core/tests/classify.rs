mod common;

use common::*;
use julialab_core::classify::{
    brjuno_data, indifferent_cycles, small_multiplier_scan, BrjunoFlag, BrjunoRule, RotationNumber,
};
use julialab_core::spectrum::{multiplier_spectrum, SpectrumOptions};
use julialab_core::Polynomial;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

/// `|a/b - p/q| <= 1/q^2`, i.e. `|a q - p b| q <= b`, in exact arithmetic.
fn reconstructs(a: &BigInt, b: &BigUint, p: &BigUint, q: &BigUint) -> bool {
    let (b, p, q) = (BigInt::from(b.clone()), BigInt::from(p.clone()), BigInt::from(q.clone()));
    let gap = (a * &q - &p * &b).magnitude().clone();
    BigInt::from(gap) * &q <= b
}

fn check_convergents(a: u128, b: u128, depth: usize) -> Result<(), TestCaseError> {
    let alpha = RotationNumber::Rational {
        num: BigInt::from(a),
        den: BigUint::from(b),
    };
    let d = brjuno_data(&alpha, depth, BrjunoRule::default()).unwrap();
    let frac = BigInt::from(a % b);
    for (p, q) in d.numerators.iter().zip(&d.denominators) {
        prop_assert!(reconstructs(&frac, &BigUint::from(b), p, q), "{a}/{b}: {p}/{q}");
    }
    Ok(())
}

proptest! {
    #[test]
    fn rational_convergents_reconstruct(a in 0u128..1_000_000_000_000, b in 1u128..1_000_000_000_000) {
        check_convergents(a, b, 40)?;
    }

    #[test]
    fn double_convergents_reconstruct(x in 0.01..1.0f64) {
        // exact dyadic value of x
        let m = (x * 2f64.powi(60)) as u128;
        prop_assert_eq!(m as f64, x * 2f64.powi(60));
        let d = brjuno_data(&RotationNumber::Float(x), 40, BrjunoRule::default()).unwrap();
        for (p, q) in d.numerators.iter().zip(&d.denominators) {
            prop_assert!(reconstructs(&BigInt::from(m), &(BigUint::from(1u8) << 60), p, q), "{x}: {p}/{q}");
        }
    }

    #[test]
    fn brjuno_sums_never_decrease(x in 0.0..1.0f64, depth in 5usize..40) {
        let d = brjuno_data(&RotationNumber::Float(x), depth, BrjunoRule::default()).unwrap();
        prop_assert!(d.brjuno_sums.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn scan_hits_are_sound(p in quadratic(), n_max in 2usize..=6, epsilon in 0.01..1.0f64) {
        let s = multiplier_spectrum(&p, n_max, &SpectrumOptions::default()).unwrap();
        let r = small_multiplier_scan(&s, epsilon).unwrap();
        for h in &r.hits {
            let orbit = &s.period(h.period).unwrap().orbits[h.orbit_index];
            let lambda: Complex64 = orbit.points.iter().map(|&z| p.derivative_at(z)).product();
            let a = lambda.norm();
            prop_assert!(a > 1.0 && a <= (h.period as f64).powf(5.0 + epsilon), "period {} |lambda| {a}", h.period);
        }
        prop_assert!(r.hits.windows(2).all(|w| w[0].period <= w[1].period));
    }
}

#[test]
fn surd_convergents_are_fibonacci_like() {
    // golden: q_n Fibonacci and p_n q_(n-1) - p_(n-1) q_n = +-1
    let d = brjuno_data(&RotationNumber::golden(), 60, BrjunoRule::default()).unwrap();
    let (mut f0, mut f1) = (BigUint::from(0u8), BigUint::from(1u8));
    for q in &d.denominators {
        assert_eq!(*q, f1);
        let next = &f0 + &f1;
        f0 = std::mem::replace(&mut f1, next);
    }
    for k in 1..d.numerators.len() {
        let lhs = BigInt::from(d.numerators[k].clone()) * BigInt::from(d.denominators[k - 1].clone());
        let rhs = BigInt::from(d.numerators[k - 1].clone()) * BigInt::from(d.denominators[k].clone());
        assert_eq!((lhs - rhs).magnitude(), &BigUint::from(1u8));
    }
}

#[test]
fn flags_are_stable_under_depth_extension() {
    let corpus: Vec<RotationNumber> = ["golden", "silver", "surd:0,2,1", "surd:1,3,2", "0.7182818284590452", "liouville:4"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    for alpha in &corpus {
        let mut seen_convergent = false;
        for depth in (10..=60).step_by(5) {
            let d = brjuno_data(alpha, depth, BrjunoRule::default()).unwrap();
            let flag = d.flag.unwrap();
            if seen_convergent {
                assert_ne!(flag, BrjunoFlag::BrjunoDivergent, "{alpha} at depth {depth}");
            }
            seen_convergent |= flag == BrjunoFlag::BrjunoConvergent;
        }
    }
}

#[test]
fn square_scan_matches_independent_count() {
    let p = poly("z^2");
    let s = multiplier_spectrum(&p, 10, &SpectrumOptions::default()).unwrap();
    let r = small_multiplier_scan(&s, 0.1).unwrap();
    let expected: Vec<usize> = (1..=10usize).filter(|&n| 2f64.powi(n as i32) <= (n as f64).powf(5.1)).collect();
    assert_eq!(r.periods_with_hits, expected);
    assert_eq!(r.largest_period, 10);
}

#[test]
fn golden_family_has_small_multiplier_hits() {
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let p = Polynomial::new(vec![c(0.0, 0.0), Complex64::from_polar(1.0, TAU * alpha), c(1.0, 0.0)]).unwrap();
    let s = multiplier_spectrum(&p, 8, &SpectrumOptions::default()).unwrap();
    assert!(s.is_complete());
    let r = small_multiplier_scan(&s, 0.1).unwrap();
    assert!(!r.hits.is_empty());
    let cycles = indifferent_cycles(&s);
    assert!(cycles.iter().any(|c| c.orbit.period == 1 && c.root_of_unity.is_none()));
}
