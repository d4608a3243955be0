mod common;

use common::*;
use julialab_core::boettcher::{
    green, psi, psi_check_grid, trace_ray, verify_derivative_identity, Angle, RayOptions,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAPS: [&str; 4] = ["z^2", "z^2-1", "z^2-2", "[0.2i, -0.3, 0.1, 1]"];

#[test]
fn green_functional_equation_on_random_escaping_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for spec in MAPS {
        let p = poly(spec);
        let d = p.degree() as f64;
        let r = p.escape_radius();
        let mut tested = 0;
        while tested < 1000 {
            let z = Complex64::from_polar(rng.gen_range(0.0..2.0 * r), rng.gen_range(0.0..std::f64::consts::TAU));
            let g = green(&p, z);
            if g.undecided || g.g < 1e-3 {
                continue;
            }
            let image = green(&p, p.eval(z));
            assert!((image.g - d * g.g).abs() <= 1e-6 * d * g.g, "{spec} at {z}: {} vs {}", image.g, d * g.g);
            tested += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // dyadic real parts keep t + k itself exact
    #[test]
    fn psi_is_deck_periodic_and_conjugates(j in 0u32..(1 << 20), im in 0.05..0.5f64, k in -3i32..=3) {
        let p = poly("z^2-1");
        let t = c(j as f64 / (1u32 << 20) as f64, im);
        let z = psi(&p, t).unwrap();
        prop_assert_eq!(psi(&p, t + k as f64).unwrap(), z);
        let image = psi(&p, t * 2.0).unwrap();
        prop_assert!((p.eval(z) - image).norm() / (1.0 + image.norm()) < 1e-6);
    }
}

#[test]
fn psi_grids_pass() {
    for spec in ["z^2", "z^2-1", "z^2-2"] {
        let r = psi_check_grid(&poly(spec), 16, 16, (0.05, 0.5)).unwrap();
        assert!(r.deck_exact, "{spec}");
        assert!(r.max_residual < 1e-6, "{spec}: {}", r.max_residual);
        assert_eq!(r.entries.len(), 256);
    }
}

#[test]
fn derivative_identity_on_sampled_pairs() {
    let p = poly("z^2-1");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=4usize);
        let im = rng.gen_range(0.05..0.5 / 2f64.powi(n as i32 - 1)).max(0.05);
        let t = c(rng.gen_range(0.0..1.0), im);
        let r = verify_derivative_identity(&p, t, n).unwrap();
        worst = worst.max(r.residual);
        assert!(r.pass, "t={t} n={n}: {}", r.residual);
    }
    assert!(worst < 1e-4);
}

fn max_matched_gap(spec: &str, theta: Angle) -> f64 {
    let p = poly(spec);
    let d = p.degree();
    let options = RayOptions::default();
    let ray = trace_ray(&p, theta, 4.0, 1e-3, options).unwrap();
    let image_ray = trace_ray(&p, theta.multiplied(d, 1), 8.0, 2e-3, options).unwrap();
    assert!(ray.failure.is_none() && image_ray.failure.is_none());
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for s in &ray.samples {
        if let Some(t) = image_ray
            .samples
            .iter()
            .find(|t| (t.potential - d as f64 * s.potential).abs() <= 1e-9 * t.potential)
        {
            worst = worst.max((p.eval(s.z) - t.z).norm());
            matched += 1;
        }
    }
    assert!(matched >= ray.samples.len() - 1, "{matched} of {}", ray.samples.len());
    worst
}

#[test]
fn rays_double_under_the_map() {
    for spec in ["z^2", "z^2-1"] {
        for theta in ["1/3", "1/5", "1/7", "3/10", "1/8", "5/12"] {
            let theta: Angle = theta.parse().unwrap();
            let gap = max_matched_gap(spec, theta);
            assert!(gap < 1e-4, "{spec} theta {theta}: {gap:e}");
        }
    }
}

#[test]
fn zero_ray_lands_on_a_fixed_point() {
    for spec in ["z^2", "z^2-1", "z^2-2", "z^2+0.2", "z^2-0.5"] {
        let p = poly(spec);
        let ray = trace_ray(&p, Angle::zero(), 2.0, 1e-10, RayOptions::default()).unwrap();
        let landing = ray.landing.unwrap_or_else(|| panic!("{spec}: spread {:?}", ray.landing_spread));
        assert!((p.eval(landing) - landing).norm() < 1e-6, "{spec}: {landing}");
    }
}

#[test]
fn angle_orbit_types() {
    let third: Angle = "1/3".parse().unwrap();
    assert_eq!(third.orbit_type(2), (0, 2));
    let sixth: Angle = "1/6".parse().unwrap();
    assert_eq!(sixth.orbit_type(2), (1, 2));
    assert_eq!(Angle::zero().orbit_type(3), (0, 1));
}
