//! Acceptance criteria 1-11. Each test prints one `PASS`/`FAIL` line.

use julialab_core::boettcher::{psi_check_grid, trace_ray, verify_derivative_identity, Angle, RayOptions};
use julialab_core::classify::{
    brjuno_data, indifferent_cycles, small_multiplier_scan, BrjunoFlag, BrjunoRule, RotationNumber,
};
use julialab_core::ergodic::{brolin_sample, lyapunov_estimate, ruelle_check};
use julialab_core::spectrum::{exact_period_orbits, multiplier_spectrum, periodic_points, OrbitKind, SpectrumOptions};
use julialab_core::tree::{build_tree, summability_from_log_omegas, summability_report, SummabilityVerdict};
use julialab_core::Polynomial;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

fn poly(s: &str) -> Polynomial {
    s.parse().unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Prints the verdict line outside the test harness capture, then asserts.
fn verdict(criterion: &str, failures: &[String], detail: &str) {
    let line = if failures.is_empty() {
        format!("PASS criterion {criterion}: {detail}")
    } else {
        format!("FAIL criterion {criterion}: {detail}; {}", failures.join("; "))
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(failures.is_empty(), "{line}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn criterion_01_square_spectrum_exact() {
    let start = Instant::now();
    let p = poly("z^2");
    let s = multiplier_spectrum(&p, 8, &SpectrumOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut failures = Vec::new();
    if s.failure.is_some() || s.periods.len() != 8 {
        failures.push(format!("incomplete spectrum: {:?}", s.failure));
    }
    let mut worst: f64 = 0.0;
    for entry in &s.periods {
        let n = entry.period;
        let expected = 2f64.powi(n as i32);
        if entry.root_count != 1 << n {
            failures.push(format!("period {n}: {} roots, expected {}", entry.root_count, 1 << n));
        }
        for o in &entry.orbits {
            if o.points[0].norm() == 0.0 && n == 1 {
                // superattracting fixed point
                if o.multiplier != c(0.0, 0.0) {
                    failures.push(format!("fixed point 0 has multiplier {}", o.multiplier));
                }
                continue;
            }
            let e = rel(o.abs_multiplier(), expected);
            worst = worst.max(e);
            if e > 1e-9 {
                failures.push(format!("period {n}: |lambda| = {} vs {expected}", o.abs_multiplier()));
            }
        }
    }
    if elapsed >= 10.0 {
        failures.push(format!("runtime {elapsed:.2} s >= 10 s"));
    }
    verdict(
        "1",
        &failures,
        &format!("z^2, n <= 8: counts 2^n, max rel |lambda| error {worst:.1e} on the unit circle, {elapsed:.2} s"),
    );
}

#[test]
fn criterion_02_chebyshev_spectrum() {
    let p = poly("z^2-2");
    let s = multiplier_spectrum(&p, 8, &SpectrumOptions::default()).unwrap();
    let mut failures = Vec::new();
    if s.failure.is_some() {
        failures.push(format!("incomplete spectrum: {:?}", s.failure));
    }
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for entry in &s.periods {
        let n = entry.period;
        for o in entry.orbits.iter().filter(|o| o.kind == OrbitKind::Repelling) {
            if n == 1 && (o.points[0] - 2.0).norm() < 1e-9 {
                // beta = 2 sits on the endpoint of the semiconjugacy: P'(2) = 4
                if rel(o.abs_multiplier(), 4.0) > 1e-6 {
                    failures.push(format!("beta multiplier {}", o.multiplier));
                }
                continue;
            }
            let e = rel(o.abs_multiplier(), 2f64.powi(n as i32));
            worst = worst.max(e);
            checked += 1;
            if e > 1e-6 {
                failures.push(format!("period {n}: |lambda| = {}", o.abs_multiplier()));
            }
        }
    }
    verdict(
        "2",
        &failures,
        &format!("z^2-2, n <= 8: {checked} repelling orbits with |lambda| = 2^n (max rel {worst:.1e}), beta = 2 has |lambda| = 4"),
    );
}

#[test]
fn criterion_03_parabolic_multiplicity() {
    let p = poly("z^2+0.25");
    let options = SpectrumOptions::default();
    let mut failures = Vec::new();
    let pts = periodic_points(&p, 1, &options).unwrap();
    if pts.roots.len() != 1 || pts.roots[0].multiplicity != 2 {
        failures.push(format!("period-1 roots {:?}", pts.roots));
    }
    let orbits = exact_period_orbits(&p, 1, &options).unwrap();
    if orbits.len() != 1 {
        failures.push(format!("{} period-1 orbits", orbits.len()));
    } else {
        let o = &orbits[0];
        if (o.multiplier - 1.0).norm() > 1e-8 {
            failures.push(format!("multiplier {}", o.multiplier));
        }
        if o.kind != OrbitKind::Indifferent {
            failures.push(format!("kind {:?}", o.kind));
        }
    }
    let s = multiplier_spectrum(&p, 1, &options).unwrap();
    let cycles = indifferent_cycles(&s);
    if cycles.len() != 1 || !cycles[0].is_root_of_unity() {
        failures.push(format!("indifferent cycles {cycles:?}"));
    }
    verdict("3", &failures, "z^2+1/4: double fixed point 1/2, lambda = 1, indifferent, root of unity");
}

#[test]
fn criterion_04_omega_closed_form() {
    let p = poly("z^2");
    let start = Instant::now();
    let tree = build_tree(&p, c(2.0, 0.0), 12, 1 << 16).unwrap();
    let report = summability_report(&tree).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut oracle_sum = 0.0;
    for n in 1..=12 {
        let m = 2f64.powi(n);
        let omega = m * 2f64.powf((m - 1.0) / m);
        oracle_sum += 1.0 / omega;
        let e = rel(report.omega[n as usize - 1], omega);
        worst = worst.max(e);
        if e > 1e-9 {
            failures.push(format!("omega_{n} = {} vs {omega}", report.omega[n as usize - 1]));
        }
    }
    let s12 = report.partial_sums[11];
    if (s12 - oracle_sum).abs() > 1e-6 {
        failures.push(format!("S_12 = {s12} vs {oracle_sum}"));
    }
    if tree.levels[12].nodes.len() != 4096 {
        failures.push(format!("{} leaves", tree.levels[12].nodes.len()));
    }
    if elapsed >= 5.0 {
        failures.push(format!("runtime {elapsed:.2} s >= 5 s"));
    }
    verdict(
        "4",
        &failures,
        &format!("z^2, w0 = 2, depth 12: max rel omega error {worst:.1e}, S_12 = {s12:.9} (oracle {oracle_sum:.9}), {elapsed:.2} s"),
    );
}

#[test]
fn criterion_05_summability_verdicts() {
    let mut failures = Vec::new();
    for (spec, w0, depth) in [("z^2", 2.0, 12), ("z^2-2", 3.0, 12)] {
        let tree = build_tree(&poly(spec), c(w0, 0.0), depth, 1 << 16).unwrap();
        let v = summability_report(&tree).unwrap().verdict;
        if v != SummabilityVerdict::Satisfied {
            failures.push(format!("{spec}: {v:?}"));
        }
    }
    let harmonic: Vec<f64> = (1..=1200).map(|n| (n as f64).ln()).collect();
    let v = summability_from_log_omegas(&harmonic).unwrap().verdict;
    if v != SummabilityVerdict::NotSatisfied {
        failures.push(format!("omega_n = n: {v:?}"));
    }
    verdict(
        "5",
        &failures,
        "z^2 and z^2-2 satisfied on tested range; omega_n = n (1200 levels) not satisfied",
    );
}

#[test]
fn criterion_06_psi_identities() {
    let mut failures = Vec::new();
    let mut worst_fe: f64 = 0.0;
    for spec in ["z^2", "z^2-1", "z^2-2"] {
        let r = psi_check_grid(&poly(spec), 16, 16, (0.05, 0.5)).unwrap();
        worst_fe = worst_fe.max(r.max_residual);
        if r.entries.len() != 256 || r.max_residual >= 1e-6 {
            failures.push(format!("{spec}: functional equation residual {:.2e}", r.max_residual));
        }
        if !r.deck_exact {
            failures.push(format!("{spec}: deck periodicity not exact"));
        }
    }
    let p = poly("z^2-1");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_id: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=4usize);
        let im = rng.gen_range(0.05..0.5 / 2f64.powi(n as i32 - 1));
        let t = c(rng.gen_range(0.0..1.0), im);
        let r = verify_derivative_identity(&p, t, n).unwrap();
        worst_id = worst_id.max(r.residual);
        if r.residual >= 1e-4 {
            failures.push(format!("identity at t = {t}, n = {n}: {:.2e}", r.residual));
        }
    }
    verdict(
        "6",
        &failures,
        &format!("16x16 grids: max residual {worst_fe:.1e}, deck exact; 50 derivative identities: max {worst_id:.1e}"),
    );
}

#[test]
fn criterion_07_ray_landings() {
    let alpha = (1.0 - 5f64.sqrt()) / 2.0;
    let cases = [
        ("z^2", Angle::zero(), c(1.0, 0.0), 1e-6),
        ("z^2-2", Angle::zero(), c(2.0, 0.0), 1e-6),
        ("z^2-1", Angle::new(1, 3).unwrap(), c(alpha, 0.0), 1e-4),
        ("z^2-1", Angle::new(2, 3).unwrap(), c(alpha, 0.0), 1e-4),
    ];
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for (spec, theta, target, tol) in cases {
        let ray = trace_ray(&poly(spec), theta, 4.0, 1e-10, RayOptions::default()).unwrap();
        match ray.landing {
            Some(z) => {
                let e = (z - target).norm();
                parts.push(format!("{spec} {theta}: {e:.1e}"));
                if e > tol {
                    failures.push(format!("{spec} ray {theta} lands at {z}, {e:.2e} from {target}"));
                }
            }
            None => failures.push(format!(
                "{spec} ray {theta} undecided (estimate {:?}, spread {:?})",
                ray.landing_estimate, ray.landing_spread
            )),
        }
    }
    verdict("7", &failures, &format!("landing errors {}", parts.join(", ")));
}

#[test]
fn criterion_08_ergodics() {
    let ln2 = 2f64.ln();
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for spec in ["z^2", "z^2-2", "z^2-6"] {
        let p = poly(spec);
        let start = Instant::now();
        let z0 = c(p.escape_radius(), 0.0);
        let samples = brolin_sample(&p, z0, 200, 100_000, 42).unwrap();
        let e = lyapunov_estimate(&p, &samples, Some(42)).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        if spec == "z^2-6" {
            if !(e.chi > ln2 && e.hd_ratio < 1.0) {
                failures.push(format!("{spec}: chi = {}, HD ratio = {}", e.chi, e.hd_ratio));
            }
        } else {
            if (e.chi - ln2).abs() > 3.0 * e.stderr {
                failures.push(format!("{spec}: chi = {} +- {} vs ln 2", e.chi, e.stderr));
            }
            if elapsed >= 5.0 {
                failures.push(format!("{spec}: {elapsed:.2} s >= 5 s"));
            }
        }
        if !ruelle_check(&e).pass {
            failures.push(format!("{spec}: Ruelle check failed"));
        }
        parts.push(format!("{spec} chi = {:.5} +- {:.1e} ({elapsed:.2} s)", e.chi, e.stderr));
    }
    verdict("8", &failures, &parts.join(", "));
}

#[test]
fn criterion_09a_golden_mean_convergent() {
    let d = brjuno_data(&RotationNumber::golden(), 40, BrjunoRule::default()).unwrap();
    let mut failures = Vec::new();
    if d.flag != Some(BrjunoFlag::BrjunoConvergent) {
        failures.push(format!("flag {:?}", d.flag));
    }
    // q_0 = 1, q_1 = 1, q_2 = 2, ...: Fibonacci
    let (mut a, mut b) = (1u128, 1u128);
    if d.denominators.len() < 41 {
        failures.push(format!("only {} denominators", d.denominators.len()));
    }
    for (n, q) in d.denominators.iter().enumerate() {
        if q.to_string() != a.to_string() {
            failures.push(format!("q_{n} = {q}, expected {a}"));
            break;
        }
        (a, b) = (b, a + b);
    }
    if d.partial_quotients.iter().any(|x| x.to_string() != "1") {
        failures.push("partial quotients not all 1".into());
    }
    verdict("9a", &failures, &format!("golden mean: Fibonacci q_n to depth 40, flag {:?}", d.flag));
}

#[test]
fn criterion_09b_truncated_liouville_divergent() {
    let alpha: RotationNumber = "liouville:6".parse().unwrap();
    let d = brjuno_data(&alpha, 20, BrjunoRule::default()).unwrap();
    let mut failures = Vec::new();
    if d.flag != Some(BrjunoFlag::BrjunoDivergent) {
        failures.push(format!(
            "flag {:?}, B_N = {:.4} against threshold {} (the truncated sum is a rational with finite, small Brjuno sum)",
            d.flag,
            d.brjuno_sums.last().copied().unwrap_or(f64::NAN),
            d.rule.divergence_threshold
        ));
    }
    verdict("9b", &failures, "sum_{k<=6} 10^-k! at depth 20 flagged brjuno-divergent");
}

#[test]
fn criterion_09c_rational_short_circuit() {
    let d = brjuno_data(&"3/7".parse().unwrap(), 40, BrjunoRule::default()).unwrap();
    let mut failures = Vec::new();
    if d.root_of_unity.as_deref() != Some("3/7") {
        failures.push(format!("root of unity {:?}", d.root_of_unity));
    }
    let pq: Vec<String> = d.partial_quotients.iter().map(|x| x.to_string()).collect();
    if pq != ["2", "3"] {
        failures.push(format!("partial quotients {pq:?}"));
    }
    if d.flag.is_some() {
        failures.push(format!("flag {:?} on a rational", d.flag));
    }
    verdict("9c", &failures, "3/7 = [0; 2, 3] reported as a root of unity");
}

#[test]
fn criterion_10_small_multiplier_probe() {
    let mut failures = Vec::new();
    let s = multiplier_spectrum(&poly("z^2"), 10, &SpectrumOptions::default()).unwrap();
    let scan = small_multiplier_scan(&s, 0.1).unwrap();
    let expected: Vec<usize> = (1..=10usize)
        .filter(|&n| {
            let m = 2f64.powi(n as i32);
            1.0 < m && m <= (n as f64).powf(5.1)
        })
        .collect();
    if scan.periods_with_hits != expected {
        failures.push(format!("z^2 hit periods {:?}, expected {expected:?}", scan.periods_with_hits));
    }
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let lambda = Complex64::from_polar(1.0, std::f64::consts::TAU * alpha);
    let family = Polynomial::new(vec![c(0.0, 0.0), lambda, c(1.0, 0.0)]).unwrap();
    let s = multiplier_spectrum(&family, 8, &SpectrumOptions::default()).unwrap();
    let hits = small_multiplier_scan(&s, 0.1).unwrap().hits.len();
    if s.failure.is_some() {
        failures.push(format!("golden family spectrum incomplete: {:?}", s.failure));
    }
    if hits == 0 {
        failures.push("golden family: no hits".into());
    }
    verdict(
        "10",
        &failures,
        &format!("z^2 hit periods {expected:?}; golden family {hits} hits for n <= 8"),
    );
}

fn run(args: &[&str]) -> i32 {
    julialab::run(std::iter::once("julialab").chain(args.iter().copied()))
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Reruns a JSON artifact from its own embedded config and compares bytes.
fn replay(dir: &Path, name: &str, artifacts: &[&str], failures: &mut Vec<String>) {
    let main = dir.join(artifacts[0]);
    let json_path = dir.join(artifacts.last().unwrap());
    let doc: serde_json::Value = serde_json::from_slice(&read(&json_path)).unwrap();
    let command = doc["command"].as_str().unwrap().to_string();
    let cfg_path = dir.join(format!("{name}.config.json"));
    std::fs::write(&cfg_path, serde_json::to_vec(&doc["config"]).unwrap()).unwrap();
    let replay_main = dir.join(format!("replay-{}", artifacts[0]));
    let code = run(&[&command, "--config", cfg_path.to_str().unwrap(), "--out", replay_main.to_str().unwrap()]);
    if code != 0 {
        failures.push(format!("{name}: replay exited {code}"));
        return;
    }
    if read(&main) != read(&replay_main) {
        failures.push(format!("{name}: {} differs on replay", artifacts[0]));
    }
    if artifacts.len() > 1 {
        let replay_side = replay_main.with_extension("json");
        if read(&json_path) != read(&replay_side) {
            failures.push(format!("{name}: {} differs on replay", artifacts[1]));
        }
    }
}

#[test]
fn criterion_11_pipeline_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = |f: &str| d.join(f).to_str().unwrap().to_string();
    let mut failures = Vec::new();

    let a = out("pipeline.json");
    let b = out("pipeline-again.json");
    for path in [&a, &b] {
        let code = run(&["pipeline", "--poly", "z^2", "--nmax", "8", "--epsilon", "0.1", "--w0", "2,0", "--out", path]);
        if code != 0 {
            failures.push(format!("pipeline exited {code}"));
        }
    }
    if failures.is_empty() && read(Path::new(&a)) != read(Path::new(&b)) {
        failures.push("two pipeline runs differ".into());
    }

    let runs: [(&str, Vec<&str>, Vec<&str>); 8] = [
        ("spectrum", vec!["spectrum", "--poly", "z^2-1", "--nmax", "5"], vec!["spectrum.json"]),
        ("tree", vec!["tree", "--poly", "z^2-2", "--w0", "3,0", "--depth", "6"], vec!["tree.csv", "tree.json"]),
        ("ray", vec!["ray", "--poly", "z^2-1", "--angle", "1/3"], vec!["ray.csv", "ray.json"]),
        ("psi", vec!["psi-check", "--poly", "z^2-1", "--grid", "4x4", "--distortion-samples", "200"], vec!["psi.json"]),
        ("lyapunov", vec!["lyapunov", "--poly", "z^2-2", "--samples", "10000", "--seed", "9"], vec!["lyapunov.json"]),
        ("classify", vec!["classify", "--poly", "z^2+0.25", "--nmax", "4"], vec!["classify.json"]),
        ("brjuno", vec!["brjuno", "--alpha", "golden", "--depth", "30"], vec!["brjuno.json"]),
        (
            "render",
            vec!["render", "--poly", "z^2-1", "--res", "96", "--mode", "binary", "--rays", "1/3"],
            vec!["render.png", "render.json"],
        ),
    ];
    for (name, args, artifacts) in &runs {
        let target = out(artifacts[0]);
        let mut full = args.clone();
        full.extend(["--out", &target]);
        let code = run(&full);
        if code != 0 {
            failures.push(format!("{name} exited {code}"));
            continue;
        }
        replay(d, name, artifacts, &mut failures);
    }
    std::fs::copy(&a, d.join("pipeline-src.json")).unwrap();
    replay(d, "pipeline", &["pipeline-src.json"], &mut failures);
    verdict(
        "11",
        &failures,
        "pipeline on z^2 byte-identical across runs; every subcommand's artifacts reproduced from their embedded config",
    );
}
