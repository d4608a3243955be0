//! Backward orbit trees, their level minima `omega_n` of `|(P^n)'|`, and
//! the summability diagnostic for `sum 1/omega_n`.

use crate::boettcher::green;
use crate::error::{Error, Result};
use crate::poly::{ComplexPoint, Polynomial};
use crate::roots::{polynomial_roots, quadratic_roots};
use crate::spectrum::{growth_check, GrowthReport, MultiplierSpectrum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Smallest admissible potential of the base point.
pub const MIN_BASE_GREEN: f64 = 1e-6;
/// Default node budget for the deepest level.
pub const DEFAULT_TREE_BUDGET: u64 = 1 << 16;
/// Tail ratios must stay below `1 - SUMMABILITY_MARGIN`.
pub const SUMMABILITY_MARGIN: f64 = 1e-3;

/// The `d` solutions of `P(z) = w`, with multiplicity, sorted by argument.
pub fn preimages(poly: &Polynomial, w: ComplexPoint) -> Result<Vec<ComplexPoint>> {
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Precondition(format!("preimages need finite w, got {w}")));
    }
    let a = poly.coefficients();
    let mut roots = if poly.degree() == 2 {
        quadratic_roots(a[2], a[1], a[0] - w).to_vec()
    } else {
        let mut shifted = a.to_vec();
        shifted[0] -= w;
        polynomial_roots(&shifted)
    };
    let tol = 1e-10 * (1.0 + w.norm());
    for z in roots.iter_mut() {
        let mut r = (poly.eval(*z) - w).norm();
        let mut polish = 0;
        while !(r <= tol) && polish < 4 {
            let (p, dp) = poly.eval_with_derivative(*z);
            let step = (p - w) / dp;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *z -= step;
            r = (poly.eval(*z) - w).norm();
            polish += 1;
        }
        if !(r <= tol) {
            return Err(Error::PreimageSolver { w });
        }
    }
    roots.sort_by(|x, y| x.arg().total_cmp(&y.arg()).then(x.norm().total_cmp(&y.norm())));
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub z: ComplexPoint,
    /// `ln|(P^n)'(z)|`; `-inf` below a critical point.
    pub log_derivative: f64,
    /// Index into the previous level; `None` at the root.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageLevel {
    pub depth: usize,
    pub nodes: Vec<TreeNode>,
    /// `min ln|(P^n)'|` over the level.
    pub log_omega: f64,
}

impl PreimageLevel {
    /// `omega_n`; infinite past the double range.
    pub fn omega(&self) -> f64 {
        self.log_omega.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageTree {
    pub fingerprint: String,
    pub w0: ComplexPoint,
    pub green_w0: f64,
    pub levels: Vec<PreimageLevel>,
}

impl PreimageTree {
    /// `ln omega_n` for `n = 1..=depth`.
    pub fn log_omegas(&self) -> Vec<f64> {
        self.levels.iter().skip(1).map(|l| l.log_omega).collect()
    }
}

fn level_minimum(nodes: &[TreeNode]) -> f64 {
    nodes.iter().map(|n| n.log_derivative).fold(f64::INFINITY, f64::min)
}

/// Full backward orbit of `w0` down to `depth`, breadth first.
pub fn build_tree(poly: &Polynomial, w0: ComplexPoint, depth: usize, budget: u64) -> Result<PreimageTree> {
    let d = poly.degree() as u128;
    let needed = (0..depth).try_fold(1u128, |acc, _| acc.checked_mul(d)).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "preimage tree level",
            needed,
            budget,
        });
    }
    let g = green(poly, w0);
    if g.undecided || g.g < MIN_BASE_GREEN {
        return Err(Error::BaseInFilledSet {
            green: g.g,
            threshold: MIN_BASE_GREEN,
        });
    }
    let root = TreeNode {
        z: w0,
        log_derivative: 0.0,
        parent: None,
    };
    let mut levels = vec![PreimageLevel {
        depth: 0,
        nodes: vec![root],
        log_omega: 0.0,
    }];
    for n in 1..=depth {
        let prev = &levels[n - 1].nodes;
        let children: Vec<Vec<TreeNode>> = prev
            .par_iter()
            .enumerate()
            .map(|(i, node)| {
                let zs = preimages(poly, node.z)?;
                Ok(zs
                    .into_iter()
                    .map(|z| TreeNode {
                        z,
                        log_derivative: node.log_derivative + poly.derivative_at(z).norm().ln(),
                        parent: Some(i),
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let nodes: Vec<TreeNode> = children.into_iter().flatten().collect();
        let log_omega = level_minimum(&nodes);
        levels.push(PreimageLevel {
            depth: n,
            nodes,
            log_omega,
        });
    }
    Ok(PreimageTree {
        fingerprint: poly.fingerprint(),
        w0,
        green_w0: g.g,
        levels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SummabilityVerdict {
    /// Criterion satisfied on the tested range (finite-range diagnostic).
    Satisfied,
    NotSatisfied,
    /// Some `omega_n = 0`: a critical point sits on the tree.
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    /// `omega_n`, `n = 1..=N`.
    pub omega: Vec<f64>,
    pub log_omega: Vec<f64>,
    /// `S_N = sum_{n <= N} 1/omega_n`.
    pub partial_sums: Vec<f64>,
    /// `omega_n / omega_{n+1}`, length `N - 1`.
    pub tail_ratios: Vec<f64>,
    /// `omega_n` is nondecreasing.
    pub monotone: bool,
    /// Levels `n` with `omega_{n+1} < omega_n`.
    pub monotonicity_violations: Vec<usize>,
    /// Largest nondecreasing minorant, `min_{m >= n} omega_m`.
    pub monotone_envelope: Vec<f64>,
    /// Levels with `omega_n = 0`.
    pub inapplicable_levels: Vec<usize>,
    pub verdict: SummabilityVerdict,
    pub rule: String,
}

/// Summability diagnostic from `ln omega_n`, `n = 1..=N`.
pub fn summability_from_log_omegas(log_omega: &[f64]) -> Result<SummabilityReport> {
    if log_omega.len() < 3 {
        return Err(Error::Precondition(format!(
            "summability report needs at least 3 levels, got {}",
            log_omega.len()
        )));
    }
    let omega: Vec<f64> = log_omega.iter().map(|l| l.exp()).collect();
    let mut partial_sums = Vec::with_capacity(omega.len());
    let mut sum = 0.0;
    for l in log_omega {
        sum += (-l).exp();
        partial_sums.push(sum);
    }
    let tail_ratios: Vec<f64> = log_omega.windows(2).map(|w| (w[0] - w[1]).exp()).collect();
    let monotonicity_violations: Vec<usize> = log_omega
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] < w[0])
        .map(|(k, _)| k + 1)
        .collect();
    let mut monotone_envelope = omega.clone();
    for k in (0..monotone_envelope.len().saturating_sub(1)).rev() {
        monotone_envelope[k] = monotone_envelope[k].min(monotone_envelope[k + 1]);
    }
    let inapplicable_levels: Vec<usize> = log_omega
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == f64::NEG_INFINITY)
        .map(|(k, _)| k + 1)
        .collect();
    let tail_start = tail_ratios.len() - tail_ratios.len().div_ceil(3);
    let bound = 1.0 - SUMMABILITY_MARGIN;
    let verdict = if !inapplicable_levels.is_empty() {
        SummabilityVerdict::Inapplicable
    } else if tail_ratios[tail_start..].iter().all(|r| *r < bound) {
        SummabilityVerdict::Satisfied
    } else {
        SummabilityVerdict::NotSatisfied
    };
    Ok(SummabilityReport {
        monotone: monotonicity_violations.is_empty(),
        omega,
        log_omega: log_omega.to_vec(),
        partial_sums,
        tail_ratios,
        monotonicity_violations,
        monotone_envelope,
        inapplicable_levels,
        verdict,
        rule: format!(
            "satisfied on tested range iff omega_n/omega_(n+1) < {bound} for every ratio in the last third \
             (n >= {}); finite-range diagnostic, not a proof",
            tail_start + 1
        ),
    })
}

pub fn summability_report(tree: &PreimageTree) -> Result<SummabilityReport> {
    summability_from_log_omegas(&tree.log_omegas())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaRow {
    pub n: usize,
    pub omega: f64,
    /// `omega_n / n^(1 + epsilon/3)`.
    pub ratio: f64,
}

/// Spectrum growth next to polynomial lower bounds on `omega_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossReport {
    pub fingerprint: String,
    pub epsilon: f64,
    pub omega_exponent: f64,
    pub rows: Vec<OmegaRow>,
    /// `min_n omega_n / n^(1 + epsilon/3)`.
    pub c2_star: f64,
    pub c2_star_level: usize,
    pub growth: GrowthReport,
    /// `C* > 0` and `C2* > 0` on the tested range.
    pub consistent: bool,
}

pub fn theorem_pipeline_report(spectrum: &MultiplierSpectrum, tree: &PreimageTree, epsilon: f64) -> Result<CrossReport> {
    if spectrum.fingerprint != tree.fingerprint {
        return Err(Error::FingerprintMismatch {
            left: spectrum.fingerprint.clone(),
            right: tree.fingerprint.clone(),
        });
    }
    let growth = growth_check(spectrum, epsilon)?;
    let exponent = 1.0 + epsilon / 3.0;
    let rows: Vec<OmegaRow> = tree
        .levels
        .iter()
        .skip(1)
        .map(|l| OmegaRow {
            n: l.depth,
            omega: l.omega(),
            ratio: (l.log_omega - exponent * (l.depth as f64).ln()).exp(),
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::Precondition("tree has no levels below the root".into()));
    }
    let best = rows.iter().min_by(|a, b| a.ratio.total_cmp(&b.ratio)).unwrap();
    Ok(CrossReport {
        fingerprint: tree.fingerprint.clone(),
        epsilon,
        omega_exponent: exponent,
        c2_star: best.ratio,
        c2_star_level: best.n,
        consistent: best.ratio > 0.0 && growth.c_star > 0.0,
        rows,
        growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn preimages_of_simple_maps() {
        let sq: Polynomial = "z^2".parse().unwrap();
        let r = preimages(&sq, c(4.0, 0.0)).unwrap();
        assert_eq!(r.len(), 2);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert_eq!(re, vec![-2.0, 2.0]);
        let cheb: Polynomial = "z^2-2".parse().unwrap();
        let r = preimages(&cheb, c(2.0, 0.0)).unwrap();
        assert!(r.iter().any(|z| (z - 2.0).norm() < 1e-15));
        assert!(r.iter().any(|z| (z + 2.0).norm() < 1e-15));
        let shifted: Polynomial = "z^2 + i".parse().unwrap();
        for z in preimages(&shifted, c(0.0, 0.0)).unwrap() {
            assert!((z * z - c(0.0, -1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn cubic_preimages_have_small_residual() {
        let p = Polynomial::new(vec![c(0.2, 0.0), c(0.1, -0.3), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let w = c(0.7, 2.0);
        let r = preimages(&p, w).unwrap();
        assert_eq!(r.len(), 3);
        for z in r {
            assert!((p.eval(z) - w).norm() <= 1e-10 * (1.0 + w.norm()));
        }
    }

    #[test]
    fn square_tree_first_levels() {
        let p: Polynomial = "z^2".parse().unwrap();
        let t = build_tree(&p, c(2.0, 0.0), 2, DEFAULT_TREE_BUDGET).unwrap();
        assert_eq!(t.levels[1].nodes.len(), 2);
        assert_eq!(t.levels[2].nodes.len(), 4);
        assert!((t.levels[1].omega() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((t.levels[2].omega() - 4.0 * 2f64.powf(0.75)).abs() < 1e-12);
        assert!((t.levels[2].omega() - 6.7272).abs() < 1e-4);
    }

    #[test]
    fn base_point_in_filled_set_is_rejected() {
        let p: Polynomial = "z^2".parse().unwrap();
        assert!(matches!(
            build_tree(&p, c(0.0, 0.0), 3, DEFAULT_TREE_BUDGET),
            Err(Error::BaseInFilledSet { .. })
        ));
        assert!(matches!(
            build_tree(&p, c(2.0, 0.0), 17, DEFAULT_TREE_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn zero_derivative_marks_level_inapplicable() {
        let r = summability_from_log_omegas(&[1.0, f64::NEG_INFINITY, 3.0, 4.0]).unwrap();
        assert_eq!(r.verdict, SummabilityVerdict::Inapplicable);
        assert_eq!(r.inapplicable_levels, vec![2]);
        // 0 escapes under z^2 - 6, so w0 = P(0) = -6 is admissible and its
        // first level is the double preimage 0
        let p: Polynomial = "z^2-6".parse().unwrap();
        let t = build_tree(&p, c(-6.0, 0.0), 3, DEFAULT_TREE_BUDGET).unwrap();
        assert_eq!(t.levels[1].nodes.len(), 2);
        assert_eq!(t.levels[1].log_omega, f64::NEG_INFINITY);
        let r = summability_report(&t).unwrap();
        assert_eq!(r.verdict, SummabilityVerdict::Inapplicable);
        assert_eq!(r.inapplicable_levels, vec![1, 2, 3]);
        assert!(summability_from_log_omegas(&[0.5, 0.2]).is_err());
    }

    #[test]
    fn envelope_and_violations() {
        let logs: Vec<f64> = [2.0f64, 1.0, 3.0, 4.0].iter().map(|x| x.ln()).collect();
        let r = summability_from_log_omegas(&logs).unwrap();
        assert!(!r.monotone);
        assert_eq!(r.monotonicity_violations, vec![1]);
        let env: Vec<f64> = r.monotone_envelope.iter().map(|x| (x * 1e12).round() / 1e12).collect();
        assert_eq!(env, vec![1.0, 1.0, 3.0, 4.0]);
        assert_eq!(r.tail_ratios.len(), 3);
    }
}
