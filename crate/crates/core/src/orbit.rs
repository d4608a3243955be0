//! Forward orbits with chain-rule derivative accumulation.

use crate::numeric::ScaledComplex;
use crate::poly::{ComplexPoint, Polynomial};
use num_complex::Complex64;

/// `start, P(start), ..., P^n(start)` together with `(P^n)'(start)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSegment {
    pub start: ComplexPoint,
    /// `values[k] = P^k(start)`; shorter than `requested + 1` when escaped.
    pub values: Vec<ComplexPoint>,
    /// Product of `P'(values[k])` over the computed steps.
    pub derivative: ScaledComplex,
    pub requested: usize,
    pub escaped: bool,
}

impl OrbitSegment {
    /// Number of steps actually taken.
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn end(&self) -> ComplexPoint {
        *self.values.last().unwrap()
    }

    /// Iterates until `n` steps are done or `|P^k(z)| > bailout`.
    pub fn compute(poly: &Polynomial, z: ComplexPoint, n: usize, bailout: f64) -> Self {
        let mut values = Vec::with_capacity(n + 1);
        values.push(z);
        let mut derivative = ScaledComplex::ONE;
        let mut current = z;
        let mut escaped = false;
        for _ in 0..n {
            if current.norm() > bailout {
                escaped = true;
                break;
            }
            let (next, dp) = poly.eval_with_derivative(current);
            if !(next.re.is_finite() && next.im.is_finite()) {
                escaped = true;
                break;
            }
            derivative *= dp;
            values.push(next);
            current = next;
        }
        OrbitSegment {
            start: z,
            values,
            derivative,
            requested: n,
            escaped,
        }
    }
}

/// `n` steps of the orbit of `z`, truncated once it leaves the escape disk.
pub fn iterate_with_derivative(poly: &Polynomial, z: ComplexPoint, n: usize) -> OrbitSegment {
    OrbitSegment::compute(poly, z, n, poly.escape_radius())
}

/// Like [`iterate_with_derivative`] but only stops on floating overflow.
pub fn iterate_unbounded(poly: &Polynomial, z: ComplexPoint, n: usize) -> OrbitSegment {
    OrbitSegment::compute(poly, z, n, f64::INFINITY)
}

/// `(P^n(z), (P^n)'(z))` without storing the orbit.
#[inline]
pub fn iterate_value_and_derivative(poly: &Polynomial, z: Complex64, n: usize) -> (Complex64, Complex64) {
    let mut u = z;
    let mut g = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        let (p, dp) = poly.eval_with_derivative(u);
        g *= dp;
        u = p;
    }
    (u, g)
}
