//! Overflow-safe products and a small double-double type.
//!
//! [`ScaledComplex`] stores `mantissa * 2^exponent`. Rescaling only ever
//! multiplies by exact powers of two, so while the value stays inside the
//! double range it is bit-identical to the plain complex product.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::ops::{Mul, MulAssign};

const RESCALE_HI: f64 = 1.157_920_892_373_162e77; // 2^256
const RESCALE_LO: f64 = 8.636_168_555_094_445e-78; // 2^-256

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledComplex {
    mantissa: Complex64,
    exponent: i64,
}

impl ScaledComplex {
    pub const ONE: ScaledComplex = ScaledComplex {
        mantissa: Complex64::new(1.0, 0.0),
        exponent: 0,
    };

    pub fn new(z: Complex64) -> Self {
        Self {
            mantissa: z,
            exponent: 0,
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        let a = self.mantissa.re.abs().max(self.mantissa.im.abs());
        if a == 0.0 || !a.is_finite() {
            return self;
        }
        if !(RESCALE_LO..=RESCALE_HI).contains(&a) {
            let k = a.log2().floor() as i32;
            self.mantissa *= pow2(-k);
            self.exponent += k as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    /// `ln|value|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.exponent as f64 * LN_2
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Plain complex value; components become infinite past the double range.
    pub fn to_complex(&self) -> Complex64 {
        if self.exponent == 0 {
            return self.mantissa;
        }
        let e = self.exponent.clamp(-3000, 3000) as i32;
        // two half-steps keep each factor representable
        let half = e / 2;
        self.mantissa * pow2(half) * pow2(e - half)
    }

    pub fn abs(&self) -> f64 {
        self.to_complex().norm()
    }

    /// `numerator / self` for a plain complex numerator, evaluated without
    /// forming `self` as a double.
    pub fn divide_into(&self, numerator: Complex64) -> Complex64 {
        let q = numerator / self.mantissa;
        let e = (-self.exponent).clamp(-3000, 3000) as i32;
        let half = e / 2;
        q * pow2(half) * pow2(e - half)
    }
}

impl Mul<Complex64> for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, rhs: Complex64) -> ScaledComplex {
        ScaledComplex {
            mantissa: self.mantissa * rhs,
            exponent: self.exponent,
        }
        .normalized()
    }
}

impl MulAssign<Complex64> for ScaledComplex {
    fn mul_assign(&mut self, rhs: Complex64) {
        *self = *self * rhs;
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, rhs: ScaledComplex) -> ScaledComplex {
        ScaledComplex {
            mantissa: self.mantissa * rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
        .normalized()
    }
}

/// `a / b` without the overflow of `|b|^2` in the textbook formula.
#[inline]
pub fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.re.abs().max(b.im.abs());
    if !(s > 1e150 || (s < 1e-150 && s > 0.0)) {
        return a / b;
    }
    let k = s.log2().floor() as i32;
    let scale = pow2(-k);
    (a * scale) / (b * scale)
}

/// Exact power of two for |k| <= 1000 (clamps beyond, where it saturates anyway).
fn pow2(k: i32) -> f64 {
    let k = k.clamp(-1074, 1023);
    if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[allow(clippy::should_implement_trait)]
impl DoubleDouble {
    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Self { hi, lo }
    }

    pub fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = two_sum(p, e);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDd {
    pub re: DoubleDouble,
    pub im: DoubleDouble,
}

#[allow(clippy::should_implement_trait)]
impl ComplexDd {
    pub fn from_complex(z: Complex64) -> Self {
        Self {
            re: DoubleDouble::from_f64(z.re),
            im: DoubleDouble::from_f64(z.im),
        }
    }

    pub fn add(self, o: Self) -> Self {
        Self {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    pub fn sub(self, o: Self) -> Self {
        Self {
            re: self.re.sub(o.re),
            im: self.im.sub(o.im),
        }
    }

    pub fn mul(self, o: Self) -> Self {
        Self {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_product_matches_plain_product_in_range() {
        let mut s = ScaledComplex::ONE;
        let mut p = Complex64::new(1.0, 0.0);
        for k in 0..40 {
            let f = Complex64::new(1.3 + 0.01 * k as f64, -0.7);
            s *= f;
            p *= f;
        }
        assert_eq!(s.to_complex(), p);
    }

    #[test]
    fn scaled_survives_overflow() {
        let mut s = ScaledComplex::ONE;
        for _ in 0..2000 {
            s *= Complex64::new(0.0, 4.0);
        }
        // 4^2000 = 2^4000, i^2000 = 1
        assert!((s.ln_abs() - 4000.0 * LN_2).abs() < 1e-9);
        assert!(s.arg().abs() < 1e-9);
        assert!(s.to_complex().re.is_infinite());
    }

    #[test]
    fn cdiv_handles_huge_denominators() {
        let a = Complex64::new(3e200, -1e200);
        let b = Complex64::new(1e200, 0.0);
        let q = cdiv(a, b);
        assert!((q - Complex64::new(3.0, -1.0)).norm() < 1e-15);
        let tiny = cdiv(Complex64::new(1e-160, 0.0), Complex64::new(0.0, 1e-160));
        assert!((tiny - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_stays_zero() {
        let s = ScaledComplex::new(Complex64::new(3.0, 1.0)) * Complex64::new(0.0, 0.0);
        assert!(s.is_zero());
        assert_eq!(s.ln_abs(), f64::NEG_INFINITY);
    }

    #[test]
    fn double_double_recovers_cancelled_bits() {
        let a = DoubleDouble::from_f64(1.0);
        let tiny = DoubleDouble::from_f64(1e-20);
        let s = a.add(tiny).sub(a);
        assert!((s.to_f64() - 1e-20).abs() < 1e-35);
    }
}
