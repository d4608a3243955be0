//! Complex polynomials of degree at least two.

use crate::error::{Error, Result};
use crate::numeric::ComplexDd;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;

/// Points of the plane. Non-finite components mean the value escaped.
pub type ComplexPoint = Complex64;

/// Relative zero-tolerance for the leading coefficient.
pub const LEADING_ZERO_TOLERANCE: f64 = 1e-12;
/// Absolute floor under the relative tolerance; `sqrt(f64::MIN_POSITIVE)`.
pub const LEADING_ABSOLUTE_FLOOR: f64 = 1.491_668_146_240_041_3e-154;

/// Result of a single evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointValue {
    Finite(ComplexPoint),
    Escaped,
}

impl PointValue {
    pub fn finite(self) -> Option<ComplexPoint> {
        match self {
            PointValue::Finite(z) => Some(z),
            PointValue::Escaped => None,
        }
    }
}

/// `P(z) = a_0 + a_1 z + ... + a_d z^d`, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct Polynomial {
    coefficients: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() < 3 {
            return Err(Error::InvalidPolynomial(format!(
                "degree must be at least 2, got {} coefficient(s)",
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidPolynomial("non-finite coefficient".into()));
        }
        let max = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let lead = coefficients.last().unwrap().norm();
        let tolerance = (LEADING_ZERO_TOLERANCE * max).max(LEADING_ABSOLUTE_FLOOR);
        if lead <= tolerance {
            return Err(Error::DegenerateLeadingCoefficient {
                magnitude: lead,
                tolerance,
            });
        }
        Ok(Self { coefficients })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `z^d + c`.
    pub fn unicritical(degree: usize, c: Complex64) -> Result<Self> {
        let mut coefficients = vec![Complex64::new(0.0, 0.0); degree + 1];
        coefficients[0] = c;
        coefficients[degree] = Complex64::new(1.0, 0.0);
        Self::new(coefficients)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn leading(&self) -> Complex64 {
        *self.coefficients.last().unwrap()
    }

    /// Raw Horner value, descending powers; may be non-finite.
    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = self.leading();
        for c in self.coefficients.iter().rev().skip(1) {
            acc = acc * z + c;
        }
        acc
    }

    /// Horner value with the escape flag on overflow.
    pub fn evaluate(&self, z: ComplexPoint) -> PointValue {
        let v = self.eval(z);
        if v.re.is_finite() && v.im.is_finite() {
            PointValue::Finite(v)
        } else {
            PointValue::Escaped
        }
    }

    /// `(P(z), P'(z))` in one Horner pass.
    #[inline]
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = self.leading();
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coefficients.iter().rev().skip(1) {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `(P, P', P'')` in one Horner pass.
    pub fn eval_with_two_derivatives(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let mut p = self.leading();
        let mut dp = Complex64::new(0.0, 0.0);
        let mut ddp = Complex64::new(0.0, 0.0);
        for c in self.coefficients.iter().rev().skip(1) {
            ddp = ddp * z + dp;
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp, ddp * 2.0)
    }

    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        self.eval_with_derivative(z).1
    }

    /// Horner evaluation in double-double arithmetic.
    pub fn eval_dd(&self, z: ComplexDd) -> ComplexDd {
        let mut acc = ComplexDd::from_complex(self.leading());
        for c in self.coefficients.iter().rev().skip(1) {
            acc = acc.mul(z).add(ComplexDd::from_complex(*c));
        }
        acc
    }

    /// Radius outside which every orbit escapes monotonically:
    /// `2 * max(1, (1 + sum_{i<d} |a_i|) / |a_d|)`.
    pub fn escape_radius(&self) -> f64 {
        let lower: f64 = self.coefficients[..self.degree()]
            .iter()
            .map(|c| c.norm())
            .sum();
        2.0 * (1.0f64).max((1.0 + lower) / self.leading().norm())
    }

    /// Hex digest of the coefficient bits; identifies a polynomial in reports.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for c in &self.coefficients {
            // +0.0 normalizes negative zero
            hasher.update((c.re + 0.0).to_le_bytes());
            hasher.update((c.im + 0.0).to_le_bytes());
        }
        hex::encode(&hasher.finalize()[..16])
    }

    /// Coefficients of `A ∘ P ∘ A^{-1}` for `A(z) = a z + b`.
    pub fn conjugate_affine(&self, a: Complex64, b: Complex64) -> Result<Self> {
        // A^{-1}(w) = (w - b)/a ; expand P((w - b)/a) as a polynomial in w
        let inv_a = a.inv();
        let shift = -b * inv_a;
        let d = self.degree();
        let mut out = vec![Complex64::new(0.0, 0.0); d + 1];
        // running power (inv_a w + shift)^k
        let mut power = vec![Complex64::new(1.0, 0.0)];
        for (k, c) in self.coefficients.iter().enumerate() {
            if k > 0 {
                let mut next = vec![Complex64::new(0.0, 0.0); power.len() + 1];
                for (j, p) in power.iter().enumerate() {
                    next[j] += p * shift;
                    next[j + 1] += p * inv_a;
                }
                power = next;
            }
            for (j, p) in power.iter().enumerate() {
                out[j] += c * p;
            }
        }
        for c in out.iter_mut() {
            *c *= a;
        }
        out[0] += b;
        Self::new(out)
    }

    /// Critical points, i.e. roots of `P'`.
    pub fn critical_points(&self) -> Vec<Complex64> {
        let deriv: Vec<Complex64> = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
        crate::roots::polynomial_roots(&deriv)
    }
}

impl TryFrom<Vec<Complex64>> for Polynomial {
    type Error = Error;
    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        Polynomial::new(v)
    }
}

impl From<Polynomial> for Vec<Complex64> {
    fn from(p: Polynomial) -> Self {
        p.coefficients
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.coefficients.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_complex(*c))?;
        }
        write!(f, "]")
    }
}

fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` and the pair form `re,im`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    if let Some((re, im)) = s.split_once(',') {
        let re = parse_real(re)?;
        let im = parse_real(im)?;
        return Ok(Complex64::new(re, im));
    }
    if let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) {
        // split at the last sign that is not an exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re_part, im_part) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im_part {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => parse_real(other)?,
        };
        let re = if re_part.is_empty() {
            0.0
        } else {
            parse_real(re_part)?
        };
        return Ok(Complex64::new(re, im));
    }
    Ok(Complex64::new(parse_real(&s)?, 0.0))
}

fn parse_real(s: &str) -> Result<f64> {
    let s = s.strip_prefix('+').unwrap_or(s);
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("not a finite number: {s:?}")))
}

impl FromStr for Polynomial {
    type Err = Error;

    /// Either a coefficient list in ascending powers (`[-2, 0, 1]`,
    /// entries real, complex literals or `[re, im]` pairs) or the shorthand
    /// `z^d`, `z^d + c`, `z^d - c` with `c` a number, complex literal or `re,im`.
    fn from_str(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            return Polynomial::new(parse_coefficient_list(inner)?);
        }
        let rest = s
            .strip_prefix("z^")
            .ok_or_else(|| Error::Parse(format!("unrecognized polynomial {text:?}")))?;
        let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 {
            return Err(Error::Parse(format!("missing degree in {text:?}")));
        }
        let degree: usize = rest[..digits]
            .parse()
            .map_err(|_| Error::Parse(format!("bad degree in {text:?}")))?;
        let tail = &rest[digits..];
        let c = if tail.is_empty() {
            Complex64::new(0.0, 0.0)
        } else if let Some(c) = tail.strip_prefix('+') {
            parse_complex(c)?
        } else if tail.starts_with('-') {
            // the sign belongs to the real part only: z^2-0.1+0.6i
            parse_complex(tail)?
        } else {
            return Err(Error::Parse(format!("expected '+ c' or '- c' in {text:?}")));
        };
        Polynomial::unicritical(degree, c)
    }
}

fn parse_coefficient_list(inner: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        if let Some(pair) = rest.strip_prefix('[') {
            let end = pair
                .find(']')
                .ok_or_else(|| Error::Parse("unterminated [re, im] pair".into()))?;
            out.push(parse_complex(&pair[..end])?);
            rest = &pair[end + 1..];
        } else {
            let end = rest.find(',').unwrap_or(rest.len());
            out.push(parse_complex(&rest[..end])?);
            rest = &rest[end..];
        }
        rest = rest.strip_prefix(',').unwrap_or(rest);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive(p: &Polynomial, z: Complex64) -> Complex64 {
        p.coefficients()
            .iter()
            .enumerate()
            .map(|(k, a)| a * z.powu(k as u32))
            .sum()
    }

    #[test]
    fn evaluates_simple_cases() {
        let cheb = Polynomial::from_real(&[-2.0, 0.0, 1.0]).unwrap();
        assert_eq!(cheb.evaluate(c(2.0, 0.0)), PointValue::Finite(c(2.0, 0.0)));
        let sq = Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(sq.evaluate(c(0.0, 1.0)), PointValue::Finite(c(-1.0, 0.0)));
    }

    #[test]
    fn matches_naive_evaluation() {
        let p: Polynomial = "z^2 + 0,1".parse().unwrap();
        let z = c(0.3, 0.1);
        let v = p.evaluate(z).finite().unwrap();
        let w = naive(&p, z);
        assert!((v - w).norm() <= 1e-15 * w.norm());
    }

    #[test]
    fn overflow_is_flagged() {
        let p = Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.evaluate(c(1e200, 0.0)), PointValue::Escaped);
    }

    #[test]
    fn escape_radius_formula() {
        assert_eq!(Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap().escape_radius(), 2.0);
        assert_eq!(Polynomial::from_real(&[-2.0, 0.0, 1.0]).unwrap().escape_radius(), 6.0);
    }

    #[test]
    fn rejects_degenerate_leading_coefficient() {
        let err = Polynomial::from_real(&[0.0, 0.0, 1e-300]).unwrap_err();
        assert!(matches!(err, Error::DegenerateLeadingCoefficient { .. }));
        let err = Polynomial::from_real(&[1.0, 0.0, 1e-13]).unwrap_err();
        assert!(matches!(err, Error::DegenerateLeadingCoefficient { .. }));
        assert!(Polynomial::from_real(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn parses_literals() {
        let list: Polynomial = "[-2, 0, 1]".parse().unwrap();
        assert_eq!(list, Polynomial::from_real(&[-2.0, 0.0, 1.0]).unwrap());
        let short: Polynomial = "z^2 - 2".parse().unwrap();
        assert_eq!(short, list);
        let quarter: Polynomial = "z^2+0.25".parse().unwrap();
        assert_eq!(quarter.coefficients()[0], c(0.25, 0.0));
        let pair: Polynomial = "z^2 + -0.12,0.74".parse().unwrap();
        assert_eq!(pair.coefficients()[0], c(-0.12, 0.74));
        let cubic: Polynomial = "[0, 0.5-0.25i, [0, 1], 1]".parse().unwrap();
        assert_eq!(cubic.coefficients()[1], c(0.5, -0.25));
        assert_eq!(cubic.coefficients()[2], c(0.0, 1.0));
        let mixed: Polynomial = "z^2-0.12+0.75i".parse().unwrap();
        assert_eq!(mixed.coefficients()[0], c(-0.12, 0.75));
        let negative: Polynomial = "z^2-i".parse().unwrap();
        assert_eq!(negative.coefficients()[0], c(0.0, -1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), c(1e-3, 20.0));
        assert!("w^2".parse::<Polynomial>().is_err());
    }

    #[test]
    fn display_round_trips() {
        let p: Polynomial = "[0.25-1.5i, 0, 1]".parse().unwrap();
        let q: Polynomial = p.to_string().parse().unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn affine_conjugate_is_consistent() {
        let p: Polynomial = "z^2 - 1".parse().unwrap();
        let (a, b) = (c(1.5, -0.5), c(0.25, 2.0));
        let q = p.conjugate_affine(a, b).unwrap();
        let z = c(0.4, -0.3);
        // Q(A z) = A P(z)
        let lhs = q.eval(a * z + b);
        let rhs = a * p.eval(z) + b;
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn fingerprint_distinguishes() {
        let a: Polynomial = "z^2-1".parse().unwrap();
        let b: Polynomial = "z^2-2".parse().unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), "[-1, 0, 1]".parse::<Polynomial>().unwrap().fingerprint());
    }
}
