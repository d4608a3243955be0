use crate::error::{Error, Result};
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Exact rational angle `num/den` in turns, reduced and in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Angle {
    num: u64,
    den: u64,
}

impl Angle {
    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parse("angle denominator must be positive".into()));
        }
        let num = num.rem_euclid(den as i64) as u64;
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn turns(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `d^n * self mod 1`.
    pub fn multiplied(&self, d: usize, n: usize) -> Angle {
        let mut p = self.num as u128;
        let q = self.den as u128;
        for _ in 0..n {
            p = p * d as u128 % q;
        }
        Angle {
            num: p as u64,
            den: self.den,
        }
        .reduced()
    }

    fn reduced(self) -> Self {
        let g = self.num.gcd(&self.den);
        Self {
            num: self.num / g,
            den: self.den / g,
        }
    }

    /// `(preperiod, period)` of the angle under multiplication by `d`.
    pub fn orbit_type(&self, d: usize) -> (usize, usize) {
        let q = self.den as u128;
        let mut p = self.num as u128;
        let mut seen = std::collections::HashMap::new();
        let mut k = 0;
        loop {
            if let Some(&first) = seen.get(&p) {
                return (first, k - first);
            }
            seen.insert(p, k);
            p = p * d as u128 % q;
            k += 1;
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Angle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad angle '{s}', expected p/q"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: u64 = q.trim().parse().map_err(|_| bad())?;
                Angle::new(p, q)
            }
            None => Angle::new(s.parse().map_err(|_| bad())?, 1),
        }
    }
}

impl TryFrom<String> for Angle {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Angle> for String {
    fn from(a: Angle) -> String {
        a.to_string()
    }
}

/// Angle of a ray: exact when rational, a plain double otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayAngle {
    Rational(Angle),
    Real(f64),
}

impl RayAngle {
    pub fn turns(&self) -> f64 {
        match self {
            RayAngle::Rational(a) => a.turns(),
            RayAngle::Real(x) => *x,
        }
    }

    /// `d^n * angle mod 1` in turns.
    pub fn multiplied_turns(&self, d: usize, n: usize) -> f64 {
        match self {
            RayAngle::Rational(a) => a.multiplied(d, n).turns(),
            RayAngle::Real(x) => {
                let mut t = *x;
                for _ in 0..n {
                    t = (t * d as f64).rem_euclid(1.0);
                }
                t
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reduce() {
        let a: Angle = "2/6".parse().unwrap();
        assert_eq!((a.numerator(), a.denominator()), (1, 3));
        let b: Angle = "-1/3".parse().unwrap();
        assert_eq!(b.to_string(), "2/3");
        assert_eq!("0".parse::<Angle>().unwrap(), Angle::zero());
        assert!("1/0".parse::<Angle>().is_err());
    }

    #[test]
    fn doubling_orbits() {
        let third: Angle = "1/3".parse().unwrap();
        assert_eq!(third.multiplied(2, 1).to_string(), "2/3");
        assert_eq!(third.orbit_type(2), (0, 2));
        assert_eq!(Angle::zero().orbit_type(2), (0, 1));
        // 1/6 -> 1/3 -> 2/3 -> 1/3
        assert_eq!("1/6".parse::<Angle>().unwrap().orbit_type(2), (1, 2));
        assert_eq!("1/4".parse::<Angle>().unwrap().orbit_type(2), (2, 1));
    }
}
