//! Rotation numbers, continued fractions and Brjuno sums.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const MAX_DEPTH: usize = 60;
/// Rationals with a denominator up to this are reported as roots of unity.
pub const ROOT_OF_UNITY_MAX_DENOMINATOR: u64 = 1_000_000;
pub const ROOT_OF_UNITY_TOLERANCE: f64 = 1e-9;

/// A rotation number in turns, kept exact where possible.
#[derive(Debug, Clone, PartialEq)]
pub enum RotationNumber {
    /// `num / den`.
    Rational { num: BigInt, den: BigUint },
    /// `(p + sqrt(d)) / q` with `d` not a perfect square.
    QuadraticSurd { p: i64, d: u64, q: i64 },
    /// A double; its continued fraction is trusted only as far as the
    /// rounding interval allows.
    Float(f64),
}

impl RotationNumber {
    pub fn golden() -> Self {
        RotationNumber::QuadraticSurd { p: -1, d: 5, q: 2 }
    }

    /// `sum_{k <= terms} 10^{-k!}`.
    pub fn truncated_liouville(terms: u32) -> Result<Self> {
        if !(1..=8).contains(&terms) {
            return Err(Error::Precondition(format!("Liouville terms must be in 1..=8, got {terms}")));
        }
        let max_exp: u32 = (1..=terms).product();
        let den = BigUint::from(10u32).pow(max_exp);
        let mut num = BigUint::zero();
        let mut fact = 1u32;
        for k in 1..=terms {
            fact *= k;
            num += BigUint::from(10u32).pow(max_exp - fact);
        }
        Ok(RotationNumber::Rational {
            num: BigInt::from(num),
            den,
        })
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RotationNumber::Rational { num, den } => ratio_to_f64(num, den),
            RotationNumber::QuadraticSurd { p, d, q } => (*p as f64 + (*d as f64).sqrt()) / *q as f64,
            RotationNumber::Float(x) => *x,
        }
    }
}

impl fmt::Display for RotationNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationNumber::Rational { num, den } => write!(f, "{num}/{den}"),
            RotationNumber::QuadraticSurd { p, d, q } => write!(f, "({p}+sqrt({d}))/{q}"),
            RotationNumber::Float(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for RotationNumber {
    type Err = Error;
    /// `golden`, `silver`, `liouville:N`, `surd:P,D,Q`, `p/q` or a decimal.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("cannot read rotation number '{s}'"));
        match s {
            "golden" => return Ok(Self::golden()),
            "silver" => return Ok(RotationNumber::QuadraticSurd { p: -1, d: 2, q: 1 }),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("liouville:") {
            return Self::truncated_liouville(rest.trim().parse().map_err(|_| bad())?);
        }
        if let Some(rest) = s.strip_prefix("surd:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let p: i64 = parts[0].parse().map_err(|_| bad())?;
            let d: u64 = parts[1].parse().map_err(|_| bad())?;
            let q: i64 = parts[2].parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            if d.sqrt() * d.sqrt() == d {
                let root = d.sqrt() as i64;
                return rational(BigInt::from(p + root), BigInt::from(q));
            }
            return Ok(RotationNumber::QuadraticSurd { p, d, q });
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            return rational(p, q);
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
        Ok(RotationNumber::Float(x))
    }
}

fn rational(p: BigInt, q: BigInt) -> Result<RotationNumber> {
    if q.is_zero() {
        return Err(Error::Parse("zero denominator".into()));
    }
    let (p, q) = if q.sign() == Sign::Minus { (-p, -q) } else { (p, q) };
    let g = p.gcd(&q);
    Ok(RotationNumber::Rational {
        num: p / &g,
        den: (q / &g).to_biguint().unwrap(),
    })
}

/// `ln x` for arbitrarily large integers.
pub(crate) fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn ratio_to_f64(num: &BigInt, den: &BigUint) -> f64 {
    let n = num.magnitude();
    let shift = n.bits().max(den.bits()).saturating_sub(1000);
    let v = (n >> shift).to_f64().unwrap() / (den >> shift).to_f64().unwrap();
    if num.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// Exact dyadic value of a double as `(num, den)`.
fn exact_dyadic(x: f64) -> (BigInt, BigUint) {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let m = BigInt::from(sign) * BigInt::from(mantissa);
    if e >= 0 {
        (m << e as usize, BigUint::one())
    } else {
        (m, BigUint::one() << (-e) as usize)
    }
}

/// Continued fraction `[a0; a1, a2, ...]` with exact convergents.
#[derive(Debug, Clone, PartialEq)]
struct Expansion {
    a0: BigInt,
    quotients: Vec<BigUint>,
    /// The expansion terminated, i.e. the value is rational.
    finite: bool,
    /// Depth at which double-precision input stopped pinning the next quotient.
    precision_limited: Option<usize>,
}

fn euclid(num: &BigInt, den: &BigUint, max_terms: usize) -> Expansion {
    let den_i = BigInt::from(den.clone());
    let (a0, r) = num.div_mod_floor(&den_i);
    let mut quotients = Vec::new();
    let mut x = den_i;
    let mut y = r;
    while !y.is_zero() && quotients.len() < max_terms {
        let (q, r) = x.div_mod_floor(&y);
        quotients.push(q.to_biguint().unwrap());
        x = y;
        y = r;
    }
    Expansion {
        a0,
        quotients,
        finite: y.is_zero(),
        precision_limited: None,
    }
}

fn surd_expansion(p: i64, d: u64, q: i64, max_terms: usize) -> Expansion {
    // state (P + sqrt D)/Q with Q | D - P^2
    let (mut pp, mut dd, mut qq) = (p as i128, d as i128, q as i128);
    if (dd - pp * pp) % qq != 0 {
        pp *= qq.abs();
        dd *= qq * qq;
        qq *= qq.abs();
    }
    let root = (dd as u128).sqrt() as i128;
    // floor((P + sqrt D)/Q) = floor((P + isqrt D)/Q) for Q > 0, as sqrt D is irrational
    let floor_of = |pp: i128, qq: i128| -> i128 {
        if qq > 0 {
            (pp + root).div_euclid(qq)
        } else {
            -((pp + root).div_euclid(-qq) + 1)
        }
    };
    let mut terms = Vec::new();
    let a0 = floor_of(pp, qq);
    let mut a = a0;
    while terms.len() < max_terms {
        pp = a * qq - pp;
        qq = (dd - pp * pp) / qq;
        a = floor_of(pp, qq);
        terms.push(BigUint::from(a as u128));
    }
    Expansion {
        a0: BigInt::from(a0),
        quotients: terms,
        finite: false,
        precision_limited: None,
    }
}

fn expansion(alpha: &RotationNumber, max_terms: usize) -> Expansion {
    match alpha {
        RotationNumber::Rational { num, den } => euclid(num, den, max_terms),
        RotationNumber::QuadraticSurd { p, d, q } => surd_expansion(*p, *d, *q, max_terms),
        RotationNumber::Float(x) => {
            let (num, den) = exact_dyadic(*x);
            let mut e = euclid(&num, &den, max_terms);
            // a real within half an ulp of x shares the quotients a_1..a_{n}
            // while that interval fits inside the cylinder of width 1/(q_n (q_n + q_{n-1}))
            let u = 0.5 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE);
            let (mut q_prev, mut q) = (0.0f64, 1.0f64);
            for (k, a) in e.quotients.iter().enumerate() {
                let next = a.to_f64().unwrap() * q + q_prev;
                if 4.0 * u * next * (next + q) >= 1.0 {
                    e.quotients.truncate(k);
                    e.precision_limited = Some(k);
                    e.finite = false;
                    break;
                }
                q_prev = q;
                q = next;
            }
            e
        }
    }
}

/// Thresholds behind the Brjuno flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrjunoRule {
    pub divergence_threshold: f64,
    pub increment_tolerance: f64,
    pub tail_increments: usize,
    pub max_decay_ratio: f64,
    /// Increments used for the geometric-decay fit.
    pub fit_window: usize,
}

impl Default for BrjunoRule {
    fn default() -> Self {
        Self {
            divergence_threshold: 50.0,
            increment_tolerance: 1e-6,
            tail_increments: 5,
            max_decay_ratio: 0.9,
            fit_window: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrjunoFlag {
    BrjunoConvergent,
    BrjunoDivergent,
    Undecided,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationData {
    pub input: String,
    /// `alpha mod 1` as a double.
    pub alpha: f64,
    /// `a_1, a_2, ...`.
    #[serde(with = "decimal")]
    pub partial_quotients: Vec<BigUint>,
    /// Convergent numerators `p_0, p_1, ...` of `alpha mod 1`.
    #[serde(with = "decimal")]
    pub numerators: Vec<BigUint>,
    /// Convergent denominators `q_0 = 1, q_1, ...`.
    #[serde(with = "decimal")]
    pub denominators: Vec<BigUint>,
    /// `ln(q_{n+1}) / q_n`.
    pub increments: Vec<f64>,
    /// `B_N = sum_{n <= N} ln(q_{n+1}) / q_n`.
    pub brjuno_sums: Vec<f64>,
    /// `exp` of the fitted slope of `ln(increment)` over the last window.
    pub decay_ratio: Option<f64>,
    /// `None` for roots of unity.
    pub flag: Option<BrjunoFlag>,
    /// `p/q` when `alpha` is rational with a small denominator.
    pub root_of_unity: Option<String>,
    pub precision_limited: Option<usize>,
    pub rule: BrjunoRule,
}

/// Continued fraction and Brjuno data of `alpha mod 1` to `depth`.
pub fn brjuno_data(alpha: &RotationNumber, depth: usize, rule: BrjunoRule) -> Result<RotationData> {
    if depth > MAX_DEPTH {
        return Err(Error::Precondition(format!("depth must be at most {MAX_DEPTH}, got {depth}")));
    }
    if depth == 0 {
        return Err(Error::Precondition("depth must be positive".into()));
    }
    // B_N runs over n = 0..=N and needs q_{N+1}
    let e = expansion(alpha, depth + 1);
    let (mut p_prev, mut p) = (BigUint::one(), BigUint::zero());
    let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
    let mut numerators = vec![p.clone()];
    let mut denominators = vec![q.clone()];
    for a in &e.quotients {
        let pn = a * &p + &p_prev;
        let qn = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, pn);
        q_prev = std::mem::replace(&mut q, qn);
        numerators.push(p.clone());
        denominators.push(q.clone());
    }
    let frac = {
        let x = alpha.to_f64();
        x - x.floor()
    };
    let small_rational = e.finite
        && denominators
            .last()
            .is_some_and(|q| *q <= BigUint::from(ROOT_OF_UNITY_MAX_DENOMINATOR));
    let mut data = RotationData {
        input: alpha.to_string(),
        alpha: frac,
        partial_quotients: e.quotients.clone(),
        numerators,
        denominators,
        increments: Vec::new(),
        brjuno_sums: Vec::new(),
        decay_ratio: None,
        flag: None,
        root_of_unity: None,
        precision_limited: e.precision_limited,
        rule,
    };
    if small_rational {
        data.root_of_unity = Some(format!("{}/{}", data.numerators.last().unwrap(), data.denominators.last().unwrap()));
        return Ok(data);
    }
    let mut sum = 0.0;
    for w in data.denominators.windows(2) {
        let inc = big_ln(&w[1]) / w[0].to_f64().unwrap_or(f64::INFINITY);
        sum += inc;
        data.increments.push(inc);
        data.brjuno_sums.push(sum);
    }
    let window: Vec<(f64, f64)> = data
        .increments
        .iter()
        .enumerate()
        .rev()
        .take(rule.fit_window)
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| (k as f64, v.ln()))
        .collect();
    if window.len() >= 3 {
        data.decay_ratio = Some(crate::spectrum::least_squares_slope(&window).exp());
    }
    let tail_small = data.increments.len() >= rule.tail_increments
        && data.increments[data.increments.len() - rule.tail_increments..]
            .iter()
            .all(|v| *v < rule.increment_tolerance);
    data.flag = Some(if sum > rule.divergence_threshold {
        BrjunoFlag::BrjunoDivergent
    } else if tail_small && data.decay_ratio.is_some_and(|r| r < rule.max_decay_ratio) {
        BrjunoFlag::BrjunoConvergent
    } else {
        BrjunoFlag::Undecided
    });
    Ok(data)
}

/// `p/q` with `q <= max_den` and `|q x - p| <= tol`, found among the
/// convergents of `x`.
pub fn rational_approximation(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    let frac = x - x.floor();
    let (num, den) = exact_dyadic(frac);
    let e = euclid(&num, &den, 64);
    let (mut p_prev, mut p) = (1u128, 0u128);
    let (mut q_prev, mut q) = (0u128, 1u128);
    let check = |p: u128, q: u128| ((q as f64) * frac - p as f64).abs() <= tol;
    if check(p, q) {
        return Some((0, 1));
    }
    for a in &e.quotients {
        let a = a.to_u128()?;
        let qn = a.checked_mul(q)?.checked_add(q_prev)?;
        if qn > max_den as u128 {
            break;
        }
        let pn = a * p + p_prev;
        p_prev = p;
        p = pn;
        q_prev = q;
        q = qn;
        if check(p, q) {
            let p = if p == q { 0 } else { p };
            let q = if p == 0 { 1 } else { q };
            return Some((p as u64, q as u64));
        }
    }
    // the fractional part may sit just below 1
    if check(1, 1) {
        return Some((0, 1));
    }
    None
}
