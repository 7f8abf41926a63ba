//! Exact and fixed-point number plumbing shared by the rest of the crate.
//!
//! Two representations are used throughout:
//!
//! * [`Real`]: an exact [`BigRational`] together with a [`Precision`] tag
//!   saying how many bits of it are trustworthy. Exact inputs (rationals,
//!   finite decimals, continued-fraction surrogates) carry
//!   [`Precision::Exact`].
//! * [`Phase`]: a point of the torus `R/Z` in 128-bit fixed point. Orbit
//!   arithmetic `θ + jα` is carried out with wrapping integer arithmetic, so
//!   it is exact modulo `2^-128` truncation of the inputs and bit-identical
//!   for equal orbit indices however they are reached.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

/// Errors raised while parsing numeric literals.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseNumberError {
    #[error("empty numeric literal")]
    Empty,
    #[error("malformed numeric literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// How much of a stored value is trustworthy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Exact,
    Bits(u32),
}

impl Precision {
    /// Number of trusted bits, `u32::MAX` for exact values.
    pub fn bits(self) -> u32 {
        match self {
            Precision::Exact => u32::MAX,
            Precision::Bits(b) => b,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Precision::Exact)
    }

    pub fn min(self, other: Precision) -> Precision {
        match (self, other) {
            (Precision::Exact, p) | (p, Precision::Exact) => p,
            (Precision::Bits(a), Precision::Bits(b)) => Precision::Bits(a.min(b)),
        }
    }
}

/// A real number known to `precision` bits (absolute error `<= 2^-bits`).
#[derive(Debug, Clone, PartialEq)]
pub struct Real {
    pub value: BigRational,
    pub precision: Precision,
}

impl Real {
    pub fn exact(value: BigRational) -> Self {
        Real {
            value,
            precision: Precision::Exact,
        }
    }

    pub fn with_bits(value: BigRational, bits: u32) -> Self {
        Real {
            value,
            precision: Precision::Bits(bits),
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Real::exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The exact dyadic rational equal to `x`.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Real::exact)
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.value)
    }

    /// `(√5 − 1)/2` truncated to `bits` fractional bits.
    pub fn golden_mean(bits: u32) -> Self {
        let b = bits as usize;
        let root = (BigUint::from(5u32) << (2 * b)).sqrt();
        let num = BigInt::from(root) - (BigInt::one() << b);
        Real::with_bits(BigRational::new(num, BigInt::one() << (b + 1)), bits)
    }

    /// `√2 − 1` truncated to `bits` fractional bits.
    pub fn silver_mean(bits: u32) -> Self {
        let b = bits as usize;
        let root = (BigUint::from(2u32) << (2 * b)).sqrt();
        let num = BigInt::from(root) - (BigInt::one() << b);
        Real::with_bits(BigRational::new(num, BigInt::one() << b), bits)
    }

    /// `π` to `bits` fractional bits (Machin's formula in fixed point).
    pub fn pi(bits: u32) -> Self {
        let guard = 32usize;
        let f = bits as usize + guard;
        let pi = (atan_inv_fixed(5, f) * 16u32) - (atan_inv_fixed(239, f) * 4u32);
        let pi = BigInt::from(pi >> guard);
        Real::with_bits(BigRational::new(pi, BigInt::one() << bits as usize), bits)
    }
}

impl FromStr for Real {
    type Err = ParseNumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Real::exact)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Parse `"3/7"`, `"0.25"`, `"-1.5e-3"` or an integer into an exact rational.
pub fn parse_rational(input: &str) -> Result<BigRational, ParseNumberError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseNumberError::Empty);
    }
    let malformed = || ParseNumberError::Malformed(input.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| malformed())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| malformed())?;
        if d.is_zero() {
            return Err(ParseNumberError::ZeroDenominator(input.to_string()));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| malformed())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(malformed());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| malformed())?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i64;
    if exponent.abs() > 100_000 {
        return Err(malformed());
    }
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Fractional part `x − ⌊x⌋ ∈ [0, 1)`.
pub fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// `min_l |x − l|` computed exactly.
pub fn torus_norm_exact(x: &BigRational) -> BigRational {
    let r = frac(x);
    let other = BigRational::one() - &r;
    if r <= other {
        r
    } else {
        other
    }
}

/// Natural logarithm of a big unsigned integer (`-inf` for zero).
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().unwrap_or(u64::MAX) as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * LN_2
}

pub fn ln_bigint(n: &BigInt) -> f64 {
    match n.sign() {
        Sign::Minus => f64::NAN,
        _ => ln_biguint(n.magnitude()),
    }
}

/// Natural logarithm of a rational; `-inf` at zero, `NaN` for negatives.
pub fn ln_ratio(x: &BigRational) -> f64 {
    if x.is_negative() {
        return f64::NAN;
    }
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// Nearest-ish `f64` for arbitrarily large or small rationals.
pub fn ratio_to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() && (v != 0.0 || x.is_zero()) {
            return v;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * (ln_bigint(&x.numer().abs()) - ln_bigint(&x.denom().abs())).exp()
}

/// `⌊2^f · atan(1/k)⌋` up to a few units in the last place.
fn atan_inv_fixed(k: u32, f: usize) -> BigUint {
    let k2 = BigUint::from(k) * k;
    let mut power = (BigUint::one() << f) / k;
    let mut sum = BigUint::zero();
    let mut neg = BigUint::zero();
    let mut n = 0u64;
    while !power.is_zero() {
        let term = &power / (2 * n + 1);
        if n % 2 == 0 {
            sum += term;
        } else {
            neg += term;
        }
        power /= &k2;
        n += 1;
    }
    sum - neg
}

/// `⌊2^f · ln 2⌋` (minus a few ulps) via `ln 2 = 2 atanh(1/3)`.
fn ln2_fixed(f: usize) -> BigUint {
    let guard = 16;
    let f = f + guard;
    let mut power = (BigUint::one() << (f + 1)) / 3u32;
    let mut sum = BigUint::zero();
    let mut n = 0u64;
    while !power.is_zero() {
        sum += &power / (2 * n + 1);
        power /= 9u32;
        n += 1;
    }
    sum >> guard
}

/// `⌊e^x⌋` for `x = beta · q`, `beta ≥ 0` finite, accurate to within one unit.
///
/// Intended for moderate exponents (`x` up to a few `10^5`); cost grows like
/// `x^{1.5}` big-integer multiplications.
pub fn exp_floor(beta: f64, q: &BigUint) -> BigUint {
    assert!(beta.is_finite() && beta >= 0.0, "exp_floor needs beta >= 0");
    let beta_r = BigRational::from_float(beta).expect("finite beta");
    let x = beta_r * BigRational::from_integer(BigInt::from(q.clone()));
    if x.is_zero() {
        return BigUint::one();
    }
    let x_f = ratio_to_f64(&x);
    let k_est = (x_f / LN_2).ceil().max(1.0) as usize;
    let s = ((k_est as f64).sqrt() as usize).clamp(8, 512);
    let f = k_est + s + 96;
    let ln2 = BigInt::from(ln2_fixed(f + 64));
    let ln2_f = &ln2 >> 64usize;
    let scaled = x * BigRational::from_integer(BigInt::one() << f);
    let x_fixed = scaled.floor().to_integer();
    let (k, r) = x_fixed.div_mod_floor(&ln2_f);
    let k = k.to_usize().expect("exponent fits usize");
    // e^r with r in [0, ln 2): reduce by 2^s, Taylor, square back.
    let one = BigInt::one() << f;
    let rs = &r >> s;
    let mut sum = one.clone();
    let mut term = one;
    let mut n = 1u64;
    loop {
        term = (&term * &rs) >> f;
        term /= n;
        if term.is_zero() {
            break;
        }
        sum += &term;
        n += 1;
    }
    for _ in 0..s {
        sum = (&sum * &sum) >> f;
    }
    let result = (sum << k) >> f;
    result.to_biguint().expect("positive")
}

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

/// A point of the torus `R/Z` stored as `x · 2^128` in a `u128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Phase(pub u128);

impl Phase {
    pub const ZERO: Phase = Phase(0);
    pub const HALF: Phase = Phase(1u128 << 127);

    /// `⌊frac(x) · 2^128⌋`.
    pub fn from_ratio(x: &BigRational) -> Phase {
        let (n, d) = if x.denom().is_negative() {
            (-x.numer(), -x.denom())
        } else {
            (x.numer().clone(), x.denom().clone())
        };
        let scaled = (n.mod_floor(&d) << 128usize) / d;
        Phase(scaled.to_u128().unwrap_or(u128::MAX))
    }

    pub fn from_f64(x: f64) -> Phase {
        let r = x - x.floor();
        let v = r * TWO_POW_128;
        if v >= TWO_POW_128 {
            Phase(0)
        } else {
            Phase(v as u128)
        }
    }

    /// `⌊2^128 · r/q⌋` for `0 <= r < q < 2^63`.
    pub fn from_small_ratio(r: u64, q: u64) -> Phase {
        debug_assert!(r < q && q < (1 << 63));
        let (r, q) = (r as u128, q as u128);
        let hi = (r << 64) / q;
        let rem = (r << 64) % q;
        let lo = (rem << 64) / q;
        Phase((hi << 64) | lo)
    }

    /// Representative in `[0, 1)`.
    pub fn to_f64(self) -> f64 {
        let v = self.0 as f64 / TWO_POW_128;
        if v >= 1.0 {
            1.0 - f64::EPSILON / 2.0
        } else {
            v
        }
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn to_signed_f64(self) -> f64 {
        if self.0 >= 1u128 << 127 {
            -((self.0.wrapping_neg()) as f64 / TWO_POW_128)
        } else {
            self.0 as f64 / TWO_POW_128
        }
    }

    /// `‖x‖_{R/Z}`, accurate in relative terms even for tiny distances.
    pub fn norm(self) -> f64 {
        self.0.min(self.0.wrapping_neg()) as f64 / TWO_POW_128
    }

    /// `|sin πx|`, evaluated from the distance to the nearest integer.
    pub fn abs_sin_pi(self) -> f64 {
        (std::f64::consts::PI * self.norm()).sin()
    }

    /// `x + j·step` on the torus.
    pub fn offset(self, step: Phase, j: i64) -> Phase {
        Phase(self.0.wrapping_add(step.0.wrapping_mul(j as i128 as u128)))
    }

    /// `m · x` on the torus.
    pub fn times(self, m: i64) -> Phase {
        Phase(self.0.wrapping_mul(m as i128 as u128))
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        Phase(self.0.wrapping_add(rhs.0))
    }
}

impl std::ops::Sub for Phase {
    type Output = Phase;
    fn sub(self, rhs: Phase) -> Phase {
        Phase(self.0.wrapping_sub(rhs.0))
    }
}

impl std::ops::Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        Phase(self.0.wrapping_neg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        let q = |s: &str| parse_rational(s).unwrap();
        assert_eq!(q("1/4"), BigRational::new(1.into(), 4.into()));
        assert_eq!(q("0.25"), BigRational::new(1.into(), 4.into()));
        assert_eq!(q("-1.5e-3"), BigRational::new((-3).into(), 2000.into()));
        assert_eq!(q("12"), BigRational::from_integer(12.into()));
        assert_eq!(q(".5"), BigRational::new(1.into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn logs_of_huge_integers() {
        let n = BigUint::one() << 1000usize;
        assert!((ln_biguint(&n) - 1000.0 * LN_2).abs() < 1e-9);
        assert_eq!(ln_biguint(&BigUint::zero()), f64::NEG_INFINITY);
        assert!((ln_biguint(&BigUint::from(1000u32)) - 1000f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn exp_floor_matches_f64_for_small_arguments() {
        for (beta, q) in [(1.0, 1u32), (1.0, 3), (1.0, 22), (0.5, 13), (2.0f64.ln() * 2.0, 21)] {
            let got = exp_floor(beta, &BigUint::from(q));
            let want = (beta * q as f64).exp();
            let got_f = got.to_f64().unwrap();
            assert!((got_f - want).abs() <= 1.0 + want * 1e-14, "{beta} {q}: {got_f} vs {want}");
        }
    }

    #[test]
    fn exp_floor_large_argument_has_right_log() {
        let e = exp_floor(1.0, &BigUint::from(8111u32));
        assert!((ln_biguint(&e) - 8111.0).abs() < 1e-9);
    }

    #[test]
    fn constants() {
        assert!((Real::golden_mean(200).to_f64() - 0.618_033_988_749_894_8).abs() < 1e-15);
        assert!((Real::silver_mean(200).to_f64() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((Real::pi(300).to_f64() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn phase_arithmetic_is_modular() {
        let a = Phase::from_f64(0.3);
        let t = Phase::from_f64(0.9);
        // θ − qα + jα equals θ + (j − q)α bit for bit.
        assert_eq!(t.offset(a, -13).offset(a, 5), t.offset(a, -8));
        assert!((Phase::from_f64(0.75).norm() - 0.25).abs() < 1e-16);
        assert!((Phase::from_f64(0.75).to_signed_f64() + 0.25).abs() < 1e-16);
        let third = Phase::from_small_ratio(1, 3);
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        assert!(third.times(3).norm() < 1e-37);
    }
}
