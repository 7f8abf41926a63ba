use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{ArithmeticError, Pole, TorusPoint};
use crate::num::{exp_floor, frac, ln_ratio, torus_norm_exact, Phase, Precision, Real};

/// A truncated simple continued fraction `α = [0; a_1, a_2, …, a_N] ∈ (0, 1)`.
///
/// Convergents follow `(p_{-1}, q_{-1}) = (1, 0)`, `(p_0, q_0) = (0, 1)`,
/// `(p_1, q_1) = (1, a_1)` and `x_{n+1} = a_{n+1} x_n + x_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
    coefficients: Vec<BigUint>,
    convergents: Vec<(BigUint, BigUint)>,
    value: Real,
    terminating: bool,
}

/// Result of expanding a real number whose precision may run out.
#[derive(Debug, Clone, PartialEq)]
pub struct RealExpansion {
    pub cf: ContinuedFraction,
    /// Number of coefficients certified by the input precision.
    pub valid_prefix: usize,
    /// True when precision ran out before `max_terms` coefficients.
    pub precision_exhausted: bool,
}

/// Recipe for a Liouville-type frequency with a prescribed `β(α)`.
///
/// `prefix` ones are followed by `jumps` coefficients chosen so that
/// `q_{n+1} ≥ e^{β q_n}`, then `suffix` ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvilleRecipe {
    pub beta: f64,
    pub prefix: usize,
    pub jumps: usize,
    pub suffix: usize,
    /// Refuse jumps whose `q_{n+1}` would exceed this many bits.
    pub max_bits: u64,
}

impl LiouvilleRecipe {
    pub fn new(beta: f64, prefix: usize, jumps: usize) -> Self {
        LiouvilleRecipe {
            beta,
            prefix,
            jumps,
            suffix: 0,
            max_bits: 1 << 18,
        }
    }
}

/// Smallest `a ≥ 1` with `a q + q_prev > e^{x q}`.
fn jump_coefficient(x: f64, q: &BigUint, q_prev: &BigUint) -> BigUint {
    let target = exp_floor(x, q) + 1u32;
    if &target > q_prev {
        let (d, r) = (target - q_prev).div_rem(q);
        let a = if r.is_zero() { d } else { d + 1u32 };
        a.max(BigUint::one())
    } else {
        BigUint::one()
    }
}

fn convergents_of(coefficients: &[BigUint]) -> Vec<(BigUint, BigUint)> {
    let mut out = Vec::with_capacity(coefficients.len() + 1);
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p, mut q) = (BigUint::zero(), BigUint::one());
    out.push((p.clone(), q.clone()));
    for a in coefficients {
        let p_next = a * &p + &p_prev;
        let q_next = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push((p.clone(), q.clone()));
    }
    out
}

/// Coefficients of the rational `x ∈ [0, 1)`: `[a_1, …]`, possibly empty.
fn expand_rational(x: &BigRational, max_terms: usize) -> (Vec<BigUint>, bool) {
    let mut coeffs = Vec::new();
    let mut x = x.clone();
    while coeffs.len() < max_terms {
        if x.is_zero() {
            return (coeffs, true);
        }
        let inv = x.recip();
        let a = inv.floor();
        x = inv - &a;
        coeffs.push(a.to_integer().to_biguint().expect("positive quotient"));
    }
    (coeffs, x.is_zero())
}

impl ContinuedFraction {
    /// Build `α = [0; a_1, …, a_N]` from its partial quotients.
    ///
    /// The stored value is the finite surrogate `p_N / q_N`, which is exact.
    pub fn from_coefficients(coefficients: Vec<BigUint>) -> Result<Self, ArithmeticError> {
        if coefficients.is_empty() {
            return Err(ArithmeticError::EmptyCoefficients);
        }
        if let Some(index) = coefficients.iter().position(|a| a.is_zero()) {
            return Err(ArithmeticError::InvalidCoefficient { index: index + 1 });
        }
        let convergents = convergents_of(&coefficients);
        let (p, q) = convergents.last().expect("nonempty").clone();
        let value = Real::exact(BigRational::new(p.into(), q.into()));
        Ok(ContinuedFraction {
            coefficients,
            convergents,
            value,
            terminating: false,
        })
    }

    /// Convenience wrapper over [`from_coefficients`](Self::from_coefficients)
    /// for signed machine integers.
    pub fn from_u64s(coefficients: &[u64]) -> Result<Self, ArithmeticError> {
        Self::from_coefficients(coefficients.iter().map(|&a| BigUint::from(a)).collect())
    }

    /// Golden mean surrogate `[0; 1, 1, …]` with `terms` coefficients.
    pub fn golden(terms: usize) -> Self {
        Self::from_u64s(&vec![1; terms.max(1)]).expect("valid")
    }

    /// Silver mean surrogate `√2 − 1 = [0; 2, 2, …]`.
    pub fn silver(terms: usize) -> Self {
        Self::from_u64s(&vec![2; terms.max(1)]).expect("valid")
    }

    /// A Liouville-type frequency whose jump levels satisfy
    /// `ln q_{n+1} / q_n ≥ β`.
    pub fn liouville(recipe: LiouvilleRecipe) -> Result<Self, ArithmeticError> {
        if !(recipe.beta.is_finite() && recipe.beta > 0.0) {
            return Err(ArithmeticError::InvalidBetaTarget(recipe.beta));
        }
        let total = recipe.prefix + recipe.jumps + recipe.suffix;
        if total == 0 {
            return Err(ArithmeticError::EmptyCoefficients);
        }
        let mut coeffs: Vec<BigUint> = Vec::with_capacity(total);
        let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
        for level in 0..total {
            let jump = level >= recipe.prefix && level < recipe.prefix + recipe.jumps;
            let a = if jump {
                let estimated_bits = recipe.beta * q.to_f64().unwrap_or(f64::INFINITY) / std::f64::consts::LN_2;
                if !(estimated_bits <= recipe.max_bits as f64) {
                    return Err(ArithmeticError::JumpTooLarge {
                        level,
                        bits: estimated_bits,
                    });
                }
                jump_coefficient(recipe.beta, &q, &q_prev)
            } else {
                BigUint::one()
            };
            let q_next = &a * &q + &q_prev;
            q_prev = std::mem::replace(&mut q, q_next);
            coeffs.push(a);
        }
        Self::from_coefficients(coeffs)
    }

    /// A frequency whose `δ(α, θ)` levels are steered to prescribed values.
    ///
    /// For `Some(t)` at level `n`, `a_{n+1}` is the smallest coefficient with
    /// `(Σ_l m_l ln‖q_n(θ − θ_l)‖ + ln q_{n+1})/q_n ≥ t` such that no
    /// `q_{n+1}(θ − θ_l)` is an integer; `None` gives `a_{n+1} = 1`. With no
    /// poles this targets `ln q_{n+1}/q_n` directly.
    pub fn delta_targeted(
        targets: &[Option<f64>],
        theta: &TorusPoint,
        poles: &[Pole],
        max_bits: u64,
    ) -> Result<Self, ArithmeticError> {
        if targets.is_empty() {
            return Err(ArithmeticError::EmptyCoefficients);
        }
        let diffs: Vec<(BigRational, u32)> = poles
            .iter()
            .map(|p| (theta.minus(&p.point).value().clone(), p.multiplicity))
            .collect();
        let norms = |q: &BigUint| -> Vec<BigRational> {
            let q = BigRational::from_integer(BigInt::from(q.clone()));
            diffs.iter().map(|(d, _)| torus_norm_exact(&(&q * d))).collect()
        };
        let mut coeffs = Vec::with_capacity(targets.len());
        let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
        for (level, target) in targets.iter().enumerate() {
            let a = match *target {
                None => BigUint::one(),
                Some(t) => {
                    if !(t.is_finite() && t > 0.0) {
                        return Err(ArithmeticError::InvalidBetaTarget(t));
                    }
                    let current = norms(&q);
                    if current.iter().any(Zero::is_zero) {
                        return Err(ArithmeticError::ResonantLevel { level });
                    }
                    let penalty: f64 = current.iter().zip(&diffs).map(|(n, (_, m))| *m as f64 * ln_ratio(n)).sum();
                    let qf = q.to_f64().unwrap_or(f64::INFINITY);
                    let exponent = t - penalty / qf;
                    let bits = exponent * qf / std::f64::consts::LN_2;
                    if !(bits <= max_bits as f64) {
                        return Err(ArithmeticError::JumpTooLarge { level, bits });
                    }
                    let mut a = jump_coefficient(exponent, &q, &q_prev);
                    while norms(&(&a * &q + &q_prev)).iter().any(Zero::is_zero) {
                        a += 1u32;
                    }
                    a
                }
            };
            let q_next = &a * &q + &q_prev;
            q_prev = std::mem::replace(&mut q, q_next);
            coeffs.push(a);
        }
        Self::from_coefficients(coeffs)
    }

    /// Expand a real `α ∈ (0, 1)` known to finite precision.
    ///
    /// Both ends of the uncertainty interval are expanded in lockstep and
    /// only the common prefix is kept, so no coefficient is emitted that the
    /// input precision does not determine.
    pub fn from_real(alpha: &Real, max_terms: usize) -> Result<RealExpansion, ArithmeticError> {
        let zero = BigRational::zero();
        let one = BigRational::one();
        if alpha.value <= zero || alpha.value >= one {
            return Err(ArithmeticError::OutOfUnitInterval);
        }
        let (coefficients, terminating, exhausted) = match alpha.precision {
            Precision::Exact => {
                let (c, done) = expand_rational(&alpha.value, max_terms);
                (c, done, false)
            }
            Precision::Bits(bits) => {
                let radius = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
                let mut lo = &alpha.value - &radius;
                let mut hi = &alpha.value + &radius;
                if lo <= zero || hi >= one {
                    return Err(ArithmeticError::PrecisionExhausted { valid_prefix: 0 });
                }
                let mut coeffs = Vec::new();
                let mut exhausted = true;
                while coeffs.len() < max_terms {
                    if lo.is_zero() || hi.is_zero() {
                        break;
                    }
                    let (il, ih) = (lo.recip(), hi.recip());
                    let (al, ah) = (il.floor(), ih.floor());
                    if al != ah {
                        break;
                    }
                    lo = il - &al;
                    hi = ih - &ah;
                    coeffs.push(al.to_integer().to_biguint().expect("positive quotient"));
                    // The interval flips orientation at every step.
                    std::mem::swap(&mut lo, &mut hi);
                }
                if coeffs.len() == max_terms {
                    exhausted = false;
                }
                (coeffs, false, exhausted)
            }
        };
        if coefficients.is_empty() {
            return Err(ArithmeticError::PrecisionExhausted { valid_prefix: 0 });
        }
        let valid_prefix = coefficients.len();
        let mut cf = Self::from_coefficients(coefficients)?;
        cf.value = alpha.clone();
        cf.terminating = terminating;
        Ok(RealExpansion {
            cf,
            valid_prefix,
            precision_exhausted: exhausted,
        })
    }

    pub fn coefficients(&self) -> &[BigUint] {
        &self.coefficients
    }

    /// `(p_n, q_n)` for `n = 0..=N`.
    pub fn convergents(&self) -> &[(BigUint, BigUint)] {
        &self.convergents
    }

    /// Number of partial quotients `N`.
    pub fn depth(&self) -> usize {
        self.coefficients.len()
    }

    pub fn q(&self, n: usize) -> Result<&BigUint, ArithmeticError> {
        self.convergents
            .get(n)
            .map(|c| &c.1)
            .ok_or(ArithmeticError::LevelOutOfRange { level: n, depth: self.depth() })
    }

    pub fn p(&self, n: usize) -> Result<&BigUint, ArithmeticError> {
        self.convergents
            .get(n)
            .map(|c| &c.0)
            .ok_or(ArithmeticError::LevelOutOfRange { level: n, depth: self.depth() })
    }

    /// `q_n` as a machine integer, if it fits.
    pub fn q_u64(&self, n: usize) -> Result<u64, ArithmeticError> {
        let q = self.q(n)?;
        q.to_u64().ok_or(ArithmeticError::StepBudget {
            q_bits: q.bits(),
            budget: u64::MAX,
        })
    }

    pub fn value(&self) -> &Real {
        &self.value
    }

    /// True when the expansion ended because `α` is exactly rational.
    pub fn is_terminating(&self) -> bool {
        self.terminating
    }

    /// Bits of precision carried by the value: `64 + 2·log₂ q_N` for
    /// coefficient-built fractions, the input precision otherwise.
    pub fn precision_bits(&self) -> u64 {
        match self.value.precision {
            Precision::Exact => 64 + 2 * self.convergents.last().map(|c| c.1.bits()).unwrap_or(0),
            Precision::Bits(b) => b as u64,
        }
    }

    pub fn frequency(&self) -> Frequency {
        Frequency::from_cf(self)
    }

    /// Endpoints of the set of all `α` whose expansion starts with the stored
    /// coefficients: `p_N/q_N` and `(p_N + p_{N−1})/(q_N + q_{N−1})`.
    pub fn cylinder(&self) -> (BigRational, BigRational) {
        let n = self.depth();
        let (p, q) = &self.convergents[n];
        let (pp, qp) = &self.convergents[n - 1];
        (
            BigRational::new(p.clone().into(), q.clone().into()),
            BigRational::new((p + pp).into(), (q + qp).into()),
        )
    }

    /// `1/(2 q_{n+1}) ≤ ‖q_n α‖ ≤ 1/q_{n+1}`, checked exactly at both ends of
    /// the cylinder (the distance is affine in `α` on it, so this covers every
    /// `α` with the stored prefix). `None` when `q_{n+1}` is not stored.
    pub fn approximation_bounds_hold(&self, n: usize) -> Option<bool> {
        if n + 1 > self.depth() {
            return None;
        }
        let q = BigRational::from_integer(self.convergents[n].1.clone().into());
        let q_next = BigRational::from_integer(self.convergents[n + 1].1.clone().into());
        let upper = q_next.recip();
        let lower = (q_next * BigRational::from_integer(2.into())).recip();
        let (a, b) = self.cylinder();
        Some([a, b].iter().all(|alpha| {
            let d = torus_norm_exact(&(&q * alpha));
            d >= lower && d <= upper
        }))
    }

    /// `η_n = q_n α − p_n`, exactly, for the stored value; `|η_n| = ‖q_n α‖`
    /// for `n ≥ 1`.
    pub fn signed_remainder(&self, n: usize) -> Result<BigRational, ArithmeticError> {
        let (p, q) = self.convergents.get(n).ok_or(ArithmeticError::LevelOutOfRange {
            level: n,
            depth: self.depth(),
        })?;
        let v = &self.value.value;
        let (q, p) = (BigInt::from(q.clone()), BigInt::from(p.clone()));
        Ok(BigRational::new_raw(q * v.numer() - p * v.denom(), v.denom().clone()))
    }

    /// `‖k α‖` for the stored value, exactly.
    pub fn torus_norm_of_multiple(&self, k: &BigInt) -> BigRational {
        torus_norm_exact(&(BigRational::from_integer(k.clone()) * &self.value.value))
    }

    /// Plain-text serialization: one decimal coefficient per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for a in &self.coefficients {
            let _ = writeln!(s, "{a}");
        }
        s
    }

    /// Inverse of [`to_text`](Self::to_text). Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self, ArithmeticError> {
        let mut coeffs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let a = BigInt::from_str(line).map_err(|_| ArithmeticError::MalformedLine { line: i + 1 })?;
            let a = a.to_biguint().ok_or(ArithmeticError::InvalidCoefficient { index: coeffs.len() + 1 })?;
            coeffs.push(a);
        }
        Self::from_coefficients(coeffs)
    }
}

/// The rotation number in the fixed-point form used for orbit arithmetic.
///
/// Exactly rational frequencies `p/q` (with `q < 2^63`) are handled by
/// residues so that `θ + (j + q)α` and `θ + jα` are the same phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frequency {
    step: Phase,
    exact: Option<(u64, u64)>,
}

impl Frequency {
    pub fn from_cf(cf: &ContinuedFraction) -> Self {
        if cf.is_terminating() {
            let v = &cf.value().value;
            if let (Some(p), Some(q)) = (v.numer().to_u64(), v.denom().to_u64()) {
                if q < (1 << 62) {
                    return Frequency::rational(p, q);
                }
            }
        }
        Frequency {
            step: Phase::from_ratio(&cf.value().value),
            exact: None,
        }
    }

    /// Exactly periodic frequency `p/q`.
    pub fn rational(p: u64, q: u64) -> Self {
        assert!(q > 0 && q < (1 << 62), "denominator out of range");
        let g = p.gcd(&q);
        let (p, q) = (p / g % (q / g), q / g);
        Frequency {
            step: Phase::from_small_ratio(p, q),
            exact: Some((p, q)),
        }
    }

    pub fn from_phase(step: Phase) -> Self {
        Frequency { step, exact: None }
    }

    pub fn step(&self) -> Phase {
        self.step
    }

    pub fn exact(&self) -> Option<(u64, u64)> {
        self.exact
    }

    /// The orbit point `θ + jα`.
    pub fn orbit(&self, theta: Phase, j: i64) -> Phase {
        match self.exact {
            Some((p, q)) => {
                let r = ((j as i128 * p as i128).rem_euclid(q as i128)) as u64;
                theta + Phase::from_small_ratio(r, q)
            }
            None => theta.offset(self.step, j),
        }
    }

    /// The reflected rotation `−α`.
    pub fn negated(&self) -> Self {
        match self.exact {
            Some((p, q)) => Frequency::rational((q - p) % q, q),
            None => Frequency {
                step: -self.step,
                exact: None,
            },
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.step.to_f64()
    }
}

/// `frac(-n α)/2`: a phase with `2θ + nα ≡ 0`, used for resonance tests.
pub fn resonant_phase(cf: &ContinuedFraction, n: i64) -> BigRational {
    let x = frac(&(-BigRational::from_integer(n.into()) * &cf.value().value));
    x / BigRational::from_integer(2.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(cf: &ContinuedFraction) -> Vec<u64> {
        cf.convergents().iter().map(|c| c.1.to_u64().unwrap()).collect()
    }

    #[test]
    fn golden_denominators_are_fibonacci() {
        let cf = ContinuedFraction::from_u64s(&[1, 1, 1, 1, 1, 1]).unwrap();
        assert_eq!(qs(&cf), vec![1, 1, 2, 3, 5, 8, 13]);
    }

    #[test]
    fn one_half_surrogate() {
        let cf = ContinuedFraction::from_u64s(&[2]).unwrap();
        assert_eq!(cf.convergents()[1], (BigUint::from(1u32), BigUint::from(2u32)));
        assert_eq!(cf.value().value, BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn alternating_quotients_match_independent_recurrence() {
        let coeffs: Vec<u64> = (0..10).map(|i| if i % 2 == 0 { 1 } else { 2 }).collect();
        let cf = ContinuedFraction::from_u64s(&coeffs).unwrap();
        // Direct re-evaluation with i128 arithmetic.
        let (mut q0, mut q1) = (0i128, 1i128);
        let mut expect = vec![1i128];
        for &a in &coeffs {
            let q2 = a as i128 * q1 + q0;
            q0 = q1;
            q1 = q2;
            expect.push(q2);
        }
        let got: Vec<i128> = qs(&cf).into_iter().map(|x| x as i128).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert_eq!(
            ContinuedFraction::from_u64s(&[1, 0, 2]),
            Err(ArithmeticError::InvalidCoefficient { index: 2 })
        );
        assert_eq!(ContinuedFraction::from_u64s(&[]), Err(ArithmeticError::EmptyCoefficients));
        assert!(ContinuedFraction::from_text("3\n-1\n").is_err());
        assert!(ContinuedFraction::from_text("3\nx\n").is_err());
    }

    #[test]
    fn determinant_identity_alternates() {
        let cf = ContinuedFraction::from_u64s(&[3, 7, 15, 1, 292, 1, 1]).unwrap();
        let c = cf.convergents();
        for n in 1..c.len() {
            let lhs = BigInt::from(c[n].0.clone()) * BigInt::from(c[n - 1].1.clone())
                - BigInt::from(c[n - 1].0.clone()) * BigInt::from(c[n].1.clone());
            let sign = if n % 2 == 1 { 1 } else { -1 };
            assert_eq!(lhs, BigInt::from(sign));
        }
    }

    #[test]
    fn golden_real_expansion_is_all_ones() {
        let exp = ContinuedFraction::from_real(&Real::golden_mean(256), 400).unwrap();
        assert!(exp.precision_exhausted);
        assert!(exp.valid_prefix > 150, "prefix {}", exp.valid_prefix);
        assert!(exp.cf.coefficients().iter().all(|a| a.is_one()));
    }

    #[test]
    fn exact_half_terminates() {
        let exp = ContinuedFraction::from_real(&Real::ratio(1, 2), 10).unwrap();
        assert_eq!(exp.cf.coefficients(), &[BigUint::from(2u32)]);
        assert!(exp.cf.is_terminating());
        assert!(!exp.precision_exhausted);
        assert_eq!(exp.cf.frequency().exact(), Some((1, 2)));
    }

    #[test]
    fn pi_fraction_prefix_reexpands() {
        let pi = Real::pi(512);
        let alpha = Real::with_bits(pi.value - BigRational::from_integer(3.into()), 512);
        let exp = ContinuedFraction::from_real(&alpha, 60).unwrap();
        let head: Vec<u64> = exp.cf.coefficients()[..5].iter().map(|a| a.to_u64().unwrap()).collect();
        assert_eq!(head, vec![7, 15, 1, 292, 1]);
        // Each convergent re-expands to the corresponding prefix.
        for n in 1..exp.cf.depth() {
            let (p, q) = &exp.cf.convergents()[n];
            let r = BigRational::new(p.clone().into(), q.clone().into());
            let (c, done) = expand_rational(&r, 200);
            assert!(done);
            // A rational's expansion may end in `…, a, 1` ≡ `…, a+1`.
            let prefix = &exp.cf.coefficients()[..n];
            let alt = {
                let mut v = prefix.to_vec();
                if v.len() >= 2 && v.last().unwrap().is_one() {
                    v.pop();
                    *v.last_mut().unwrap() += 1u32;
                }
                v
            };
            assert!(c == prefix || c == alt, "level {n}");
        }
    }

    #[test]
    fn rejects_values_outside_unit_interval() {
        assert_eq!(
            ContinuedFraction::from_real(&Real::ratio(3, 2), 5),
            Err(ArithmeticError::OutOfUnitInterval)
        );
    }

    #[test]
    fn liouville_jumps_reach_target() {
        let cf = ContinuedFraction::liouville(LiouvilleRecipe::new(1.0, 0, 3)).unwrap();
        assert_eq!(qs(&cf)[..3], [1, 3, 22]);
        let too_big = ContinuedFraction::liouville(LiouvilleRecipe::new(1.0, 0, 4));
        assert!(matches!(too_big, Err(ArithmeticError::JumpTooLarge { level: 3, .. })));
    }

    #[test]
    fn text_round_trip() {
        let cf = ContinuedFraction::from_u64s(&[1, 2, 3, 400000000000]).unwrap();
        let text = cf.to_text();
        assert_eq!(text, "1\n2\n3\n400000000000\n");
        assert_eq!(ContinuedFraction::from_text(&text).unwrap(), cf);
    }

    #[test]
    fn rational_frequency_is_periodic() {
        let f = Frequency::rational(2, 7);
        let t = Phase::from_f64(0.123);
        assert_eq!(f.orbit(t, 3), f.orbit(t, 10));
        assert_eq!(f.orbit(t, -4), f.orbit(t, 3));
        assert_eq!(f.negated().orbit(t, 1), f.orbit(t, -1));
    }

    #[test]
    fn delta_targeted_without_poles_is_minimal() {
        let cf = ContinuedFraction::delta_targeted(&[None, Some(1.5), Some(1.0), None], &TorusPoint::ratio(1, 3), &[], 1 << 16)
            .unwrap();
        let q = qs(&cf);
        assert_eq!(&q[..2], &[1, 1]);
        for n in [1usize, 2] {
            let t = [0.0, 1.5, 1.0][n];
            let rate = |q_next: u64| (q_next as f64).ln() / q[n] as f64;
            assert!(rate(q[n + 1]) >= t);
            assert!(q[n + 1] - q[n] <= q[n - 1] || rate(q[n + 1] - q[n]) < t);
        }
    }

    #[test]
    fn delta_targeted_avoids_resonant_denominators() {
        let half = [Pole::simple(TorusPoint::ratio(1, 2))];
        let cf = ContinuedFraction::delta_targeted(&[Some(1.0), Some(1.0), None], &TorusPoint::ratio(1, 4), &half, 1 << 16).unwrap();
        let q = qs(&cf);
        // ‖q/4‖ in floating point.
        let norm = |q: u64| [0.0f64, 0.25, 0.5, 0.25][(q % 4) as usize];
        for n in 0..2 {
            assert!(norm(q[n + 1]) > 0.0);
            let level = (norm(q[n]).ln() + (q[n + 1] as f64).ln()) / q[n] as f64;
            assert!(level >= 1.0, "level {n}: {level}");
        }
        assert_eq!(q, vec![1, 11, 239_515, 239_526]);
        assert!(matches!(
            ContinuedFraction::delta_targeted(&[Some(1.0)], &TorusPoint::ratio(1, 2), &half, 64),
            Err(ArithmeticError::ResonantLevel { level: 0 })
        ));
    }
}
