//! Meromorphic potentials `V = g/f` with `|f(x)| = Π_l |2 sin π(x − θ_l)|^{m_l}`.
//!
//! `f` is evaluated on the lift `x ∈ [0, 1)` as the signed product
//! `Π_l (2 sin π(x − θ_l))^{m_l}` with `θ_l ∈ [0, 1)`, so it changes sign
//! by `(−1)^m` across `x = 0`. A numerator with the same parity makes `V`
//! a function on the torus.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::arithmetic::{ArithmeticError, ContinuedFraction, IndexValue, Pole, TorusPoint, DEFAULT_STEP_BUDGET};
use crate::num::{ln_biguint, Phase};
use crate::quadrature::integrate_arc;
use crate::serial;

/// Default distance below which evaluations are flagged as near a pole.
pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("x = {x} is the pole theta_{pole}")]
    PoleHit { pole: usize, x: String },
    #[error("degenerate model: {0}")]
    Degenerate(String),
    #[error("numerator must be {expected} when the total pole multiplicity is {multiplicity}")]
    ParityMismatch { multiplicity: u32, expected: Parity },
    #[error("g vanishes at pole theta_{pole}, so the pole is spurious")]
    SpuriousPole { pole: usize },
    #[error("level {level} is not in the qualifying subsequence")]
    NotQualifying { level: usize },
    #[error("unknown numerator '{0}'")]
    UnknownNumerator(String),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

/// Behaviour of `g` under `x ↦ x + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Periodic,
    Antiperiodic,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Periodic => "periodic",
            Parity::Antiperiodic => "antiperiodic",
        })
    }
}

/// Closed-form numerators, each multiplied by a coupling `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedNumerator {
    /// `c`
    Constant,
    /// `c cos 2πx`
    Cos2Pi,
    /// `c sin 2πx`
    Sin2Pi,
    /// `c cos πx`
    CosPi,
    /// `c sin πx`
    SinPi,
}

impl NamedNumerator {
    pub const ALL: [NamedNumerator; 5] = [
        NamedNumerator::Constant,
        NamedNumerator::Cos2Pi,
        NamedNumerator::Sin2Pi,
        NamedNumerator::CosPi,
        NamedNumerator::SinPi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedNumerator::Constant => "const",
            NamedNumerator::Cos2Pi => "cos2pi",
            NamedNumerator::Sin2Pi => "sin2pi",
            NamedNumerator::CosPi => "cospi",
            NamedNumerator::SinPi => "sinpi",
        }
    }

    pub fn parity(self) -> Parity {
        match self {
            NamedNumerator::Constant | NamedNumerator::Cos2Pi | NamedNumerator::Sin2Pi => Parity::Periodic,
            NamedNumerator::CosPi | NamedNumerator::SinPi => Parity::Antiperiodic,
        }
    }

    fn unit(self, x: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            NamedNumerator::Constant => 1.0,
            NamedNumerator::Cos2Pi => (2.0 * PI * x).cos(),
            NamedNumerator::Sin2Pi => (2.0 * PI * x).sin(),
            NamedNumerator::CosPi => (PI * x).cos(),
            NamedNumerator::SinPi => (PI * x).sin(),
        }
    }

    /// `(u(x + h) − u(x))/h` for the unit function, free of cancellation.
    fn unit_quotient(self, x: f64, h: f64) -> f64 {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            NamedNumerator::Constant => 0.0,
            NamedNumerator::Cos2Pi => -2.0 * (PI * (2.0 * x + h)).sin() * sin_over(PI, h),
            NamedNumerator::Sin2Pi => 2.0 * (PI * (2.0 * x + h)).cos() * sin_over(PI, h),
            NamedNumerator::CosPi => -2.0 * (PI * (x + h / 2.0)).sin() * sin_over(FRAC_PI_2, h),
            NamedNumerator::SinPi => 2.0 * (PI * (x + h / 2.0)).cos() * sin_over(FRAC_PI_2, h),
        }
    }

    fn unit_lipschitz(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            NamedNumerator::Constant => 0.0,
            NamedNumerator::Cos2Pi | NamedNumerator::Sin2Pi => 2.0 * PI,
            NamedNumerator::CosPi | NamedNumerator::SinPi => PI,
        }
    }
}

impl FromStr for NamedNumerator {
    type Err = PotentialError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NamedNumerator::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| PotentialError::UnknownNumerator(s.to_string()))
    }
}

/// `sin(a h)/h`, equal to `a` at `h = 0`.
fn sin_over(a: f64, h: f64) -> f64 {
    if h == 0.0 {
        a
    } else {
        (a * h).sin() / h
    }
}

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The numerator `g`, given on the lift `[0, 1)`.
#[derive(Clone)]
pub enum Numerator {
    Named { kind: NamedNumerator, coupling: f64 },
    /// A user function with a declared (trusted) Lipschitz constant.
    Callable { func: Callable, lipschitz: f64, parity: Parity },
}

impl fmt::Debug for Numerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Numerator::Named { kind, coupling } => write!(f, "{coupling}*{}", kind.name()),
            Numerator::Callable { lipschitz, parity, .. } => {
                write!(f, "callable(lipschitz={lipschitz}, {parity})")
            }
        }
    }
}

impl Numerator {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Numerator::Named { kind, coupling } => coupling * kind.unit(x),
            Numerator::Callable { func, .. } => func(x),
        }
    }

    /// `(g(x + h) − g(x))/h` on the real line; `h = 0` gives `g'(x)`.
    /// Callables fall back to finite differences.
    pub fn difference_quotient(&self, x: f64, h: f64) -> f64 {
        match self {
            Numerator::Named { kind, coupling } => coupling * kind.unit_quotient(x, h),
            Numerator::Callable { func, .. } => {
                if h.abs() < 1e-6 {
                    (func(x + 1e-6) - func(x - 1e-6)) / 2e-6
                } else {
                    (func(x + h) - func(x)) / h
                }
            }
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            Numerator::Named { kind, .. } => kind.parity(),
            Numerator::Callable { parity, .. } => *parity,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Numerator::Named { kind, coupling } => coupling.abs() * kind.unit_lipschitz(),
            Numerator::Callable { lipschitz, .. } => *lipschitz,
        }
    }
}

/// Result of evaluating `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialValue {
    Regular(f64),
    /// Closer than the floor to pole `pole`; `value` is still `g/f`.
    NearPole { value: f64, pole: usize, distance: f64 },
}

impl PotentialValue {
    pub fn value(self) -> f64 {
        match self {
            PotentialValue::Regular(v) | PotentialValue::NearPole { value: v, .. } => v,
        }
    }

    pub fn is_flagged(self) -> bool {
        matches!(self, PotentialValue::NearPole { .. })
    }
}

#[derive(Debug, Clone)]
pub struct MeromorphicPotential {
    label: String,
    poles: Vec<Pole>,
    pole_phases: Vec<Phase>,
    g: Numerator,
    epsilon_floor: f64,
}

/// Almost Mathieu: `V(x) = λ cos 2πx`, no poles.
pub fn make_amo(lambda: f64) -> MeromorphicPotential {
    MeromorphicPotential {
        label: "amo".into(),
        poles: Vec::new(),
        pole_phases: Vec::new(),
        g: Numerator::Named {
            kind: NamedNumerator::Cos2Pi,
            coupling: lambda,
        },
        epsilon_floor: DEFAULT_EPSILON_FLOOR,
    }
}

/// Maryland: `V(x) = λ tan πx` with the pole at `1/2`, written as
/// `f(x) = 2 sin π(x − 1/2)`, `g(x) = −2λ sin πx`.
pub fn make_maryland(lambda: f64) -> Result<MeromorphicPotential, PotentialError> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(PotentialError::Degenerate(format!("maryland coupling must be finite and nonzero, got {lambda}")));
    }
    MeromorphicPotential::custom(
        "maryland",
        vec![Pole::simple(TorusPoint::ratio(1, 2))],
        Numerator::Named {
            kind: NamedNumerator::SinPi,
            coupling: -2.0 * lambda,
        },
    )
}

impl MeromorphicPotential {
    /// A potential with the given poles and numerator; checks the parity
    /// of `g` against the total multiplicity and that `g(θ_l) ≠ 0`.
    pub fn custom(label: &str, poles: Vec<Pole>, g: Numerator) -> Result<Self, PotentialError> {
        if poles.iter().any(|p| p.multiplicity == 0) {
            return Err(PotentialError::Degenerate("pole multiplicity must be at least 1".into()));
        }
        for (i, a) in poles.iter().enumerate() {
            if poles[..i].iter().any(|b| b.point == a.point) {
                return Err(PotentialError::Degenerate(format!("pole {} listed twice", a.point)));
            }
        }
        let m: u32 = poles.iter().map(|p| p.multiplicity).sum();
        let expected = if m % 2 == 0 { Parity::Periodic } else { Parity::Antiperiodic };
        if g.parity() != expected {
            return Err(PotentialError::ParityMismatch { multiplicity: m, expected });
        }
        let pole_phases: Vec<Phase> = poles.iter().map(|p| p.point.phase()).collect();
        let pot = MeromorphicPotential {
            label: label.to_string(),
            poles,
            pole_phases,
            g,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
        };
        let scale = pot.g_scale();
        for (l, &ph) in pot.pole_phases.iter().enumerate() {
            if pot.g.eval(ph.to_f64()).abs() <= 1e-12 * scale {
                return Err(PotentialError::SpuriousPole { pole: l });
            }
        }
        Ok(pot)
    }

    /// Rough magnitude of `g` used to judge zeros.
    fn g_scale(&self) -> f64 {
        (0..64)
            .map(|k| self.g.eval((k as f64 + 0.5) / 64.0).abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    }

    pub fn with_epsilon_floor(mut self, floor: f64) -> Self {
        self.epsilon_floor = floor;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn pole_phases(&self) -> &[Phase] {
        &self.pole_phases
    }

    /// Total multiplicity `m`.
    pub fn total_multiplicity(&self) -> u32 {
        self.poles.iter().map(|p| p.multiplicity).sum()
    }

    pub fn numerator(&self) -> &Numerator {
        &self.g
    }

    pub fn epsilon_floor(&self) -> f64 {
        self.epsilon_floor
    }

    /// Signed lift product `Π_l (2 sin π(x − θ_l))^{m_l}`.
    pub fn f(&self, x: Phase) -> f64 {
        let mut out = 1.0;
        for (pole, &th) in self.poles.iter().zip(&self.pole_phases) {
            let s = 2.0 * (x - th).abs_sin_pi();
            let factor = if x.0 >= th.0 { s } else { -s };
            out *= factor.powi(pole.multiplicity as i32);
        }
        out
    }

    /// `ln|f(x)|`, accurate near the poles.
    pub fn ln_abs_f(&self, x: Phase) -> f64 {
        self.poles
            .iter()
            .zip(&self.pole_phases)
            .map(|(pole, &th)| pole.multiplicity as f64 * (2.0 * (x - th).abs_sin_pi()).ln())
            .sum()
    }

    pub fn g(&self, x: Phase) -> f64 {
        self.g.eval(x.to_f64())
    }

    /// `(V(x + h) − V(x))/h` for a real offset `h` (`|h| < 1/2`), evaluated
    /// without cancellation so that it stays accurate for tiny `h`; `h = 0`
    /// gives `V'(x)`.
    pub fn v_difference_quotient(&self, x: Phase, h: f64) -> f64 {
        use std::f64::consts::PI;
        let xf = x.to_f64();
        let gq = self.g.difference_quotient(xf, h);
        if self.poles.is_empty() {
            return gq;
        }
        // Factors 2 sin π(t − θ_l) on the real line, repeated by multiplicity.
        let offsets: Vec<f64> = self
            .poles
            .iter()
            .zip(&self.pole_phases)
            .flat_map(|(pole, &th)| {
                let d = if x.0 >= th.0 { (x - th).to_f64() } else { -(th - x).to_f64() };
                std::iter::repeat(d).take(pole.multiplicity as usize)
            })
            .collect();
        let at = |d: f64| 2.0 * (PI * d).sin();
        let mut suffix = vec![1.0; offsets.len() + 1];
        for k in (0..offsets.len()).rev() {
            suffix[k] = suffix[k + 1] * at(offsets[k]);
        }
        let mut prefix_shifted = 1.0;
        let mut fq = 0.0;
        for (k, &d) in offsets.iter().enumerate() {
            let dq = 4.0 * (PI * (d + h / 2.0)).cos() * sin_over(PI / 2.0, h);
            fq += prefix_shifted * dq * suffix[k + 1];
            prefix_shifted *= at(d + h);
        }
        let (f0, f1) = (suffix[0], prefix_shifted);
        gq / f1 - self.g.eval(xf) * fq / (f0 * f1)
    }

    /// Nearest pole and its torus distance.
    pub fn nearest_pole(&self, x: Phase) -> Option<(usize, f64)> {
        self.pole_phases
            .iter()
            .enumerate()
            .map(|(l, &th)| (l, (x - th).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// `V(x) = g(x)/f(x)`, flagged within the floor of a pole.
    pub fn eval(&self, x: Phase) -> Result<PotentialValue, PotentialError> {
        let value = self.g(x) / self.f(x);
        match self.nearest_pole(x) {
            Some((pole, _)) if x == self.pole_phases[pole] => Err(PotentialError::PoleHit {
                pole,
                x: format!("{:.17e}", x.to_f64()),
            }),
            Some((pole, distance)) if distance <= self.epsilon_floor => {
                Ok(PotentialValue::NearPole { value, pole, distance })
            }
            _ => Ok(PotentialValue::Regular(value)),
        }
    }

    pub fn eval_v(&self, x: &TorusPoint) -> Result<PotentialValue, PotentialError> {
        if let Some(l) = self.poles.iter().position(|p| p.point == *x) {
            return Err(PotentialError::PoleHit { pole: l, x: x.label() });
        }
        self.eval(x.phase())
    }

    /// `∫_T ln|f|` by tanh-sinh quadrature on the arcs between poles.
    pub fn log_f_integral(&self) -> f64 {
        let mut cuts: Vec<Phase> = self.pole_phases.clone();
        cuts.sort();
        cuts.dedup();
        if cuts.is_empty() {
            return 0.0;
        }
        let integrand = |x: Phase| self.ln_abs_f(x);
        if cuts.len() == 1 {
            return integrate_arc(cuts[0], 1.0, integrand, 1e-13);
        }
        (0..cuts.len())
            .map(|i| {
                let a = cuts[i];
                let b = cuts[(i + 1) % cuts.len()];
                integrate_arc(a, (b - a).to_f64(), integrand, 1e-13)
            })
            .sum()
    }
}

/// Both sides, in logarithms, of the lower bound
/// `Π_{j<q_n} |f(θ + jα)| ≥ e^{q_n(δ̂ − ε)} / q_{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FProductCheck {
    pub level: usize,
    pub q: u64,
    #[serde(serialize_with = "serial::f64")]
    pub lhs: f64,
    #[serde(serialize_with = "serial::f64")]
    pub bound: f64,
    /// No poles: `f ≡ 1` and the statement is empty.
    pub trivial: bool,
}

impl FProductCheck {
    pub fn holds(&self) -> bool {
        self.trivial || self.lhs >= self.bound
    }
}

/// Evaluate the `|f|` product bound at a level of the qualifying
/// subsequence of `delta` (the `δ` index of `θ` for this potential's poles).
pub fn f_product_check(
    pot: &MeromorphicPotential,
    theta: &TorusPoint,
    cf: &ContinuedFraction,
    level: usize,
    epsilon: f64,
    delta: &IndexValue,
) -> Result<FProductCheck, PotentialError> {
    if !delta.qualifying_levels(epsilon).contains(&level) {
        return Err(PotentialError::NotQualifying { level });
    }
    let q_big = cf.q(level)?;
    let q = match q_big.to_u64_digits().as_slice() {
        [] => 0,
        [v] if *v <= DEFAULT_STEP_BUDGET => *v,
        _ => {
            return Err(ArithmeticError::StepBudget {
                q_bits: q_big.bits(),
                budget: DEFAULT_STEP_BUDGET,
            }
            .into())
        }
    };
    let bound = q as f64 * (delta.value - epsilon) - ln_biguint(cf.q(level + 1)?);
    if pot.poles.is_empty() {
        return Ok(FProductCheck {
            level,
            q,
            lhs: 0.0,
            bound,
            trivial: true,
        });
    }
    let freq = cf.frequency();
    let start = theta.phase();
    let lhs = (0..q).map(|j| pot.ln_abs_f(freq.orbit(start, j as i64))).sum();
    Ok(FProductCheck {
        level,
        q,
        lhs,
        bound,
        trivial: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{delta_index, DeltaOptions, LiouvilleRecipe};
    use proptest::prelude::*;

    fn two_pole(g: Numerator) -> MeromorphicPotential {
        MeromorphicPotential::custom(
            "two-pole",
            vec![Pole::simple(TorusPoint::ratio(1, 3)), Pole::simple(TorusPoint::ratio(2, 3))],
            g,
        )
        .unwrap()
    }

    fn one() -> Numerator {
        Numerator::Named {
            kind: NamedNumerator::Constant,
            coupling: 1.0,
        }
    }

    #[test]
    fn amo_values() {
        let p = make_amo(2.0);
        assert_eq!(p.eval_v(&TorusPoint::ratio(0, 1)).unwrap(), PotentialValue::Regular(2.0));
        assert!(p.eval_v(&TorusPoint::ratio(1, 4)).unwrap().value().abs() < 1e-15);
        let v = make_amo(1.5).eval_v(&TorusPoint::ratio(1, 3)).unwrap().value();
        assert!((v + 0.75).abs() < 1e-15);
        assert_eq!(p.total_multiplicity(), 0);
    }

    #[test]
    fn maryland_values() {
        let p = make_maryland(1.0).unwrap();
        assert!((p.eval_v(&TorusPoint::ratio(1, 4)).unwrap().value() - 1.0).abs() < 1e-15);
        assert_eq!(p.eval_v(&TorusPoint::ratio(0, 1)).unwrap().value(), 0.0);
        let p3 = make_maryland(3.0).unwrap();
        for x in [0.1, 0.3, 0.45, 0.7, 0.9] {
            let v = p3.eval(Phase::from_f64(x)).unwrap().value();
            let want = 3.0 * (std::f64::consts::PI * x).tan();
            assert!((v - want).abs() < 1e-12 * want.abs().max(1.0), "{x}: {v} vs {want}");
        }
        assert!(matches!(make_maryland(0.0), Err(PotentialError::Degenerate(_))));
    }

    #[test]
    fn maryland_pole_is_flagged_and_hit_is_an_error() {
        let p = make_maryland(1.0).unwrap();
        let near: TorusPoint = "0.50000000000000000001".parse().unwrap();
        match p.eval_v(&near).unwrap() {
            PotentialValue::NearPole { pole, distance, value } => {
                assert_eq!(pole, 0);
                assert!((distance / 1e-20 - 1.0).abs() < 1e-6, "{distance}");
                assert!(value.abs() > 1e19);
            }
            other => panic!("not flagged: {other:?}"),
        }
        assert!(matches!(
            p.eval_v(&TorusPoint::ratio(1, 2)),
            Err(PotentialError::PoleHit { pole: 0, .. })
        ));
        let big = make_maryland(3.0).unwrap();
        let v = big.eval(Phase::HALF - Phase(1 << 80)).unwrap();
        assert!(v.is_flagged() && v.value() > 1e13);
    }

    #[test]
    fn two_pole_value_at_zero() {
        let p = two_pole(one());
        let v = p.eval_v(&TorusPoint::ratio(0, 1)).unwrap().value();
        // Hand evaluation: 1 / (2 sin(π/3))² = 1/3.
        assert!((v - 1.0 / 3.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn parity_and_spurious_poles_are_rejected() {
        let half = || vec![Pole::simple(TorusPoint::ratio(1, 2))];
        assert!(matches!(
            MeromorphicPotential::custom("x", half(), one()),
            Err(PotentialError::ParityMismatch { multiplicity: 1, .. })
        ));
        let cos = Numerator::Named {
            kind: NamedNumerator::CosPi,
            coupling: 1.0,
        };
        assert!(matches!(
            MeromorphicPotential::custom("x", half(), cos),
            Err(PotentialError::SpuriousPole { pole: 0 })
        ));
        assert!(matches!(
            "tanpi".parse::<NamedNumerator>(),
            Err(PotentialError::UnknownNumerator(_))
        ));
    }

    #[test]
    fn difference_quotients() {
        let md = make_maryland(0.7).unwrap();
        let two = two_pole(Numerator::Named {
            kind: NamedNumerator::Cos2Pi,
            coupling: 1.3,
        });
        for p in [&md, &two, &make_amo(2.0)] {
            for x in [0.05, 0.2, 0.41, 0.77] {
                let xp = Phase::from_f64(x);
                let v0 = p.eval(xp).unwrap().value();
                for h in [1e-2, -3e-3, 1e-4] {
                    let v1 = p.eval(xp + Phase::from_f64(h)).unwrap().value();
                    let direct = (v1 - v0) / h;
                    let q = p.v_difference_quotient(xp, h);
                    assert!((q - direct).abs() <= 1e-8 * direct.abs().max(1.0), "{} x={x} h={h}: {q} vs {direct}", p.label());
                }
            }
        }
        // V = λ tan πx has V' = λπ / cos² πx.
        for x in [0.1, 0.3, 0.62] {
            let want = 0.7 * std::f64::consts::PI / (std::f64::consts::PI * x).cos().powi(2);
            let got = md.v_difference_quotient(Phase::from_f64(x), 0.0);
            assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
            let tiny = md.v_difference_quotient(Phase::from_f64(x), 1e-200);
            assert!((tiny - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn maryland_numerator_is_nonzero_at_pole() {
        let p = make_maryland(1.0).unwrap();
        assert!((p.g(Phase::HALF) + 2.0).abs() < 1e-15);
        assert_eq!(p.f(Phase::HALF), 0.0);
    }

    #[test]
    fn log_f_integrates_to_zero() {
        let pots = [
            make_maryland(1.0).unwrap(),
            two_pole(one()),
            MeromorphicPotential::custom(
                "mixed",
                vec![
                    Pole::new(TorusPoint::ratio(1, 7), 2),
                    Pole::simple(TorusPoint::from_f64(0.6180339887)),
                ],
                Numerator::Named {
                    kind: NamedNumerator::SinPi,
                    coupling: 1.0,
                },
            )
            .unwrap(),
        ];
        for p in &pots {
            let v = p.log_f_integral();
            assert!(v.abs() < 1e-6, "{}: {v}", p.label());
        }
        assert_eq!(make_amo(2.0).log_f_integral(), 0.0);
    }

    #[test]
    fn f_product_trivial_without_poles() {
        let cf = ContinuedFraction::golden(20);
        let theta = TorusPoint::ratio(1, 4);
        let d = delta_index(&cf, &theta, &[], DeltaOptions::default()).unwrap();
        let lvl = d.qualifying_levels(0.1)[0];
        let c = f_product_check(&make_amo(2.0), &theta, &cf, lvl, 0.1, &d).unwrap();
        assert!(c.trivial && c.holds() && c.lhs == 0.0);
    }

    #[test]
    fn f_product_rejects_non_qualifying_level() {
        let cf = ContinuedFraction::golden(20);
        let theta = TorusPoint::ratio(1, 4);
        let p = make_maryland(1.0).unwrap();
        let d = delta_index(&cf, &theta, p.poles(), DeltaOptions::default()).unwrap();
        let bad = (0..d.per_level.len()).find(|n| !d.qualifying_levels(0.1).contains(n)).unwrap();
        assert!(matches!(
            f_product_check(&p, &theta, &cf, bad, 0.1, &d),
            Err(PotentialError::NotQualifying { .. })
        ));
    }

    #[test]
    fn f_product_single_factor_window() {
        let cf = ContinuedFraction::from_u64s(&[3, 1, 1, 1, 1]).unwrap();
        let theta = TorusPoint::ratio(1, 4);
        let p = make_maryland(1.0).unwrap();
        let d = delta_index(&cf, &theta, p.poles(), DeltaOptions::default()).unwrap();
        let c = f_product_check(&p, &theta, &cf, 0, 1e9, &d).unwrap();
        assert_eq!(c.q, 1);
        assert_eq!(c.lhs, p.ln_abs_f(theta.phase()));
    }

    #[test]
    fn maryland_f_product_bound_along_liouville_levels() {
        let cf = ContinuedFraction::liouville(LiouvilleRecipe {
            suffix: 3,
            ..LiouvilleRecipe::new(0.5, 4, 2)
        })
        .unwrap();
        let theta = TorusPoint::ratio(1, 4);
        let p = make_maryland(1.0).unwrap();
        let d = delta_index(&cf, &theta, p.poles(), DeltaOptions::default()).unwrap();
        let eps = 0.2;
        let mut checked = 0;
        for lvl in d.qualifying_levels(eps) {
            if lvl > 12 || cf.q_u64(lvl).map_or(true, |q| q > DEFAULT_STEP_BUDGET) {
                continue;
            }
            let c = f_product_check(&p, &theta, &cf, lvl, eps, &d).unwrap();
            assert!(c.holds(), "level {lvl}: {} < {}", c.lhs, c.bound);
            checked += 1;
        }
        assert!(checked >= 1);
    }

    proptest! {
        #[test]
        fn product_of_sines_matches_complex_modulus(
            x in 0.0f64..1.0,
            t1 in 0.0f64..1.0,
            t2 in 0.0f64..1.0,
            m1 in 1u32..3,
        ) {
            let poles = vec![Pole::new(TorusPoint::from_f64(t1), m1), Pole::simple(TorusPoint::from_f64(t2))];
            prop_assume!(poles[0].point != poles[1].point);
            let parity_ok = (m1 + 1) % 2 == 0;
            let g = Numerator::Named {
                kind: if parity_ok { NamedNumerator::Constant } else { NamedNumerator::SinPi },
                coupling: 1.0,
            };
            let Ok(p) = MeromorphicPotential::custom("p", poles, g) else { return Ok(()); };
            let xp = Phase::from_f64(x);
            // |e^{2πix} − e^{2πiθ}| in complex arithmetic.
            let modulus = |th: Phase| {
                let (a, b) = (2.0 * std::f64::consts::PI * xp.to_f64(), 2.0 * std::f64::consts::PI * th.to_f64());
                ((a.cos() - b.cos()).powi(2) + (a.sin() - b.sin()).powi(2)).sqrt()
            };
            let ph = p.pole_phases();
            let want = modulus(ph[0]).powi(m1 as i32) * modulus(ph[1]);
            let got = p.f(xp).abs();
            prop_assume!(want > 1e-3);
            prop_assert!((got - want).abs() <= 1e-12 * want, "{} vs {}", got, want);
        }
    }
}
