use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::{ArithmeticError, ContinuedFraction, Frequency, Pole, TorusPoint};
use crate::num::{ln_biguint, ln_ratio, torus_norm_exact, Phase, Precision};
use crate::serial;

/// Finite-depth surrogate of a `limsup` index.
///
/// `value` is the maximum of `per_level[tail_start..]`; the whole sequence
/// is kept so callers can judge convergence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexValue {
    #[serde(serialize_with = "serial::f64")]
    pub value: f64,
    pub terms_used: usize,
    pub tail_start: usize,
    #[serde(serialize_with = "serial::vec_f64")]
    pub per_level: Vec<f64>,
    /// Levels whose torus norm fell below the resolution of the inputs.
    pub resolution_limited: Vec<usize>,
    /// For `γ`: the `n` with `2θ + nα ≡ 0`, when one was found.
    pub witness: Option<i64>,
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Default tail start `⌈N/2⌉`, kept inside the sequence.
pub fn default_tail_start(len: usize) -> usize {
    len.div_ceil(2).min(len.saturating_sub(1))
}

impl IndexValue {
    pub(crate) fn from_levels(per_level: Vec<f64>, tail_start: Option<usize>) -> Self {
        let n = per_level.len();
        let tail_start = tail_start.unwrap_or_else(|| default_tail_start(n)).min(n.saturating_sub(1));
        let value = max_of(&per_level[tail_start.min(n)..]);
        IndexValue {
            value,
            terms_used: n,
            tail_start,
            per_level,
            resolution_limited: Vec::new(),
            witness: None,
        }
    }

    /// `[max over the last ⌈N/4⌉ levels, max over the last ⌈N/2⌉ levels]`.
    pub fn band(&self) -> (f64, f64) {
        let n = self.per_level.len();
        if n == 0 {
            return (self.value, self.value);
        }
        let quarter = n.div_ceil(4).max(1);
        let half = n.div_ceil(2).max(1);
        (max_of(&self.per_level[n - quarter..]), max_of(&self.per_level[n - half..]))
    }

    /// Levels `n` with `per_level_n > value − ε/4`: the subsequence along
    /// which the resonance estimates are evaluated.
    pub fn qualifying_levels(&self, epsilon: f64) -> Vec<usize> {
        let threshold = self.value - epsilon / 4.0;
        self.per_level
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(n, _)| n)
            .collect()
    }
}

/// `x / q` for a possibly astronomically large `q ≥ 1`.
fn over_big(x: f64, q: &BigUint) -> f64 {
    if x.is_infinite() || x.is_nan() {
        return x;
    }
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    x / qf
}

/// `β(α) = limsup ln q_{n+1} / q_n`, levels `n = 0..N−1`.
pub fn beta(cf: &ContinuedFraction) -> Result<IndexValue, ArithmeticError> {
    beta_with_tail(cf, None)
}

pub fn beta_with_tail(cf: &ContinuedFraction, tail_start: Option<usize>) -> Result<IndexValue, ArithmeticError> {
    if cf.depth() < 2 {
        return Err(ArithmeticError::TooFewLevels {
            needed: 3,
            available: cf.depth() + 1,
        });
    }
    let c = cf.convergents();
    let per_level = (0..cf.depth()).map(|n| over_big(ln_biguint(&c[n + 1].1), &c[n].1)).collect();
    Ok(IndexValue::from_levels(per_level, tail_start))
}

/// Default scan horizon for resonance and `Θ`-membership checks.
pub const DEFAULT_HORIZON: u64 = 10_000;

const TWO_POW_M128: f64 = 2.938_735_877_055_718_8e-39;

/// Below this distance a torus point computed from `base + k α` is
/// indistinguishable from zero.
fn resolution(k: i64, base_precision: Precision, alpha_precision: Precision) -> f64 {
    let k = k.unsigned_abs() as f64;
    let mut tau = (k + 4.0) * TWO_POW_M128 * 2.0;
    if let Precision::Bits(b) = base_precision {
        tau += 2.0 * (-(b as f64)).exp2();
    }
    if let Precision::Bits(b) = alpha_precision {
        tau += k * (-(b as f64)).exp2();
    }
    tau
}

/// `γ(α, θ) = limsup_{|n|→∞} −ln‖2θ + nα‖ / |n|`.
///
/// `per_level[i]` is the larger of the `n = ±(i+1)` terms. An exact
/// resonance inside the horizon yields `+∞` with the witnessing `n`.
pub fn gamma(cf: &ContinuedFraction, theta: &TorusPoint, horizon: u64) -> Result<IndexValue, ArithmeticError> {
    if horizon == 0 {
        return Err(ArithmeticError::TooFewLevels { needed: 1, available: 0 });
    }
    let freq = cf.frequency();
    let two_theta = Phase::from_ratio(&(theta.value() * BigRational::from_integer(2.into())));
    let alpha_precision = cf.value().precision;
    let mut per_level = Vec::with_capacity(horizon as usize);
    let mut witness = None;
    for n in 1..=horizon as i64 {
        let mut level = f64::NEG_INFINITY;
        for signed in [n, -n] {
            let d = freq.orbit(two_theta, signed).norm();
            if d <= resolution(signed, theta.precision(), alpha_precision) {
                witness.get_or_insert(signed);
                level = f64::INFINITY;
            } else {
                level = level.max(-d.ln() / n as f64);
            }
        }
        per_level.push(level);
    }
    let mut out = IndexValue::from_levels(per_level, None);
    if let Some(w) = witness {
        out.value = f64::INFINITY;
        out.witness = Some(w);
    }
    Ok(out)
}

/// Options for [`delta_index`].
#[derive(Debug, Clone, Copy)]
pub struct DeltaOptions {
    /// Translates `|k| ≤ horizon` are checked for `θ = θ_l + kα`.
    pub horizon: u64,
    pub tail_start: Option<usize>,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            horizon: DEFAULT_HORIZON,
            tail_start: None,
        }
    }
}

/// Reject phases in `Θ = ∪_l θ_l + Zα + Z` within the scan horizon.
pub fn check_phase_admissible(
    freq: &Frequency,
    alpha_precision: Precision,
    theta: &TorusPoint,
    poles: &[Pole],
    horizon: u64,
) -> Result<(), ArithmeticError> {
    for (index, pole) in poles.iter().enumerate() {
        let diff = theta.minus(&pole.point);
        let base = diff.phase();
        for k in -(horizon as i64)..=horizon as i64 {
            let d = freq.orbit(base, k).norm();
            if d <= resolution(k, diff.precision(), alpha_precision) {
                return Err(ArithmeticError::ExcludedPhase {
                    pole: index,
                    translate: -k,
                });
            }
        }
    }
    Ok(())
}

/// `δ(α, θ) = limsup (Σ_i ln‖q_n(θ − θ_i)‖ + ln q_{n+1}) / q_n`.
///
/// Torus norms are computed exactly on the stored rationals; a level is
/// flagged resolution-limited when the inputs' precision, after losing
/// `log₂ q_n` bits, cannot resolve the computed norm. With no poles the
/// per-level sequence is bitwise that of [`beta`].
pub fn delta_index(
    cf: &ContinuedFraction,
    theta: &TorusPoint,
    poles: &[Pole],
    options: DeltaOptions,
) -> Result<IndexValue, ArithmeticError> {
    if cf.depth() < 2 {
        return Err(ArithmeticError::TooFewLevels {
            needed: 3,
            available: cf.depth() + 1,
        });
    }
    check_phase_admissible(&cf.frequency(), cf.value().precision, theta, poles, options.horizon)?;
    let diffs: Vec<(TorusPoint, u32)> = poles.iter().map(|p| (theta.minus(&p.point), p.multiplicity)).collect();
    let c = cf.convergents();
    let mut per_level = Vec::with_capacity(cf.depth());
    let mut limited = Vec::new();
    for n in 0..cf.depth() {
        let q = BigRational::from_integer(c[n].1.clone().into());
        let mut sum = 0.0;
        let mut flagged = false;
        for (d, mult) in &diffs {
            let norm = torus_norm_exact(&(&q * d.value()));
            if let Precision::Bits(bits) = d.precision() {
                let effective = bits as f64 - c[n].1.bits() as f64;
                let floor = (-(effective / 2.0)).exp2();
                if effective <= 0.0 || norm.is_zero() || ln_ratio(&norm) < floor.ln() {
                    flagged = true;
                }
            }
            sum += *mult as f64 * ln_ratio(&norm);
        }
        if flagged {
            limited.push(n);
        }
        per_level.push(over_big(sum + ln_biguint(&c[n + 1].1), &c[n].1));
    }
    let mut out = IndexValue::from_levels(per_level, options.tail_start);
    out.resolution_limited = limited;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{resonant_phase, LiouvilleRecipe};
    use num_bigint::BigInt;
    use num_integer::Integer;

    #[test]
    fn golden_beta_tends_to_zero() {
        let short = beta(&ContinuedFraction::golden(10)).unwrap();
        let long = beta(&ContinuedFraction::golden(40)).unwrap();
        assert!(long.value < short.value);
        assert!(long.value < 1e-3, "{}", long.value);
        let silver = beta(&ContinuedFraction::silver(30)).unwrap();
        assert!(silver.value < 1e-4, "{}", silver.value);
    }

    #[test]
    fn beta_needs_three_convergents() {
        assert!(matches!(
            beta(&ContinuedFraction::golden(1)),
            Err(ArithmeticError::TooFewLevels { .. })
        ));
    }

    #[test]
    fn liouville_beta_levels_match_big_integer_logs() {
        let cf = ContinuedFraction::liouville(LiouvilleRecipe::new(1.0, 0, 3)).unwrap();
        let b = beta(&cf).unwrap();
        // Level-by-level oracle: ln q_{n+1} / q_n with q_n small.
        let q: Vec<BigUint> = cf.convergents().iter().map(|c| c.1.clone()).collect();
        for n in 0..3 {
            let expect = ln_biguint(&q[n + 1]) / q[n].to_f64().unwrap();
            assert_eq!(b.per_level[n], expect);
        }
        assert!((b.value - 1.0).abs() < 0.05, "{}", b.value);
    }

    #[test]
    fn delta_without_poles_is_beta_bitwise() {
        let cf = ContinuedFraction::from_u64s(&[1, 2, 1, 2, 5, 1, 1, 30, 2, 1, 1, 1]).unwrap();
        let b = beta(&cf).unwrap();
        let d = delta_index(&cf, &TorusPoint::ratio(1, 4), &[], DeltaOptions::default()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&b.per_level), bits(&d.per_level));
        assert_eq!(b.value.to_bits(), d.value.to_bits());
    }

    /// Integer-only oracle for `‖q (a/b − 1/2)‖`: reduce `q(2a − b)` modulo `2b`.
    fn maryland_norm_oracle(q: &BigUint, a: i64, b: i64) -> BigRational {
        let m = BigInt::from(2 * b);
        let r = (BigInt::from(q.clone()) * BigInt::from(2 * a - b)).mod_floor(&m);
        let other = &m - &r;
        BigRational::new(r.min(other), m)
    }

    #[test]
    fn maryland_delta_matches_exact_oracle() {
        let cf = ContinuedFraction::golden(30);
        let poles = [Pole::simple(TorusPoint::ratio(1, 2))];
        let d = delta_index(&cf, &TorusPoint::ratio(1, 4), &poles, DeltaOptions::default()).unwrap();
        for n in 0..cf.depth() {
            let q = &cf.convergents()[n].1;
            let q_next = &cf.convergents()[n + 1].1;
            let norm = maryland_norm_oracle(q, 1, 4);
            let ln_norm = if norm.is_zero() {
                f64::NEG_INFINITY
            } else {
                (norm.numer().to_f64().unwrap() / norm.denom().to_f64().unwrap()).ln()
            };
            let expect = (ln_norm + (q_next.to_f64().unwrap()).ln()) / q.to_f64().unwrap();
            let got = d.per_level[n];
            if expect.is_infinite() {
                assert_eq!(got, expect);
            } else {
                assert!((got - expect).abs() <= 1e-10, "level {n}: {got} vs {expect}");
            }
        }
        assert!(d.resolution_limited.is_empty());
    }

    #[test]
    fn phase_on_pole_orbit_is_excluded() {
        let cf = ContinuedFraction::golden(20);
        let pole = Pole::simple(TorusPoint::ratio(1, 2));
        // θ = 1/2 + 3α, built exactly from the stored value.
        let theta = TorusPoint::exact(BigRational::new(1.into(), 2.into()) + cf.value().value.clone() * BigRational::from_integer(3.into()));
        let err = delta_index(&cf, &theta, &[pole.clone()], DeltaOptions::default()).unwrap_err();
        assert_eq!(err, ArithmeticError::ExcludedPhase { pole: 0, translate: 3 });
        let err = delta_index(&cf, &TorusPoint::ratio(1, 2), &[pole], DeltaOptions::default()).unwrap_err();
        assert_eq!(err, ArithmeticError::ExcludedPhase { pole: 0, translate: 0 });
    }

    #[test]
    fn gamma_generic_phase_is_small() {
        let cf = ContinuedFraction::golden(40);
        let g = gamma(&cf, &TorusPoint::ratio(1, 4), 10_000).unwrap();
        assert!(g.value.abs() < 0.01, "{}", g.value);
        let g0 = gamma(&cf, &TorusPoint::ratio(0, 1), 10_000).unwrap();
        assert!(g0.value.abs() < 0.01, "{}", g0.value);
        assert!(g0.witness.is_none());
    }

    #[test]
    fn gamma_detects_exact_resonance() {
        let cf = ContinuedFraction::golden(40);
        let theta = TorusPoint::exact(resonant_phase(&cf, 37));
        let g = gamma(&cf, &theta, 1000).unwrap();
        assert_eq!(g.value, f64::INFINITY);
        assert_eq!(g.witness, Some(37));
    }

    #[test]
    fn bands_bracket_the_tail() {
        let v = IndexValue::from_levels(vec![5.0, 1.0, 2.0, 0.5, 0.25, 3.0, 0.1, 0.2], None);
        assert_eq!(v.tail_start, 4);
        assert_eq!(v.value, 3.0);
        assert_eq!(v.band(), (0.2, 3.0));
        assert_eq!(v.qualifying_levels(0.4), vec![0, 5]);
    }
}
