use num_traits::ToPrimitive;
use serde::Serialize;

use super::{ArithmeticError, ContinuedFraction, Frequency, Pole, TorusPoint};
use crate::num::{ln_biguint, Phase};
use crate::serial;

/// Largest window `q_n` scanned by the orbit-sum routines.
pub const DEFAULT_STEP_BUDGET: u64 = 20_000_000;

fn window(cf: &ContinuedFraction, n: usize, budget: u64) -> Result<u64, ArithmeticError> {
    let q = cf.q(n)?;
    match q.to_u64() {
        Some(q) if q <= budget => Ok(q),
        _ => Err(ArithmeticError::StepBudget { q_bits: q.bits(), budget }),
    }
}

/// Index of the orbit point closest to an integer over `j = 0..q−1`;
/// ties go to the smallest `j`.
pub fn argmin_over_window(start: Phase, freq: &Frequency, q: u64) -> (u64, Phase) {
    let mut best = (0u64, start);
    let mut best_norm = start.0.min(start.0.wrapping_neg());
    for j in 1..q {
        let x = freq.orbit(start, j as i64);
        let nrm = x.0.min(x.0.wrapping_neg());
        if nrm < best_norm {
            best_norm = nrm;
            best = (j, x);
        }
    }
    best
}

/// `j₀` minimizing `|sin π(θ + jα)|` over `0 ≤ j ≤ q_n − 1`, and the minimum.
pub fn min_sine_index(theta: &TorusPoint, cf: &ContinuedFraction, n: usize) -> Result<(u64, f64), ArithmeticError> {
    let q = window(cf, n, DEFAULT_STEP_BUDGET)?;
    let (j0, x) = argmin_over_window(theta.phase(), &cf.frequency(), q);
    Ok((j0, x.abs_sin_pi()))
}

/// The orbit sum `S = Σ_{j≠j₀} ln|sin π(θ + jα)| + (q_n − 1) ln 2` together
/// with `ln q_n`; it stays within `C ln q_n` of zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SineProductCheck {
    pub q: u64,
    pub j0: u64,
    #[serde(serialize_with = "serial::f64")]
    pub sum: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_q: f64,
}

impl SineProductCheck {
    /// `|S| / ln q_n`, zero when `q_n = 1`.
    pub fn ratio(&self) -> f64 {
        if self.q <= 1 {
            0.0
        } else {
            self.sum.abs() / self.ln_q
        }
    }

    pub fn holds(&self, c: f64) -> bool {
        self.sum.abs() <= c * self.ln_q
    }
}

/// [`sine_product_check`] over an explicit window and rotation.
pub fn sine_product_over_window(start: Phase, freq: &Frequency, q: u64) -> SineProductCheck {
    let (j0, _) = argmin_over_window(start, freq, q);
    let mut sum = 0.0;
    for j in 0..q {
        if j != j0 {
            sum += freq.orbit(start, j as i64).abs_sin_pi().ln();
        }
    }
    sum += (q as f64 - 1.0) * std::f64::consts::LN_2;
    SineProductCheck {
        q,
        j0,
        sum,
        ln_q: (q as f64).ln(),
    }
}

pub fn sine_product_check(theta: &TorusPoint, cf: &ContinuedFraction, n: usize) -> Result<SineProductCheck, ArithmeticError> {
    let q = window(cf, n, DEFAULT_STEP_BUDGET)?;
    Ok(sine_product_over_window(theta.phase(), &cf.frequency(), q))
}

/// Lower bound on the closest approach of the orbit to the poles along a
/// qualifying level: `Π_l |sin π(θ − θ_l + j_l α)| ≥ e^{q(δ̂ − ε/2)} / q_{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceProductCheck {
    pub level: usize,
    pub q: u64,
    pub minimizers: Vec<u64>,
    #[serde(serialize_with = "serial::f64")]
    pub ln_product: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_bound: f64,
}

impl ResonanceProductCheck {
    pub fn holds(&self) -> bool {
        self.ln_product >= self.ln_bound
    }
}

pub fn resonance_product_check(
    theta: &TorusPoint,
    poles: &[Pole],
    cf: &ContinuedFraction,
    level: usize,
    delta_hat: f64,
    epsilon: f64,
) -> Result<ResonanceProductCheck, ArithmeticError> {
    let q = window(cf, level, DEFAULT_STEP_BUDGET)?;
    let freq = cf.frequency();
    let mut ln_product = 0.0;
    let mut minimizers = Vec::with_capacity(poles.len());
    for pole in poles {
        let (j, x) = argmin_over_window(theta.minus(&pole.point).phase(), &freq, q);
        minimizers.push(j);
        ln_product += pole.multiplicity as f64 * x.abs_sin_pi().ln();
    }
    let ln_q_next = ln_biguint(cf.q(level + 1)?);
    Ok(ResonanceProductCheck {
        level,
        q,
        minimizers,
        ln_product,
        ln_bound: q as f64 * (delta_hat - epsilon / 2.0) - ln_q_next,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Real;
    use num_rational::BigRational;
    use num_traits::Signed;

    #[test]
    fn zero_phase_minimizer() {
        let cf = ContinuedFraction::golden(20);
        for n in [0, 3, 8] {
            assert_eq!(min_sine_index(&TorusPoint::ratio(0, 1), &cf, n).unwrap(), (0, 0.0));
        }
    }

    #[test]
    fn single_candidate_window() {
        let cf = ContinuedFraction::golden(20);
        let (j0, v) = min_sine_index(&TorusPoint::ratio(1, 4), &cf, 0).unwrap();
        assert_eq!(j0, 0);
        assert!((v - (std::f64::consts::PI / 4.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn minimizer_agrees_with_exact_rational_scan() {
        let cf = ContinuedFraction::golden(40);
        let theta = TorusPoint::ratio(49, 100);
        assert_eq!(cf.q_u64(5).unwrap(), 8);
        let (j0, _) = min_sine_index(&theta, &cf, 5).unwrap();
        // Oracle: exact distances of θ + jα to Z over the same window.
        let alpha = &cf.value().value;
        let exact: Vec<BigRational> = (0..8)
            .map(|j| {
                let x = theta.value() + alpha * BigRational::from_integer(j.into());
                let r = &x - x.round();
                r.abs()
            })
            .collect();
        let best = (0..8).min_by(|&a, &b| exact[a].cmp(&exact[b]).then(a.cmp(&b))).unwrap();
        assert_eq!(j0, best as u64);
    }

    #[test]
    fn empty_sum_for_unit_window() {
        let cf = ContinuedFraction::golden(10);
        let s = sine_product_check(&TorusPoint::ratio(3, 10), &cf, 0).unwrap();
        assert_eq!(s.sum, 0.0);
        assert_eq!(s.ratio(), 0.0);
    }

    #[test]
    fn golden_orbit_sums_stay_logarithmic() {
        let cf = ContinuedFraction::golden(30);
        let theta = TorusPoint::ratio(3, 10);
        let worst = (5..=18)
            .map(|n| sine_product_check(&theta, &cf, n).unwrap().ratio())
            .fold(0.0, f64::max);
        assert!(worst <= 10.0, "{worst}");
    }

    #[test]
    fn reflection_symmetry_of_orbit_sums() {
        // |sin π(1 − x)| = |sin π x|: the sum at 1 − θ with rotation −α
        // equals the sum at θ with rotation α.
        let cf = ContinuedFraction::golden(30);
        let freq = cf.frequency();
        for n in [5usize, 9, 14] {
            let q = cf.q_u64(n).unwrap();
            let a = sine_product_over_window(TorusPoint::ratio(3, 10).phase(), &freq, q);
            let b = sine_product_over_window(TorusPoint::ratio(7, 10).phase(), &freq.negated(), q);
            assert_eq!(a.j0, b.j0);
            assert!((a.sum - b.sum).abs() < 1e-9 * q as f64, "{} vs {}", a.sum, b.sum);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let cf = ContinuedFraction::golden(60);
        assert!(matches!(
            min_sine_index(&TorusPoint::ratio(1, 3), &cf, 59),
            Err(ArithmeticError::StepBudget { .. })
        ));
    }

    #[test]
    fn golden_value_is_close_to_real_golden_mean() {
        let cf = ContinuedFraction::golden(40);
        assert!((cf.value().to_f64() - Real::golden_mean(64).to_f64()).abs() < 1e-15);
    }
}
