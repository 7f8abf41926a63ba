use serde::Serialize;

use super::lhs::gordon_lhs;
use super::GordonError;
use crate::arithmetic::{ContinuedFraction, IndexValue};
use crate::num::Phase;
use crate::potential::{MeromorphicPotential, PotentialError};
use crate::serial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaStatus {
    Holds,
    Fails,
    /// The bound `e^{q(L − δ̂ + 4ε)}` is at least 1.
    Vacuous,
}

/// Both Gordon differences at a qualifying level against
/// `e^{q(L − δ̂ + 4ε)}`, in logarithms. The differences are operator norms,
/// so the comparison covers every initial vector at once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub level: usize,
    pub q: u64,
    #[serde(serialize_with = "serial::f64")]
    pub epsilon: f64,
    #[serde(rename = "L", serialize_with = "serial::f64")]
    pub lyapunov: f64,
    #[serde(serialize_with = "serial::f64")]
    pub delta_hat: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_bound: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_lhs_inverse: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_lhs_square: f64,
    /// `ln_bound − max(ln lhs)`.
    #[serde(serialize_with = "serial::f64")]
    pub margin: f64,
    /// `q` times the Lyapunov uncertainty plus the width of the `δ̂` band.
    #[serde(serialize_with = "serial::f64")]
    pub uncertainty: f64,
    pub status: LemmaStatus,
}

impl LemmaReport {
    /// Holds with the margin exceeding the uncertainty.
    pub fn holds_robustly(&self) -> bool {
        self.status == LemmaStatus::Holds && self.margin > self.uncertainty
    }
}

/// Evaluate the resonance estimate at `level`, which must belong to the
/// qualifying subsequence of `delta_hat` for `epsilon`.
#[allow(clippy::too_many_arguments)]
pub fn lemma_a_check(
    pot: &MeromorphicPotential,
    energy: f64,
    theta: Phase,
    cf: &ContinuedFraction,
    level: usize,
    epsilon: f64,
    lyapunov: f64,
    lyapunov_uncertainty: f64,
    delta_hat: &IndexValue,
) -> Result<LemmaReport, GordonError> {
    if !delta_hat.qualifying_levels(epsilon).contains(&level) {
        return Err(PotentialError::NotQualifying { level }.into());
    }
    let g = gordon_lhs(pot, energy, theta, cf, level)?;
    let q = g.q as f64;
    let ln_bound = q * (lyapunov - delta_hat.value + 4.0 * epsilon);
    let worst = g.ln_inverse.max(g.ln_square);
    let margin = ln_bound - worst;
    let (lower, upper) = delta_hat.band();
    let status = if ln_bound >= 0.0 {
        LemmaStatus::Vacuous
    } else if margin >= 0.0 {
        LemmaStatus::Holds
    } else {
        LemmaStatus::Fails
    };
    Ok(LemmaReport {
        level,
        q: g.q,
        epsilon,
        lyapunov,
        delta_hat: delta_hat.value,
        ln_bound,
        ln_lhs_inverse: g.ln_inverse,
        ln_lhs_square: g.ln_square,
        margin,
        uncertainty: q * (lyapunov_uncertainty + (upper - lower)),
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{beta, LiouvilleRecipe};
    use crate::potential::make_amo;

    #[test]
    fn large_lyapunov_makes_the_check_vacuous() {
        let cf = ContinuedFraction::liouville(LiouvilleRecipe {
            suffix: 2,
            ..LiouvilleRecipe::new(1.0, 2, 3)
        })
        .unwrap();
        let d = beta(&cf).unwrap();
        let level = d.qualifying_levels(0.1)[0];
        let r = lemma_a_check(&make_amo(6.0), 0.5, Phase::from_f64(0.2), &cf, level, 0.1, 2.0, 0.0, &d).unwrap();
        assert_eq!(r.status, LemmaStatus::Vacuous);
        assert!(r.ln_bound >= 0.0);
    }

    #[test]
    fn non_qualifying_levels_are_refused() {
        let cf = ContinuedFraction::liouville(LiouvilleRecipe {
            suffix: 2,
            ..LiouvilleRecipe::new(1.0, 2, 3)
        })
        .unwrap();
        let d = beta(&cf).unwrap();
        assert!(matches!(
            lemma_a_check(&make_amo(1.0), 0.5, Phase::ZERO, &cf, 0, 0.1, 0.0, 0.0, &d),
            Err(GordonError::Potential(PotentialError::NotQualifying { level: 0 }))
        ));
    }
}
