use serde::Serialize;

use super::GordonError;
use crate::arithmetic::Frequency;
use crate::cocycle::{step_a, vec_norm};
use crate::num::Phase;
use crate::potential::MeromorphicPotential;
use crate::serial;

/// `φ_k` for `k ∈ [start, start + values.len())`, a formal solution of
/// `Hφ = Eφ` with `‖(φ_0, φ_{−1})‖ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSegment {
    #[serde(rename = "E", serialize_with = "serial::f64")]
    pub energy: f64,
    #[serde(skip)]
    pub theta: Phase,
    pub initial: [f64; 2],
    pub start: i64,
    #[serde(serialize_with = "serial::vec_f64")]
    pub values: Vec<f64>,
    /// Why the segment stops short of the requested range.
    pub truncated: Option<String>,
    /// Largest relative recurrence residual over interior sites.
    #[serde(serialize_with = "serial::f64")]
    pub residual: f64,
}

impl SolutionSegment {
    /// Last index covered.
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn get(&self, k: i64) -> Option<f64> {
        if k < self.start {
            return None;
        }
        self.values.get((k - self.start) as usize).copied()
    }

    /// `‖(φ_k, φ_{k−1})‖`.
    pub fn pair_norm(&self, k: i64) -> Option<f64> {
        Some(vec_norm([self.get(k)?, self.get(k - 1)?]))
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        self.start <= lo && self.end() >= hi
    }
}

/// Fill `φ` over `range = (lo, hi)` from `(φ_0, φ_{−1}) = initial/‖initial‖`
/// using `φ_{k+1} = (E − V_k)φ_k − φ_{k−1}` forward and its mirror backward.
/// A pole or overflow stops that direction and is recorded in `truncated`.
pub fn solve_recurrence(
    pot: &MeromorphicPotential,
    energy: f64,
    theta: Phase,
    freq: &Frequency,
    initial: [f64; 2],
    range: (i64, i64),
) -> Result<SolutionSegment, GordonError> {
    let (lo, hi) = range;
    if lo > -1 || hi < 0 {
        return Err(GordonError::Range {
            needed: (-1, 0),
            available: range,
        });
    }
    let norm = vec_norm(initial);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(GordonError::ZeroInitial);
    }
    let initial = [initial[0] / norm, initial[1] / norm];
    let diag = |k: i64| step_a(pot, energy, freq.orbit(theta, k)).map(|m| m.0[0][0]);
    let mut truncated = None;

    let mut forward = vec![initial[1], initial[0]];
    for k in 0..hi {
        match diag(k) {
            Ok(d) => {
                let next = d * forward[forward.len() - 1] - forward[forward.len() - 2];
                if !next.is_finite() {
                    truncated = Some(format!("overflow at site {}", k + 1));
                    break;
                }
                forward.push(next);
            }
            Err(_) => {
                truncated = Some(format!("pole at site {k}"));
                break;
            }
        }
    }
    let mut backward = vec![initial[0], initial[1]];
    for k in (lo + 1..=-1).rev() {
        match diag(k) {
            Ok(d) => {
                let next = d * backward[backward.len() - 1] - backward[backward.len() - 2];
                if !next.is_finite() {
                    truncated.get_or_insert(format!("overflow at site {}", k - 1));
                    break;
                }
                backward.push(next);
            }
            Err(_) => {
                truncated.get_or_insert(format!("pole at site {k}"));
                break;
            }
        }
    }
    let start = -(backward.len() as i64) + 1;
    let mut values: Vec<f64> = backward[2..].iter().rev().copied().collect();
    values.extend_from_slice(&forward);

    let mut residual = 0.0f64;
    for (i, w) in values.windows(3).enumerate() {
        let k = start + i as i64 + 1;
        if let Ok(d) = diag(k) {
            let r = (w[2] + w[0] - d * w[1]).abs();
            let scale = w[2].abs() + w[0].abs() + (d * w[1]).abs();
            if scale > 0.0 {
                residual = residual.max(r / scale);
            }
        }
    }
    Ok(SolutionSegment {
        energy,
        theta,
        initial,
        start,
        values,
        truncated,
        residual,
    })
}
