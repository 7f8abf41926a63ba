use rayon::prelude::*;
use serde::Serialize;

use super::lhs::{gordon_lhs, window_length, GordonLhs, TraceCase};
use super::solution::{solve_recurrence, SolutionSegment};
use super::GordonError;
use crate::arithmetic::{ContinuedFraction, Frequency};
use crate::cocycle::vec_norm;
use crate::num::Phase;
use crate::potential::MeromorphicPotential;
use crate::serial;
use crate::spectral::{capped_orbit_values, solve_shifted, DEFAULT_V_CAP};

/// Default decay rate `c` in `lhs ≤ e^{−c q}`.
pub const DEFAULT_RATE: f64 = 0.01;
pub const DEFAULT_DIRECTIONS: usize = 360;
pub const MAX_NORM_THRESHOLD: f64 = 0.25;
pub const MAX_NORM_TOLERANCE: f64 = 1e-6;
/// Largest `q` for which the solution is also regenerated by recurrence.
const RECURRENCE_MAX_Q: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Excluded,
    Inconclusive,
}

/// `max{‖(φ_q, φ_{q−1})‖, ‖(φ_{−q}, φ_{−q−1})‖, ‖(φ_{2q}, φ_{2q−1})‖}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxInequality {
    #[serde(serialize_with = "serial::vec_f64")]
    pub norms: [f64; 3],
    #[serde(serialize_with = "serial::f64")]
    pub max_norm: f64,
    pub verdict: Verdict,
}

fn verdict_for(max_norm: f64, lhs_small: bool) -> Verdict {
    if lhs_small && max_norm >= MAX_NORM_THRESHOLD - MAX_NORM_TOLERANCE {
        Verdict::Excluded
    } else {
        Verdict::Inconclusive
    }
}

/// The three Gordon norms of a solution segment covering `[−q−1, 2q]`.
/// The verdict is `excluded` only when `lhs_small` and the max clears `1/4`.
pub fn max_inequality(seg: &SolutionSegment, q: u64, lhs_small: bool) -> Result<MaxInequality, GordonError> {
    let q = q as i64;
    if !seg.covers(-q - 1, 2 * q) {
        return Err(GordonError::Range {
            needed: (-q - 1, 2 * q),
            available: (seg.start, seg.end()),
        });
    }
    let norms = [q, -q, 2 * q].map(|k| seg.pair_norm(k).expect("covered"));
    let max_norm = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MaxInequality {
        norms,
        max_norm,
        verdict: verdict_for(max_norm, lhs_small),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateOptions {
    pub directions: usize,
    /// Also test the direction obtained by inverse iteration at `E`.
    pub contracted: bool,
    /// Largest truncation used for the contracted direction.
    pub contracted_max_sites: usize,
    pub iterations: usize,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            directions: DEFAULT_DIRECTIONS,
            contracted: true,
            contracted_max_sites: 4_000_005,
            iterations: 3,
        }
    }
}

/// One initial vector `(φ_0, φ_{−1})` tested at one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionCheck {
    pub label: String,
    #[serde(serialize_with = "serial::vec_f64")]
    pub v: [f64; 2],
    #[serde(serialize_with = "serial::f64")]
    pub ln_lhs_square: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_lhs_inverse: f64,
    #[serde(serialize_with = "serial::f64")]
    pub max_norm: f64,
    pub verdict: Verdict,
}

/// The certificate at one level. `lhs_*` are the worst values over the tested
/// directions and `max_norm` the smallest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GordonCertificate {
    #[serde(rename = "E", serialize_with = "serial::f64")]
    pub energy: f64,
    pub level: usize,
    pub q: u64,
    #[serde(serialize_with = "serial::f64")]
    pub lhs_square: f64,
    #[serde(serialize_with = "serial::f64")]
    pub lhs_inverse: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_lhs_square: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_lhs_inverse: f64,
    #[serde(serialize_with = "serial::f64")]
    pub trace: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_abs_trace: f64,
    pub case: TraceCase,
    #[serde(serialize_with = "serial::f64")]
    pub max_norm: f64,
    /// `−ln(max lhs)/q`.
    #[serde(serialize_with = "serial::f64")]
    pub empirical_rate: f64,
    /// Lower bound on the max norm implied by the trace and the worst lhs:
    /// `(|tr| − lhs_inverse)/2` or `(2/3)(1 − lhs_square)`.
    #[serde(serialize_with = "serial::f64")]
    pub implied_bound: f64,
    pub verdict: Verdict,
    pub contracted: Option<DirectionCheck>,
    /// The contracted (or first grid) direction regenerated by recurrence.
    pub recurrence: Option<MaxInequality>,
    #[serde(skip)]
    pub directions: Vec<DirectionCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusionReport {
    #[serde(rename = "E", serialize_with = "serial::f64")]
    pub energy: f64,
    #[serde(serialize_with = "serial::f64")]
    pub c: f64,
    pub levels: Vec<GordonCertificate>,
    pub verdict: Verdict,
}

/// `(u_0, u_{−1})` of `(H_N − E)^{−k} 1` on sites `[−2q−2, 2q+2]`, normalized;
/// the direction a decaying eigenvector near `E` would start from.
pub fn contracted_direction(
    pot: &MeromorphicPotential,
    energy: f64,
    theta: Phase,
    freq: &Frequency,
    q: u64,
    iterations: usize,
) -> Option<[f64; 2]> {
    let half = 2 * q as i64 + 2;
    let (diag, _) = capped_orbit_values(pot, theta, freq, -half, (2 * half + 1) as usize, DEFAULT_V_CAP);
    let mut u = vec![1.0; diag.len()];
    for _ in 0..iterations.max(1) {
        u = solve_shifted(&diag, energy, &u);
        let m = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(m > 0.0 && m.is_finite()) {
            return None;
        }
        u.iter_mut().for_each(|x| *x /= m);
    }
    let i = half as usize;
    let v = [u[i], u[i - 1]];
    let n = vec_norm(v);
    (n > 0.0 && n.is_finite()).then(|| [v[0] / n, v[1] / n])
}

fn check(g: &GordonLhs, label: String, v: [f64; 2], c: f64) -> DirectionCheck {
    let ln_sq = g.ln_square_at(v);
    let ln_inv = g.ln_inverse_at(v);
    let ln_max = g.ln_gordon_norms(v).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let threshold = -c * g.q as f64;
    let max_norm = ln_max.exp();
    DirectionCheck {
        label,
        v,
        ln_lhs_square: ln_sq,
        ln_lhs_inverse: ln_inv,
        max_norm,
        verdict: verdict_for(max_norm, ln_sq <= threshold && ln_inv <= threshold),
    }
}

fn level_certificate(
    pot: &MeromorphicPotential,
    energy: f64,
    theta: Phase,
    cf: &ContinuedFraction,
    level: usize,
    c: f64,
    opts: &CertificateOptions,
) -> Result<GordonCertificate, GordonError> {
    let q = window_length(cf, level)?;
    let g = gordon_lhs(pot, energy, theta, cf, level)?;
    let freq = cf.frequency();
    let directions: Vec<DirectionCheck> = (0..opts.directions)
        .into_par_iter()
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / opts.directions as f64;
            check(&g, format!("grid {i}"), [a.cos(), a.sin()], c)
        })
        .collect();
    let contracted = if opts.contracted && 4 * q as usize + 5 <= opts.contracted_max_sites {
        contracted_direction(pot, energy, theta, &freq, q, opts.iterations)
            .map(|v| check(&g, "contracted".to_string(), v, c))
    } else {
        None
    };
    let all = || directions.iter().chain(contracted.as_ref());
    let ln_sq = all().map(|d| d.ln_lhs_square).fold(f64::NEG_INFINITY, f64::max);
    let ln_inv = all().map(|d| d.ln_lhs_inverse).fold(f64::NEG_INFINITY, f64::max);
    let max_norm = all().map(|d| d.max_norm).fold(f64::INFINITY, f64::min);
    let verdict = if all().count() > 0 && all().all(|d| d.verdict == Verdict::Excluded) {
        Verdict::Excluded
    } else {
        Verdict::Inconclusive
    };
    let (lhs_sq, lhs_inv) = (ln_sq.exp(), ln_inv.exp());
    let implied_bound = match g.case() {
        TraceCase::Inverse => (g.trace.abs() - lhs_inv) / 2.0,
        TraceCase::Square => 2.0 / 3.0 * (1.0 - lhs_sq),
    };
    let recurrence = if q <= RECURRENCE_MAX_Q {
        let v = contracted.as_ref().map_or([1.0, 0.0], |d| d.v);
        let lhs_small = ln_sq.max(ln_inv) <= -c * q as f64;
        solve_recurrence(pot, energy, theta, &freq, v, (-(q as i64) - 1, 2 * q as i64))
            .ok()
            .and_then(|seg| max_inequality(&seg, q, lhs_small).ok())
    } else {
        None
    };
    Ok(GordonCertificate {
        energy,
        level,
        q,
        lhs_square: lhs_sq,
        lhs_inverse: lhs_inv,
        ln_lhs_square: ln_sq,
        ln_lhs_inverse: ln_inv,
        trace: g.trace,
        ln_abs_trace: g.ln_abs_trace,
        case: g.case(),
        max_norm,
        empirical_rate: -ln_sq.max(ln_inv) / q as f64,
        implied_bound,
        verdict,
        contracted,
        recurrence,
        directions,
    })
}

/// Per-level certificates; the overall verdict is `excluded` when some level
/// excludes every tested direction.
pub fn exclusion_certificate(
    pot: &MeromorphicPotential,
    energy: f64,
    theta: Phase,
    cf: &ContinuedFraction,
    levels: &[usize],
    c: f64,
    opts: &CertificateOptions,
) -> Result<ExclusionReport, GordonError> {
    if levels.is_empty() {
        return Err(GordonError::NoLevels);
    }
    let levels = levels
        .iter()
        .map(|&level| level_certificate(pot, energy, theta, cf, level, c, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let verdict = if levels.iter().any(|l| l.verdict == Verdict::Excluded) {
        Verdict::Excluded
    } else {
        Verdict::Inconclusive
    };
    Ok(ExclusionReport {
        energy,
        c,
        levels,
        verdict,
    })
}
