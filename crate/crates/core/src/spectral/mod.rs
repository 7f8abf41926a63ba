//! Truncated spectra, Lyapunov scans over energy grids and the
//! classification of energies against `δ(α, θ)`.

mod tridiag;

pub use tridiag::{count_below, gershgorin, kth_eigenvalue, solve_shifted};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arithmetic::{Frequency, IndexValue};
use crate::cocycle::{lyapunov, LyapunovEstimate, LyapunovOptions};
use crate::num::Phase;
use crate::potential::{MeromorphicPotential, PotentialError, PotentialValue};
use crate::serial;

/// Default `|V|` cap used inside truncations.
pub const DEFAULT_V_CAP: f64 = 1e12;
/// Default bisection width.
pub const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("truncation size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("site {site} of the truncation lies at a pole (|V| = {magnitude:e})")]
    PoleInWindow { site: usize, magnitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// `φ_{−1} = φ_N = 0`.
    #[default]
    Dirichlet,
    /// `φ_{−1} = φ_0`, `φ_N = φ_{N−1}`.
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolePolicy {
    /// Replace `|V| > cap` by `±cap` and flag the result.
    Cap(f64),
    /// Refuse windows that need capping.
    Strict(f64),
}

impl Default for PolePolicy {
    fn default() -> Self {
        PolePolicy::Cap(DEFAULT_V_CAP)
    }
}

/// Diagonal `V(θ + kα)`, `k = 0..N−1`, of the truncated operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationDiagonal {
    pub diag: Vec<f64>,
    pub capped: Vec<usize>,
}

/// Potential values along `θ + kα`, `k ∈ [start, start + len)`, with `|V|`
/// capped at `cap` (exact pole hits become `cap`). Returns capped sites
/// relative to `start`.
pub fn capped_orbit_values(
    pot: &MeromorphicPotential,
    theta: Phase,
    freq: &Frequency,
    start: i64,
    len: usize,
    cap: f64,
) -> (Vec<f64>, Vec<usize>) {
    let mut capped = Vec::new();
    let values = (0..len)
        .map(|i| {
            let x = freq.orbit(theta, start + i as i64);
            let v = match pot.eval(x) {
                Ok(PotentialValue::Regular(v)) | Ok(PotentialValue::NearPole { value: v, .. }) => v,
                Err(PotentialError::PoleHit { .. }) => f64::INFINITY,
                Err(_) => f64::NAN,
            };
            if !(v.abs() <= cap) {
                capped.push(i);
                if v.is_nan() {
                    cap
                } else {
                    cap.copysign(v)
                }
            } else {
                v
            }
        })
        .collect();
    (values, capped)
}

pub fn truncation_diagonal(
    pot: &MeromorphicPotential,
    theta: Phase,
    freq: &Frequency,
    n: usize,
    boundary: Boundary,
    policy: PolePolicy,
) -> Result<TruncationDiagonal, SpectralError> {
    if n < 2 {
        return Err(SpectralError::TooSmall(n));
    }
    let cap = match policy {
        PolePolicy::Cap(c) | PolePolicy::Strict(c) => c,
    };
    let (mut diag, capped) = capped_orbit_values(pot, theta, freq, 0, n, cap);
    if let (PolePolicy::Strict(_), Some(&site)) = (policy, capped.first()) {
        return Err(SpectralError::PoleInWindow {
            site,
            magnitude: diag[site].abs(),
        });
    }
    if boundary == Boundary::Neumann {
        diag[0] += 1.0;
        diag[n - 1] += 1.0;
    }
    Ok(TruncationDiagonal { diag, capped })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedSpectrum {
    #[serde(serialize_with = "serial::vec_f64")]
    pub eigenvalues: Vec<f64>,
    /// Sites whose potential was capped; nonempty means every eigenvalue
    /// is flagged as pole-influenced.
    pub capped_sites: Vec<usize>,
}

impl TruncatedSpectrum {
    pub fn pole_influenced(&self) -> bool {
        !self.capped_sites.is_empty()
    }
}

/// Eigenvalues of the `N×N` truncation by Sturm bisection, ascending.
pub fn truncated_spectrum(
    pot: &MeromorphicPotential,
    theta: Phase,
    freq: &Frequency,
    n: usize,
    boundary: Boundary,
    policy: PolePolicy,
) -> Result<TruncatedSpectrum, SpectralError> {
    let t = truncation_diagonal(pot, theta, freq, n, boundary, policy)?;
    Ok(TruncatedSpectrum {
        eigenvalues: eigenvalues(&t.diag),
        capped_sites: t.capped,
    })
}

/// All eigenvalues of the unit-off-diagonal tridiagonal matrix, ascending.
pub fn eigenvalues(diag: &[f64]) -> Vec<f64> {
    let bounds = gershgorin(diag);
    (0..diag.len())
        .into_par_iter()
        .map(|k| kth_eigenvalue(diag, k, bounds, EIGEN_TOL))
        .collect()
}

/// One row of a Lyapunov scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub energy: f64,
    pub result: Result<LyapunovEstimate, String>,
}

/// [`lyapunov`] over a grid, in grid order; failures are recorded per energy.
pub fn lyapunov_scan(
    pot: &MeromorphicPotential,
    freq: &Frequency,
    energies: &[f64],
    options: &LyapunovOptions,
) -> Vec<ScanEntry> {
    energies
        .par_iter()
        .map(|&energy| ScanEntry {
            energy,
            result: lyapunov(pot, energy, freq, options).map_err(|e| e.to_string()),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeLabel {
    ScCandidate,
    AboveDelta,
    Uncertain,
}

impl RegimeLabel {
    pub fn name(self) -> &'static str {
        match self {
            RegimeLabel::ScCandidate => "sc-candidate",
            RegimeLabel::AboveDelta => "above-delta",
            RegimeLabel::Uncertain => "uncertain",
        }
    }
}

/// `sc-candidate` iff `L + u < lower`, `above-delta` iff `L − u > upper`.
pub fn label_energy(l: f64, uncertainty: f64, delta_lower: f64, delta_upper: f64) -> RegimeLabel {
    if !l.is_finite() || !uncertainty.is_finite() {
        RegimeLabel::Uncertain
    } else if l + uncertainty < delta_lower {
        RegimeLabel::ScCandidate
    } else if l - uncertainty > delta_upper {
        RegimeLabel::AboveDelta
    } else {
        RegimeLabel::Uncertain
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeRow {
    #[serde(rename = "E", serialize_with = "serial::f64")]
    pub energy: f64,
    #[serde(rename = "L", serialize_with = "serial::f64")]
    pub lyapunov: f64,
    #[serde(serialize_with = "serial::f64")]
    pub discrepancy: f64,
    pub label: RegimeLabel,
    /// Distance of `L` to the nearer band edge of `δ̂` minus the uncertainty.
    #[serde(serialize_with = "serial::f64")]
    pub margin: f64,
    #[serde(serialize_with = "serial::f64")]
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeClassification {
    pub rows: Vec<RegimeRow>,
    pub delta_hat: IndexValue,
    #[serde(serialize_with = "serial::f64")]
    pub delta_lower: f64,
    #[serde(serialize_with = "serial::f64")]
    pub delta_upper: f64,
    #[serde(serialize_with = "serial::f64")]
    pub fraction_uncertain: f64,
    /// Unmet preconditions; when present every label is `uncertain`.
    pub notes: Vec<String>,
}

/// Minimum number of `δ̂` levels for a meaningful classification.
pub const MIN_DELTA_LEVELS: usize = 8;
/// Minimum product length for a meaningful classification.
pub const MIN_LYAPUNOV_N: u64 = 10_000;

/// Label each energy against the `δ̂` band. The per-energy uncertainty is
/// the Lyapunov estimator discrepancy plus the band width.
pub fn classify_regime(
    pot: &MeromorphicPotential,
    freq: &Frequency,
    energies: &[f64],
    options: &LyapunovOptions,
    delta_hat: &IndexValue,
) -> RegimeClassification {
    let mut notes = Vec::new();
    if delta_hat.terms_used < MIN_DELTA_LEVELS {
        notes.push(format!(
            "delta computed with {} levels, need at least {MIN_DELTA_LEVELS}",
            delta_hat.terms_used
        ));
    }
    if options.n < MIN_LYAPUNOV_N {
        notes.push(format!("lyapunov length {} below {MIN_LYAPUNOV_N}", options.n));
    }
    let (lower, upper) = delta_hat.band();
    let spread = upper - lower;
    let scan = lyapunov_scan(pot, freq, energies, options);
    let rows: Vec<RegimeRow> = scan
        .into_iter()
        .map(|entry| {
            let (l, disc) = match &entry.result {
                Ok(est) => (est.value, est.discrepancy),
                Err(_) => (f64::NAN, f64::NAN),
            };
            let uncertainty = disc + spread;
            let label = if notes.is_empty() {
                label_energy(l, uncertainty, lower, upper)
            } else {
                RegimeLabel::Uncertain
            };
            let margin = (lower - l).abs().min((l - upper).abs()) - uncertainty;
            RegimeRow {
                energy: entry.energy,
                lyapunov: l,
                discrepancy: disc,
                label,
                margin,
                uncertainty,
            }
        })
        .collect();
    let uncertain = rows.iter().filter(|r| r.label == RegimeLabel::Uncertain).count();
    let fraction_uncertain = if rows.is_empty() {
        0.0
    } else {
        uncertain as f64 / rows.len() as f64
    };
    RegimeClassification {
        rows,
        delta_hat: delta_hat.clone(),
        delta_lower: lower,
        delta_upper: upper,
        fraction_uncertain,
        notes,
    }
}
