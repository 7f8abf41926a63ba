use rayon::prelude::*;
use serde::Serialize;

use super::{product, CocycleError, CocycleKind};
use crate::arithmetic::Frequency;
use crate::num::Phase;
use crate::potential::MeromorphicPotential;
use crate::serial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovMethod {
    PhaseAverage,
    SingleOrbit,
}

impl LyapunovMethod {
    pub fn name(self) -> &'static str {
        match self {
            LyapunovMethod::PhaseAverage => "phase-average",
            LyapunovMethod::SingleOrbit => "single-orbit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovOptions {
    pub n: u64,
    /// Grid size `K` of the phase average, at `(k + 1/2)/K`.
    pub phases: usize,
    /// Start of the single orbit.
    pub x0: Phase,
    pub method: LyapunovMethod,
    pub kind: CocycleKind,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions {
            n: 10_000,
            phases: 64,
            x0: Phase::from_f64(std::f64::consts::SQRT_2 - 1.0),
            method: LyapunovMethod::PhaseAverage,
            kind: CocycleKind::D,
        }
    }
}

/// Both estimators are always run; `value` is the selected one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    #[serde(rename = "E", serialize_with = "serial::f64")]
    pub energy: f64,
    #[serde(serialize_with = "serial::f64")]
    pub value: f64,
    pub n: u64,
    pub method: LyapunovMethod,
    pub kind: CocycleKind,
    pub phases_used: usize,
    #[serde(serialize_with = "serial::f64")]
    pub phase_average: f64,
    #[serde(serialize_with = "serial::f64")]
    pub single_orbit: f64,
    #[serde(serialize_with = "serial::f64")]
    pub discrepancy: f64,
}

/// `(1/n) ln‖M_n(x)‖`.
fn rate(pot: &MeromorphicPotential, energy: f64, x: Phase, freq: &Frequency, n: u64, kind: CocycleKind) -> Result<f64, CocycleError> {
    let t = product(pot, energy, x, freq, n as i64, kind)?;
    Ok(t.ln_norm() / n as f64)
}

/// Lyapunov exponent from `n`-step products. With `kind = A`, grid phases
/// whose orbit window meets a pole are dropped.
pub fn lyapunov(
    pot: &MeromorphicPotential,
    energy: f64,
    freq: &Frequency,
    options: &LyapunovOptions,
) -> Result<LyapunovEstimate, CocycleError> {
    if options.n == 0 || options.phases == 0 {
        return Err(CocycleError::EmptyProduct);
    }
    let k = options.phases;
    let rates: Vec<Result<f64, CocycleError>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let x = Phase::from_small_ratio(2 * i as u64 + 1, 2 * k as u64);
            rate(pot, energy, x, freq, options.n, options.kind)
        })
        .collect();
    let mut sum = 0.0;
    let mut used = 0;
    for r in rates {
        match r {
            Ok(v) => {
                sum += v;
                used += 1;
            }
            Err(CocycleError::PoleOnOrbit { .. }) if options.kind == CocycleKind::A => {}
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(CocycleError::NoPhases);
    }
    let phase_average = sum / used as f64;
    let single_orbit = rate(pot, energy, options.x0, freq, options.n, options.kind)?;
    let value = match options.method {
        LyapunovMethod::PhaseAverage => phase_average,
        LyapunovMethod::SingleOrbit => single_orbit,
    };
    Ok(LyapunovEstimate {
        energy,
        value,
        n: options.n,
        method: options.method,
        kind: options.kind,
        phases_used: used,
        phase_average,
        single_orbit,
        discrepancy: (phase_average - single_orbit).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformBoundEntry {
    #[serde(serialize_with = "serial::f64")]
    pub x: f64,
    /// `ln‖D_n(x)‖/n − (L + ε)`.
    #[serde(serialize_with = "serial::f64")]
    pub matrix_excess: f64,
    /// `(1/n) Σ_{j<n} ln|f(x + jα)| − (∫ ln|f| + ε)`.
    #[serde(serialize_with = "serial::f64")]
    pub scalar_excess: f64,
}

/// Upper bounds `‖D_n(x)‖ ≤ C e^{n(L+ε)}` and `Π|f(x + jα)| ≤ e^{n(∫ln|f| + ε)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformBoundReport {
    pub n: u64,
    #[serde(serialize_with = "serial::f64")]
    pub epsilon: f64,
    #[serde(serialize_with = "serial::f64")]
    pub lyapunov: f64,
    #[serde(serialize_with = "serial::f64")]
    pub log_f_integral: f64,
    pub entries: Vec<UniformBoundEntry>,
}

impl UniformBoundReport {
    pub fn max_matrix_excess(&self) -> f64 {
        self.entries.iter().map(|e| e.matrix_excess).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_scalar_excess(&self) -> f64 {
        self.entries.iter().map(|e| e.scalar_excess).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every excess is at most `ln(c)/n`.
    pub fn holds(&self, c: f64) -> bool {
        let slack = c.ln() / self.n as f64;
        self.max_matrix_excess() <= slack && self.max_scalar_excess() <= slack
    }
}

pub fn uniform_bound_check(
    pot: &MeromorphicPotential,
    energy: f64,
    freq: &Frequency,
    n: u64,
    epsilon: f64,
    lyapunov: f64,
    samples: &[Phase],
) -> Result<UniformBoundReport, CocycleError> {
    if n == 0 {
        return Err(CocycleError::EmptyProduct);
    }
    let log_f_integral = pot.log_f_integral();
    let entries = samples
        .par_iter()
        .map(|&x| {
            let m = rate(pot, energy, x, freq, n, CocycleKind::D)?;
            let s: f64 = (0..n).map(|j| pot.ln_abs_f(freq.orbit(x, j as i64))).sum::<f64>() / n as f64;
            Ok(UniformBoundEntry {
                x: x.to_f64(),
                matrix_excess: m - (lyapunov + epsilon),
                scalar_excess: s - (log_f_integral + epsilon),
            })
        })
        .collect::<Result<Vec<_>, CocycleError>>()?;
    Ok(UniformBoundReport {
        n,
        epsilon,
        lyapunov,
        log_f_integral,
        entries,
    })
}
