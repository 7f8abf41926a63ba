//! Transfer matrices `A = [[E − V, −1], [1, 0]]`, the regular part
//! `D = f·A`, their products along the orbit and Lyapunov exponents.
//!
//! Products are stored as `e^{log_scale} · m` with `m` renormalized to unit
//! norm every [`RENORM_INTERVAL`] steps.

mod lyapunov;
mod mat;

pub use lyapunov::{
    lyapunov, uniform_bound_check, LyapunovEstimate, LyapunovMethod, LyapunovOptions, UniformBoundEntry,
    UniformBoundReport,
};
pub use mat::{vec_norm, LogMat, Mat2};

use serde::Serialize;
use thiserror::Error;

use crate::arithmetic::Frequency;
use crate::num::Phase;
use crate::potential::{MeromorphicPotential, PotentialError, PotentialValue};

pub const RENORM_INTERVAL: u64 = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CocycleError {
    #[error("orbit step {step} lies within {distance:e} of pole theta_{pole}")]
    PoleOnOrbit { step: i64, pole: usize, distance: f64 },
    #[error("non-finite matrix entries after step {step}")]
    NonFinite { step: i64 },
    #[error("no usable phases: every grid point meets a pole")]
    NoPhases,
    #[error("product length must be at least 1")]
    EmptyProduct,
}

impl CocycleError {
    fn at_step(self, step: i64) -> Self {
        match self {
            CocycleError::PoleOnOrbit { pole, distance, .. } => CocycleError::PoleOnOrbit { step, pole, distance },
            CocycleError::NonFinite { .. } => CocycleError::NonFinite { step },
            other => other,
        }
    }
}

/// Which cocycle a product is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CocycleKind {
    /// The unimodular transfer matrix `A`.
    A,
    /// The regular part `D = f·A`, with `det D = f²`.
    D,
}

/// `e^{log_scale} · m`, an `n`-step product of one kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferMatrix2 {
    pub m: Mat2,
    pub log_scale: f64,
    pub kind: CocycleKind,
    pub steps: i64,
    /// `ln|det|` the exact product would have: 0 for `A`, `Σ 2 ln|f|` for `D`.
    pub ln_det_expected: f64,
}

impl TransferMatrix2 {
    pub fn identity(kind: CocycleKind) -> Self {
        TransferMatrix2 {
            m: Mat2::IDENTITY,
            log_scale: 0.0,
            kind,
            steps: 0,
            ln_det_expected: 0.0,
        }
    }

    fn from_step(m: Mat2, kind: CocycleKind, ln_det: f64) -> Self {
        let mut t = TransferMatrix2 {
            m,
            log_scale: 0.0,
            kind,
            steps: 1,
            ln_det_expected: ln_det,
        };
        t.renormalize();
        t
    }

    fn renormalize(&mut self) {
        let s = self.m.norm();
        if s > 0.0 && s.is_finite() {
            self.m = self.m.scale(1.0 / s);
            self.log_scale += s.ln();
        }
    }

    /// A plain matrix, with its own determinant as the expected one.
    pub fn from_mat(m: Mat2, kind: CocycleKind) -> Self {
        let mut t = TransferMatrix2::from_step(m, kind, m.det().abs().ln());
        t.steps = 0;
        t
    }

    pub fn to_log(&self) -> LogMat {
        LogMat::new(self.m, self.log_scale)
    }

    /// `ln‖M‖` in the operator 2-norm.
    pub fn ln_norm(&self) -> f64 {
        self.log_scale + self.m.norm().ln()
    }

    /// The product as a plain matrix (overflows for long hyperbolic products).
    pub fn to_mat(&self) -> Mat2 {
        self.m.scale(self.log_scale.exp())
    }

    pub fn trace(&self) -> f64 {
        self.m.trace() * self.log_scale.exp()
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let w = self.m.apply(v);
        let s = self.log_scale.exp();
        [w[0] * s, w[1] * s]
    }

    /// `|det M − det_expected|` relative to `max(‖M‖², |det_expected|)`,
    /// the scale at which a determinant is resolved in floating point.
    pub fn det_relative_error(&self) -> f64 {
        let expected = (self.ln_det_expected - 2.0 * self.log_scale).exp();
        (self.m.det() - expected).abs() / self.m.norm().powi(2).max(expected)
    }
}

fn pole_error(pot: &MeromorphicPotential, e: PotentialError) -> CocycleError {
    match e {
        PotentialError::PoleHit { pole, .. } => CocycleError::PoleOnOrbit {
            step: 0,
            pole,
            distance: 0.0,
        },
        other => unreachable!("potential evaluation failed for {}: {other}", pot.label()),
    }
}

/// `A(x) = [[E − V(x), −1], [1, 0]]`; refused within the pole floor.
pub fn step_a(pot: &MeromorphicPotential, energy: f64, x: Phase) -> Result<Mat2, CocycleError> {
    match pot.eval(x).map_err(|e| pole_error(pot, e))? {
        PotentialValue::Regular(v) => Ok(Mat2::new(energy - v, -1.0, 1.0, 0.0)),
        PotentialValue::NearPole { pole, distance, .. } => Err(CocycleError::PoleOnOrbit { step: 0, pole, distance }),
    }
}

/// `D(x) = [[E f − g, −f], [f, 0]]`, finite everywhere.
pub fn step_d(pot: &MeromorphicPotential, energy: f64, x: Phase) -> Mat2 {
    let f = pot.f(x);
    Mat2::new(energy * f - pot.g(x), -f, f, 0.0)
}

/// `F(x) = [[0, f], [−f, E f − g]]`, so that `A⁻¹ = F/f` and `D⁻¹ = F/f²`.
pub fn f_matrix(pot: &MeromorphicPotential, energy: f64, x: Phase) -> Mat2 {
    let f = pot.f(x);
    Mat2::new(0.0, f, -f, energy * f - pot.g(x))
}

/// `A⁻¹(x) = F(x)/f(x)`.
pub fn step_a_inverse(pot: &MeromorphicPotential, energy: f64, x: Phase) -> Result<Mat2, CocycleError> {
    step_a(pot, energy, x)?;
    Ok(f_matrix(pot, energy, x).scale(1.0 / pot.f(x)))
}

fn step_kind(pot: &MeromorphicPotential, energy: f64, x: Phase, kind: CocycleKind) -> Result<(Mat2, f64), CocycleError> {
    match kind {
        CocycleKind::A => Ok((step_a(pot, energy, x)?, 0.0)),
        CocycleKind::D => Ok((step_d(pot, energy, x), 2.0 * pot.ln_abs_f(x))),
    }
}

fn inverse_step_kind(
    pot: &MeromorphicPotential,
    energy: f64,
    x: Phase,
    kind: CocycleKind,
) -> Result<(Mat2, f64), CocycleError> {
    match kind {
        CocycleKind::A => Ok((step_a_inverse(pot, energy, x)?, 0.0)),
        CocycleKind::D => {
            step_a(pot, energy, x)?;
            let f = pot.f(x);
            Ok((f_matrix(pot, energy, x).scale(1.0 / (f * f)), -2.0 * pot.ln_abs_f(x)))
        }
    }
}

/// Running product with periodic renormalization.
struct Accumulator {
    t: TransferMatrix2,
    count: u64,
}

impl Accumulator {
    fn new(kind: CocycleKind) -> Self {
        Accumulator {
            t: TransferMatrix2::identity(kind),
            count: 0,
        }
    }

    fn push(&mut self, step: Mat2, ln_det: f64, left: bool, index: i64) -> Result<(), CocycleError> {
        self.t.m = if left { step * self.t.m } else { self.t.m * step };
        self.t.ln_det_expected += ln_det;
        self.count += 1;
        if self.count % RENORM_INTERVAL == 0 {
            self.t.renormalize();
        }
        if !self.t.m.is_finite() {
            return Err(CocycleError::NonFinite { step: index });
        }
        Ok(())
    }

    fn finish(mut self, steps: i64) -> TransferMatrix2 {
        self.t.renormalize();
        self.t.steps = steps;
        self.t
    }
}

/// `M_n(x) = M(x + (n−1)α) ⋯ M(x)` for `n ≥ 0`, and
/// `M_{−n}(x) = [M_n(x − nα)]⁻¹ = M(x − nα)⁻¹ ⋯ M(x − α)⁻¹` assembled from
/// single-step inverses.
pub fn product(
    pot: &MeromorphicPotential,
    energy: f64,
    x: Phase,
    freq: &Frequency,
    n: i64,
    kind: CocycleKind,
) -> Result<TransferMatrix2, CocycleError> {
    let mut acc = Accumulator::new(kind);
    if n >= 0 {
        for j in 0..n {
            let (s, ld) = step_kind(pot, energy, freq.orbit(x, j), kind).map_err(|e| e.at_step(j))?;
            acc.push(s, ld, true, j)?;
        }
    } else {
        for j in 1..=-n {
            let (s, ld) = inverse_step_kind(pot, energy, freq.orbit(x, -j), kind).map_err(|e| e.at_step(-j))?;
            acc.push(s, ld, true, -j)?;
        }
    }
    Ok(acc.finish(n))
}

/// `(A_n(x))⁻¹ = A(x)⁻¹ ⋯ A(x + (n−1)α)⁻¹`, each factor `F/f`. For
/// negative `n` this is the forward product `A_{|n|}(x − |n|α)`.
pub fn product_inverse(
    pot: &MeromorphicPotential,
    energy: f64,
    x: Phase,
    freq: &Frequency,
    n: i64,
) -> Result<TransferMatrix2, CocycleError> {
    if n < 0 {
        let mut t = product(pot, energy, freq.orbit(x, n), freq, -n, CocycleKind::A)?;
        t.steps = n;
        return Ok(t);
    }
    let mut acc = Accumulator::new(CocycleKind::A);
    for j in 0..n {
        let s = step_a_inverse(pot, energy, freq.orbit(x, j)).map_err(|e| e.at_step(j))?;
        acc.push(s, 0.0, false, j)?;
    }
    Ok(acc.finish(-n))
}

/// A single `A` or `D` step as a [`TransferMatrix2`].
pub fn single_step(
    pot: &MeromorphicPotential,
    energy: f64,
    x: Phase,
    kind: CocycleKind,
) -> Result<TransferMatrix2, CocycleError> {
    let (m, ld) = step_kind(pot, energy, x, kind)?;
    Ok(TransferMatrix2::from_step(m, kind, ld))
}
