//! Candidate solutions of `Hu = Eu`, the Gordon differences along the
//! denominators `q_n`, the resonance estimate on them, and
//! eigenvalue-exclusion certificates.

mod certificate;
mod lemma;
mod lhs;
mod solution;

pub use certificate::{
    contracted_direction, exclusion_certificate, max_inequality, CertificateOptions, DirectionCheck,
    ExclusionReport, GordonCertificate, MaxInequality, Verdict, DEFAULT_DIRECTIONS, DEFAULT_RATE,
    MAX_NORM_THRESHOLD, MAX_NORM_TOLERANCE,
};
pub use lemma::{lemma_a_check, LemmaReport, LemmaStatus};
pub use lhs::{
    cayley_hamilton_residuals, gordon_lhs, trace_dichotomy, window_length, GordonLhs, TraceCase, TraceReport,
    MAX_GORDON_Q,
};
pub use solution::{solve_recurrence, SolutionSegment};

use thiserror::Error;

use crate::arithmetic::ArithmeticError;
use crate::cocycle::CocycleError;
use crate::potential::PotentialError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GordonError {
    #[error("pole theta_{pole} at site {site} of the {window} window")]
    PoleInWindow { window: &'static str, site: i64, pole: usize },
    #[error("range {available:?} does not cover the needed {needed:?}")]
    Range { needed: (i64, i64), available: (i64, i64) },
    #[error("initial vector must be nonzero and finite")]
    ZeroInitial,
    #[error("no levels given")]
    NoLevels,
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Cocycle(CocycleError),
}
