//! Continued fractions, the torus norm and the arithmetic indices `β`, `γ`, `δ`.

mod cf;
mod index;
mod sine;
mod torus;

pub use cf::{resonant_phase, ContinuedFraction, Frequency, LiouvilleRecipe, RealExpansion};
pub use index::{
    beta, beta_with_tail, check_phase_admissible, default_tail_start, delta_index, gamma, DeltaOptions, IndexValue,
    DEFAULT_HORIZON,
};
pub use sine::{
    argmin_over_window, min_sine_index, resonance_product_check, sine_product_check, sine_product_over_window,
    ResonanceProductCheck, SineProductCheck, DEFAULT_STEP_BUDGET,
};
pub use torus::{torus_norm, TorusPoint};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArithmeticError {
    #[error("continued fraction needs at least one coefficient")]
    EmptyCoefficients,
    #[error("coefficient a_{index} must be a positive integer")]
    InvalidCoefficient { index: usize },
    #[error("malformed coefficient on line {line}")]
    MalformedLine { line: usize },
    #[error("alpha must lie strictly between 0 and 1")]
    OutOfUnitInterval,
    #[error("input precision exhausted after {valid_prefix} certified coefficients")]
    PrecisionExhausted { valid_prefix: usize },
    #[error("need at least {needed} convergents, have {available}")]
    TooFewLevels { needed: usize, available: usize },
    #[error("level {level} exceeds the stored depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("phase lies on the orbit of pole {pole}: theta = theta_{pole} + ({translate})*alpha mod 1")]
    ExcludedPhase { pole: usize, translate: i64 },
    #[error("window q_n with {q_bits} bits exceeds the step budget {budget}")]
    StepBudget { q_bits: u64, budget: u64 },
    #[error("jump at level {level} needs about {bits:.0} bits")]
    JumpTooLarge { level: usize, bits: f64 },
    #[error("q_{level}(theta - theta_l) is an integer, so level {level} cannot reach its target")]
    ResonantLevel { level: usize },
    #[error("beta target must be positive and finite, got {0}")]
    InvalidBetaTarget(f64),
}

/// A pole `θ_l` of the potential with its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pole {
    pub point: TorusPoint,
    pub multiplicity: u32,
}

impl Pole {
    pub fn simple(point: TorusPoint) -> Self {
        Pole { point, multiplicity: 1 }
    }

    pub fn new(point: TorusPoint, multiplicity: u32) -> Self {
        Pole { point, multiplicity }
    }
}
