use std::fmt;
use std::path::Path;

use qpsc_core::arithmetic::ArithmeticError;
use qpsc_core::cocycle::CocycleError;
use qpsc_core::gordon::GordonError;
use qpsc_core::num::ParseNumberError;
use qpsc_core::potential::PotentialError;
use qpsc_core::spectral::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Io,
    Range,
    Numeric,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Config => 2,
            Kind::Io => 3,
            Kind::Range => 4,
            Kind::Numeric => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Config => "config",
            Kind::Io => "io",
            Kind::Range => "range",
            Kind::Numeric => "numeric",
        }
    }
}

/// A failure reported as `error[kind]: message` with the kind's exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Kind::Config, message)
    }

    /// A config error about `key`.
    pub fn key(key: &str, message: impl fmt::Display) -> Self {
        Self::config(format!("{key}: {message}"))
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(Kind::Io, format!("{}: {err}", path.display()))
    }

    pub fn range(message: impl Into<String>) -> Self {
        Self::new(Kind::Range, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // One line, whatever the source message looked like.
        let flat = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error[{}]: {flat}", self.kind.name())
    }
}

impl std::error::Error for CliError {}

impl From<ArithmeticError> for CliError {
    fn from(e: ArithmeticError) -> Self {
        use ArithmeticError::*;
        let kind = match e {
            EmptyCoefficients | InvalidCoefficient { .. } | MalformedLine { .. } | OutOfUnitInterval | InvalidBetaTarget(_) => {
                Kind::Config
            }
            TooFewLevels { .. } | LevelOutOfRange { .. } | StepBudget { .. } | JumpTooLarge { .. } => Kind::Range,
            ExcludedPhase { .. } | PrecisionExhausted { .. } | ResonantLevel { .. } => Kind::Numeric,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::Arithmetic(a) => a.into(),
            PotentialError::Degenerate(_)
            | PotentialError::ParityMismatch { .. }
            | PotentialError::SpuriousPole { .. }
            | PotentialError::UnknownNumerator(_) => CliError::config(e.to_string()),
            PotentialError::NotQualifying { .. } => CliError::range(e.to_string()),
            PotentialError::PoleHit { .. } => CliError::new(Kind::Numeric, e.to_string()),
        }
    }
}

impl From<CocycleError> for CliError {
    fn from(e: CocycleError) -> Self {
        match e {
            CocycleError::EmptyProduct => CliError::range(e.to_string()),
            _ => CliError::new(Kind::Numeric, e.to_string()),
        }
    }
}

impl From<GordonError> for CliError {
    fn from(e: GordonError) -> Self {
        match e {
            GordonError::Arithmetic(a) => a.into(),
            GordonError::Potential(p) => p.into(),
            GordonError::Cocycle(c) => c.into(),
            GordonError::Range { .. } | GordonError::NoLevels => CliError::range(e.to_string()),
            GordonError::PoleInWindow { .. } | GordonError::ZeroInitial => CliError::new(Kind::Numeric, e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::TooSmall(_) => CliError::range(e.to_string()),
            SpectralError::PoleInWindow { .. } => CliError::new(Kind::Numeric, e.to_string()),
        }
    }
}

impl From<ParseNumberError> for CliError {
    fn from(e: ParseNumberError) -> Self {
        CliError::config(e.to_string())
    }
}
