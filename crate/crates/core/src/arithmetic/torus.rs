use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::num::{frac, parse_rational, ratio_to_f64, torus_norm_exact, ParseNumberError, Phase, Precision, Real};

/// A point of `T = R/Z`, stored exactly as a representative in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    value: BigRational,
    precision: Precision,
}

impl TorusPoint {
    pub fn new(x: &Real) -> Self {
        TorusPoint {
            value: frac(&x.value),
            precision: x.precision,
        }
    }

    pub fn exact(x: BigRational) -> Self {
        TorusPoint {
            value: frac(&x),
            precision: Precision::Exact,
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The dyadic rational equal to `x`, reduced mod 1.
    pub fn from_f64(x: f64) -> Self {
        Self::exact(BigRational::from_float(x).expect("finite"))
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.value)
    }

    pub fn phase(&self) -> Phase {
        Phase::from_ratio(&self.value)
    }

    /// `‖x‖_{R/Z} = min(x, 1 − x)`, exactly.
    pub fn norm(&self) -> BigRational {
        torus_norm_exact(&self.value)
    }

    pub fn shifted(&self, by: &BigRational) -> Self {
        TorusPoint {
            value: frac(&(&self.value + by)),
            precision: self.precision,
        }
    }

    /// `self − other` on the torus, with the weaker of the two precisions.
    pub fn minus(&self, other: &TorusPoint) -> Self {
        TorusPoint {
            value: frac(&(&self.value - &other.value)),
            precision: self.precision.min(other.precision),
        }
    }

    /// Small denominators are printed as `p/q`, others as a decimal.
    pub fn label(&self) -> String {
        if self.value.denom().bits() <= 32 {
            format!("{}", self.value)
        } else {
            format!("{:.17e}", self.to_f64())
        }
    }

    pub fn is_exact_small(&self) -> Option<(u64, u64)> {
        Some((self.value.numer().to_u64()?, self.value.denom().to_u64()?))
    }
}

impl FromStr for TorusPoint {
    type Err = ParseNumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(TorusPoint::exact)
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `‖x‖_{R/Z} = min_{l ∈ Z} |x − l|` for a machine float.
pub fn torus_norm(x: f64) -> f64 {
    (x - x.round()).abs()
}
