use num_traits::{Signed, Zero};
use serde::Serialize;

use super::GordonError;
use crate::arithmetic::{ArithmeticError, ContinuedFraction, Frequency};
use crate::cocycle::{product, product_inverse, step_a, CocycleError, CocycleKind, LogMat, Mat2};
use crate::num::{ln_ratio, ratio_to_f64, Phase};
use crate::potential::MeromorphicPotential;
use crate::serial;

/// Longest window `q` the Gordon quantities are evaluated on.
pub const MAX_GORDON_Q: u64 = 2_000_000;

/// Which Cayley–Hamilton form the argument at a level relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceCase {
    /// `|tr A_q| > 1/2`: `A_q − tr·I + A_q⁻¹ = 0` and the inverse difference.
    Inverse,
    /// `|tr A_q| ≤ 1/2`: `A_q² − tr·A_q + I = 0` and the square difference.
    Square,
}

impl TraceCase {
    pub fn of(trace: f64) -> Self {
        if trace.abs() > 0.5 {
            TraceCase::Inverse
        } else {
            TraceCase::Square
        }
    }
}

/// The Gordon differences at one level `n` (with `q = q_n`, `η = q α − p`):
///
/// - `square = A_q(θ)² − A_{2q}(θ)`
/// - `inverse = A_q(θ)⁻¹ − A_q(θ − qα)⁻¹`
///
/// Both are evaluated through the telescoped sums
///
/// ```text
/// square  = η Σ_j X_{q−1}⋯X_{j+1} diag(Q(x_j,  η), 0) Y_{j−1}⋯Y_0 · A_q(θ)
/// inverse = η Σ_j B_0⋯B_{j−1} diag(0, −Q(x_j, −η)) C_{j+1}⋯C_{q−1}
/// ```
///
/// with `x_j = θ + jα`, `X_j = A(x_j)`, `Y_j = A(x_j + η)`, `B_j = A(x_j)⁻¹`,
/// `C_j = A(x_j − η)⁻¹` and `Q(x, h) = (V(x + h) − V(x))/h`, so that their
/// size is resolved far below the rounding floor of the plain difference.
/// The plain differences of independently computed products are kept as
/// `direct_*` together with their rounding floors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GordonLhs {
    pub level: usize,
    pub q: u64,
    #[serde(rename = "E", serialize_with = "serial::f64")]
    pub energy: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_eta: f64,
    #[serde(serialize_with = "serial::f64")]
    pub trace: f64,
    /// `ln|tr A_q(θ)|`, finite where `trace` overflows.
    #[serde(serialize_with = "serial::f64")]
    pub ln_abs_trace: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_square: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_inverse: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_direct_square: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_direct_inverse: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_noise_square: f64,
    #[serde(serialize_with = "serial::f64")]
    pub ln_noise_inverse: f64,
    #[serde(skip)]
    pub square: LogMat,
    #[serde(skip)]
    pub inverse: LogMat,
    /// `A_q(θ)`.
    #[serde(skip)]
    pub a_q: LogMat,
    /// `A_q(θ)⁻¹`.
    #[serde(skip)]
    pub a_q_inv: LogMat,
    /// `A_q(θ − qα)⁻¹`, carrying `(φ_0, φ_{−1})` to `(φ_{−q}, φ_{−q−1})`.
    #[serde(skip)]
    pub a_minus_q: LogMat,
    /// `A_{2q}(θ)` as a fresh `2q`-step product.
    #[serde(skip)]
    pub a_2q: LogMat,
}

impl GordonLhs {
    /// `ln‖(A_q² − A_{2q})(θ) v‖`.
    pub fn ln_square_at(&self, v: [f64; 2]) -> f64 {
        self.square.ln_norm_applied(v)
    }

    /// `ln‖(A_q⁻¹(θ) − A_q⁻¹(θ − qα)) v‖`.
    pub fn ln_inverse_at(&self, v: [f64; 2]) -> f64 {
        self.inverse.ln_norm_applied(v)
    }

    /// `ln` of `‖(φ_q, φ_{q−1})‖`, `‖(φ_{−q}, φ_{−q−1})‖`, `‖(φ_{2q}, φ_{2q−1})‖`
    /// for the solution with `(φ_0, φ_{−1}) = v`.
    pub fn ln_gordon_norms(&self, v: [f64; 2]) -> [f64; 3] {
        [
            self.a_q.ln_norm_applied(v),
            self.a_minus_q.ln_norm_applied(v),
            self.a_2q.ln_norm_applied(v),
        ]
    }

    pub fn case(&self) -> TraceCase {
        TraceCase::of(self.trace)
    }

    /// Whether a direct difference rises above its rounding floor and so
    /// can be compared with the telescoped value.
    pub fn direct_square_resolved(&self) -> bool {
        self.ln_direct_square > self.ln_noise_square + 10f64.ln()
    }

    pub fn direct_inverse_resolved(&self) -> bool {
        self.ln_direct_inverse > self.ln_noise_inverse + 10f64.ln()
    }
}

fn window_error(window: &'static str, offset: i64) -> impl Fn(CocycleError) -> GordonError {
    move |e| match e {
        CocycleError::PoleOnOrbit { step, pole, .. } => GordonError::PoleInWindow {
            window,
            site: step + offset,
            pole,
        },
        other => GordonError::Cocycle(other),
    }
}

fn left(m: Mat2, w: &LogMat) -> LogMat {
    if w.is_zero() {
        return LogMat::ZERO;
    }
    LogMat::new(m * w.m, w.ln_scale)
}

/// `q_n` as a machine integer within [`MAX_GORDON_Q`].
pub fn window_length(cf: &ContinuedFraction, level: usize) -> Result<u64, GordonError> {
    let q = cf.q(level)?;
    match q.to_u64_digits().as_slice() {
        [v] if *v <= MAX_GORDON_Q => Ok(*v),
        _ => Err(ArithmeticError::StepBudget {
            q_bits: q.bits(),
            budget: MAX_GORDON_Q,
        }
        .into()),
    }
}

/// The Gordon differences at level `level` of `cf`, for the frequency
/// `cf.frequency()`.
pub fn gordon_lhs(
    pot: &MeromorphicPotential,
    energy: f64,
    theta: Phase,
    cf: &ContinuedFraction,
    level: usize,
) -> Result<GordonLhs, GordonError> {
    let q = window_length(cf, level)?;
    let freq = cf.frequency();
    let qi = q as i64;
    let eta = cf.signed_remainder(level)?;
    let ln_eta = ln_ratio(&eta.abs());
    let eta_sign = if eta.is_negative() { -1.0 } else { 1.0 };
    let h = ratio_to_f64(&eta);
    let x = |j: i64| freq.orbit(theta, j);

    let mut w = LogMat::ZERO;
    let mut t = LogMat::IDENTITY;
    for k in 0..qi {
        let xk = step_a(pot, energy, x(k)).map_err(|e| window_error("square", k)(e))?;
        let yk = step_a(pot, energy, x(qi + k)).map_err(|e| window_error("square", qi + k)(e))?;
        if !eta.is_zero() {
            let dq = pot.v_difference_quotient(x(k), h);
            let dt = LogMat::new(Mat2::new(dq * t.m.0[0][0], dq * t.m.0[0][1], 0.0, 0.0), t.ln_scale);
            w = left(xk, &w).add(&dt);
        }
        t = left(yk, &t);
    }

    let mut z = LogMat::ZERO;
    let mut s = LogMat::IDENTITY;
    for k in (0..qi).rev() {
        let b = step_a(pot, energy, x(k)).map_err(|e| window_error("inverse", k)(e))?;
        let c = step_a(pot, energy, x(k - qi)).map_err(|e| window_error("inverse", k - qi)(e))?;
        if !eta.is_zero() {
            let dq = -pot.v_difference_quotient(x(k), -h);
            let ds = LogMat::new(Mat2::new(0.0, 0.0, dq * s.m.0[1][0], dq * s.m.0[1][1]), s.ln_scale);
            z = left(b.adjugate(), &z).add(&ds);
        }
        s = left(c.adjugate(), &s);
    }

    let a_q = product(pot, energy, theta, &freq, qi, CocycleKind::A)
        .map_err(window_error("square", 0))?
        .to_log();
    let a_2q = product(pot, energy, theta, &freq, 2 * qi, CocycleKind::A)
        .map_err(window_error("square", 0))?
        .to_log();
    let a_q_inv = product_inverse(pot, energy, theta, &freq, qi)
        .map_err(window_error("inverse", 0))?
        .to_log();
    let a_minus_q = product(pot, energy, theta, &freq, -qi, CocycleKind::A)
        .map_err(window_error("inverse", 0))?
        .to_log();

    let scale = |m: LogMat| LogMat {
        m: m.m.scale(eta_sign),
        ln_scale: m.ln_scale + ln_eta,
    };
    let square = if eta.is_zero() { LogMat::ZERO } else { scale(w.mul(&a_q)) };
    let inverse = if eta.is_zero() { LogMat::ZERO } else { scale(z) };

    let direct_square = a_q.mul(&a_q).sub(&a_2q);
    let direct_inverse = a_q_inv.sub(&a_minus_q);
    let rounding = |n: u64| (8.0 * n as f64 * f64::EPSILON).ln();
    Ok(GordonLhs {
        level,
        q,
        energy,
        ln_eta,
        trace: a_q.m.trace() * a_q.ln_scale.exp(),
        ln_abs_trace: a_q.m.trace().abs().ln() + a_q.ln_scale,
        ln_square: square.ln_norm(),
        ln_inverse: inverse.ln_norm(),
        ln_direct_square: direct_square.ln_norm(),
        ln_direct_inverse: direct_inverse.ln_norm(),
        ln_noise_square: rounding(2 * q) + (2.0 * a_q.ln_norm()).max(a_2q.ln_norm()),
        ln_noise_inverse: rounding(q) + a_q_inv.ln_norm().max(a_minus_q.ln_norm()),
        square,
        inverse,
        a_q,
        a_q_inv,
        a_minus_q,
        a_2q,
    })
}

/// Relative residuals of `B − tr(B)·I + B⁻¹ = 0` and `B² − tr(B)·B + I = 0`,
/// each divided by the largest term in its identity.
pub fn cayley_hamilton_residuals(b: &LogMat, b_inv: &LogMat) -> (f64, f64) {
    let tr_i = LogMat::new(Mat2::IDENTITY.scale(b.m.trace()), b.ln_scale);
    let r_inv = b.sub(&tr_i).add(b_inv);
    let top_inv = b.ln_norm().max(b_inv.ln_norm()).max(tr_i.ln_norm());
    let b2 = b.mul(b);
    let tr_b = tr_i.mul(b);
    let r_sq = b2.sub(&tr_b).add(&LogMat::IDENTITY);
    let top_sq = b2.ln_norm().max(tr_b.ln_norm()).max(0.0);
    ((r_inv.ln_norm() - top_inv).exp(), (r_sq.ln_norm() - top_sq).exp())
}

/// The trace of `A_q(θ)`, the case it selects and both Cayley–Hamilton
/// residuals for `A_q(θ)` and its independently computed inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceReport {
    pub q: u64,
    #[serde(serialize_with = "serial::f64")]
    pub trace: f64,
    pub case: TraceCase,
    #[serde(serialize_with = "serial::f64")]
    pub residual_inverse: f64,
    #[serde(serialize_with = "serial::f64")]
    pub residual_square: f64,
}

pub fn trace_dichotomy(
    pot: &MeromorphicPotential,
    energy: f64,
    theta: Phase,
    freq: &Frequency,
    q: u64,
) -> Result<TraceReport, GordonError> {
    if q == 0 || q > MAX_GORDON_Q {
        return Err(GordonError::Range {
            needed: (1, MAX_GORDON_Q as i64),
            available: (q as i64, q as i64),
        });
    }
    let b = product(pot, energy, theta, freq, q as i64, CocycleKind::A)
        .map_err(window_error("forward", 0))?
        .to_log();
    let b_inv = product_inverse(pot, energy, theta, freq, q as i64)
        .map_err(window_error("forward", 0))?
        .to_log();
    let (residual_inverse, residual_square) = cayley_hamilton_residuals(&b, &b_inv);
    let trace = b.m.trace() * b.ln_scale.exp();
    Ok(TraceReport {
        q,
        trace,
        case: TraceCase::of(trace),
        residual_inverse,
        residual_square,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::LiouvilleRecipe;
    use crate::potential::{make_amo, make_maryland};

    #[test]
    fn cayley_hamilton_for_plain_matrices() {
        let b = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let (ri, rs) = cayley_hamilton_residuals(&LogMat::from_mat(b), &LogMat::from_mat(b.inverse()));
        assert!(ri < 1e-15 && rs < 1e-15, "{ri} {rs}");
        let m = b * b - b.scale(3.0) + Mat2::IDENTITY;
        assert_eq!(m, Mat2::ZERO);
    }

    #[test]
    fn rational_frequency_has_no_inverse_difference() {
        // α = 3/8 exactly; level 2 has q_2 = 8 and η = 0.
        let cf = ContinuedFraction::from_u64s(&[2, 1, 2]).unwrap();
        assert_eq!(cf.q_u64(3).unwrap(), 8);
        let g = gordon_lhs(&make_amo(1.3), 0.4, Phase::from_f64(0.1234), &cf, 3).unwrap();
        assert_eq!(g.ln_inverse, f64::NEG_INFINITY);
        assert_eq!(g.ln_square, f64::NEG_INFINITY);
        assert!(!g.direct_inverse_resolved());
    }

    #[test]
    fn constant_cocycle_has_no_square_difference() {
        let cf = ContinuedFraction::golden(30);
        let g = gordon_lhs(&make_amo(0.0), 1.1, Phase::from_f64(0.3), &cf, 8).unwrap();
        assert_eq!(g.ln_square, f64::NEG_INFINITY);
        assert_eq!(g.ln_inverse, f64::NEG_INFINITY);
    }

    #[test]
    fn telescoped_values_match_resolved_direct_differences() {
        let cf = ContinuedFraction::golden(30);
        let md = make_maryland(0.7).unwrap();
        let mut compared = 0;
        for level in 2..9 {
            let g = gordon_lhs(&md, 0.3, Phase::from_f64(0.27), &cf, level).unwrap();
            if g.direct_square_resolved() {
                let rel = (g.ln_square - g.ln_direct_square).abs();
                assert!(rel < 1e-6 + (g.ln_noise_square - g.ln_direct_square).exp() * 20.0, "level {level}: {rel}");
                compared += 1;
            }
            if g.direct_inverse_resolved() {
                let rel = (g.ln_inverse - g.ln_direct_inverse).abs();
                assert!(rel < 1e-6 + (g.ln_noise_inverse - g.ln_direct_inverse).exp() * 20.0, "level {level}: {rel}");
                compared += 1;
            }
        }
        assert!(compared >= 6, "{compared}");
    }

    #[test]
    fn telescoped_values_reach_below_the_rounding_floor() {
        let cf = ContinuedFraction::liouville(LiouvilleRecipe {
            suffix: 1,
            ..LiouvilleRecipe::new(1.0, 4, 2)
        })
        .unwrap();
        let level = 5;
        let g = gordon_lhs(&make_amo(0.5), 0.2, Phase::from_f64(0.1), &cf, level).unwrap();
        assert!(g.ln_eta < -10.0);
        assert!(g.ln_inverse < g.ln_noise_inverse - 5.0, "{} vs {}", g.ln_inverse, g.ln_noise_inverse);
        assert!(g.ln_inverse.is_finite() && g.ln_square.is_finite());
    }

    #[test]
    fn poles_in_a_window_are_named() {
        let md = make_maryland(1.0).unwrap();
        let cf = ContinuedFraction::golden(30);
        let alpha = cf.frequency();
        // θ + 3α lands on the pole at 1/2.
        let theta = Phase::HALF - alpha.step().times(3);
        match gordon_lhs(&md, 0.0, theta, &cf, 4) {
            Err(GordonError::PoleInWindow { window: "square", site: 3, pole: 0 }) => {}
            other => panic!("{other:?}"),
        }
        let theta = Phase::HALF + alpha.step().times(2);
        match gordon_lhs(&md, 0.0, theta, &cf, 4) {
            Err(GordonError::PoleInWindow { window: "inverse", site: -2, pole: 0 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trace_residuals_for_maryland() {
        let md = make_maryland(1.0).unwrap();
        let cf = ContinuedFraction::golden(30);
        let q = cf.q_u64(6).unwrap();
        let r = trace_dichotomy(&md, 0.5, Phase::from_f64(0.21), &cf.frequency(), q).unwrap();
        assert!(r.residual_inverse <= 1e-9 && r.residual_square <= 1e-9, "{r:?}");
        assert_eq!(r.case, TraceCase::of(r.trace));
    }
}
