//! Arithmetic indices, transfer-matrix cocycles, Lyapunov exponents and
//! Gordon-type eigenvalue-exclusion checks for one-dimensional quasiperiodic
//! Schrödinger operators
//!
//! ```text
//! (H u)_n = u_{n+1} + u_{n-1} + g(θ + nα) / f(θ + nα) · u_n
//! ```
//!
//! with meromorphic potentials. The modules build on each other:
//! [`arithmetic`] (continued fractions, `β`, `γ`, `δ`), [`potential`]
//! (`V = g/f`), [`cocycle`] (transfer matrices and `L(E)`), [`gordon`]
//! (solutions and exclusion certificates) and [`spectral`] (truncated
//! spectra and the `L(E) < δ` regime classification).

pub mod arithmetic;
pub mod cocycle;
pub mod gordon;
pub mod num;
pub mod potential;
pub mod quadrature;
pub mod serial;
pub mod spectral;
