//! Power-series machinery for linear systems of moment differential equations
//! `∂_m y = A(z) y + b(z)`.
//!
//! The moment derivative `∂_m` attached to a positive sequence `m = (m_p)`
//! acts on monomials by `∂_m z^p = (m_p / m_{p-1}) z^{p-1}`; `m_p = p!`
//! recovers the classical derivative, `m_p = Γ(1 + αp)` the Caputo
//! fractional derivative of order `α`, and `m_p = q^{p²}` the q-derivative
//! family. Everything here works on truncated power series, so all results
//! are coefficient-level and fully checkable.
//!
//! Module map:
//!
//! - [`seq`] — moment sequences, stable log-domain evaluation, structural
//!   diagnostics (growth assumptions, log-convexity, moderate growth).
//! - [`series`] — truncated scalar/vector/matrix series arithmetic and the
//!   moment-derivative operator.
//! - [`solver`] — the Cauchy-problem coefficient recursion plus
//!   majorant-based radius certificates.
//! - [`transforms`] — companion-form conversions between n-th order scalar
//!   equations and first-order systems (cyclic vectors, fundamental
//!   matrices, coefficient recovery).
//! - [`const_coeff`] — constant-coefficient equations solved over the
//!   `Δ_h E(λ, z)` basis, with entire-function order/type estimation.
//! - [`fractional`] — Caputo/Riemann–Liouville operators on Puiseux series
//!   and the Picard fixed-point oracle that independently validates the
//!   solver's majorants.

pub mod const_coeff;
pub mod error;
pub mod fractional;
pub mod seq;
pub mod series;
pub mod solver;
pub mod transforms;

pub use const_coeff::{ConstCoeffSolution, DeltaE};
pub use error::Error;
pub use fractional::PuiseuxSeries;
pub use seq::{MomentSequence, Rational, SequenceDiagnostics};
pub use series::{MatrixSeries, TruncatedSeries, VectorSeries};
pub use solver::{CauchyProblem, SolutionResult};
pub use transforms::CompanionForm;

/// Complex scalar used for every series coefficient.
pub type C64 = num_complex::Complex64;
