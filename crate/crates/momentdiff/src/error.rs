//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A precondition on plain input data failed (dimensions, orders, ranges).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Custom sequence table exhausted and no extension rule was given.
    #[error("moment sequence value out of range: p = {p}, table length {len}, no extension rule")]
    SequenceOutOfRange { p: usize, len: usize },

    /// Iterated moment derivative asked for more derivatives than the
    /// truncation order supports.
    #[error("series order exhausted: requested {requested} derivatives of an order-{order} series")]
    OrderExhausted { requested: usize, order: usize },

    /// Series or matrix inversion where the constant term is singular.
    #[error("singular at origin: {0}")]
    SingularAtOrigin(String),

    /// No cyclic vector exists for the constant term of the system matrix.
    #[error("no cyclic vector: maximal Krylov rank {max_rank} < dimension {n}")]
    NoCyclicVector { max_rank: usize, n: usize },

    /// The commutation condition required by the system-to-equation
    /// transformation fails.
    #[error(
        "condition (ii) violated at j = {j}, degree p = {p}: |v0 A0^j A_p| = {magnitude:.3e}"
    )]
    ConditionIiViolation { j: usize, p: usize, magnitude: f64 },

    /// A supplied vector is not cyclic for the matrix at hand.
    #[error("supplied vector is not cyclic: Krylov rank {rank} < dimension {n}")]
    NotCyclic { rank: usize, n: usize },

    /// Entire-function estimators received a series with a non-decaying tail.
    #[error("order undefined: {0}")]
    OrderUndefined(String),

    /// The sequence kind carries no documented entire-function order.
    #[error("no documented order for this sequence kind: {0}")]
    NoDocumentedOrder(String),
}

pub type Result<T> = std::result::Result<T, Error>;
