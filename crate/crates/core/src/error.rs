//! Error type shared across the crate.

use thiserror::Error;

/// Convenience alias used by every fallible function in the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building, validating or solving a model.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data: bad dimensions, rows that do not sum to one,
    /// probabilities out of range, duplicate arcs, indices out of bounds.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The chain violates the structural assumptions the decomposition needs
    /// (single-input roots, cycles through the root, canonical ordering).
    #[error("structure violation: {0}")]
    Structure(String),

    /// A linear system or a state-reduction step hit a zero pivot, meaning
    /// the chain is reducible or the system is singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// An iterative solver ran out of its iteration allowance.
    #[error("iteration limit reached: {0}")]
    IterationLimit(String),

    /// A wall-clock budget expired before the computation finished.
    #[error("time budget exceeded: {0}")]
    BudgetExceeded(String),

    /// Generator configuration that cannot produce a valid instance.
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}
