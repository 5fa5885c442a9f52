use thiserror::Error;

use crate::fourier::ResonanceReport;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands disagree on Hilbert-space dimension, number of base
    /// frequencies or the frequency values themselves.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// A documented precondition did not hold (non-Hermitian input, nonzero
    /// average where zero is required, ...).
    #[error("contract violated: {0}")]
    Contract(String),

    /// An order, cutoff or table index outside the supported range.
    #[error("out of range: {0}")]
    Range(String),

    /// A division by a frequency combination `n·ω` that is too close to zero.
    #[error("{0}")]
    Resonance(ResonanceReport),

    /// The fixed-step integrator failed its step-doubling self check.
    #[error("accuracy check failed: step-doubling changed U(t={time}) by {deviation:e} (tolerance {tolerance:e}); use a smaller step")]
    Accuracy {
        time: f64,
        deviation: f64,
        tolerance: f64,
    },

    #[error("basis index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
