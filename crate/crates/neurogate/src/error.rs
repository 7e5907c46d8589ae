use std::path::PathBuf;

use thiserror::Error;

/// Failures of the quantum-side constructors and maps.
#[derive(Debug, Error)]
pub enum QuantumError {
    /// The raw matrix maps to (numerically) zero and cannot be normalized
    /// into a density matrix.
    #[error("degenerate input: trace of C*C^dagger is {trace:e}")]
    DegenerateInput { trace: f64 },

    /// Input to an eigensolve deviates from its own adjoint beyond tolerance.
    #[error("matrix is not hermitian: deviation {deviation:e}")]
    NotHermitian { deviation: f64 },

    /// A matrix presented as a density matrix violates hermiticity,
    /// unit trace or positivity.
    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },

    /// A matrix presented as a gate is not unitary.
    #[error("invalid unitary: ||U U^dagger - 1|| = {deviation:e}")]
    InvalidUnitary { deviation: f64 },
}

/// Failures while building or training a network.
#[derive(Debug, Error)]
pub enum NetError {
    #[error("bad network shape: {reason}")]
    BadShape { reason: String },

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
}

/// Failures of weight-file persistence.
#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("weight file not found: {path}")]
    Missing { path: PathBuf },

    #[error("corrupt weight file {path} (line {line}): {reason}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Unrecognized gate name at a string boundary (CLI, file headers).
#[derive(Debug, Error)]
#[error("unknown gate {0:?} (expected one of: cnot, hr, h1, r2)")]
pub struct UnknownGate(pub String);

/// Top-level failure of an experiment run.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Net(#[from] NetError),

    #[error(transparent)]
    Weights(#[from] WeightsError),

    #[error(transparent)]
    Quantum(#[from] QuantumError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
