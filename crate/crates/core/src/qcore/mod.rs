//! Exact statevector algebra for the handful of photons a protocol round uses.
//!
//! States are pure, small (at most four qubits) and immutable. Stochastic
//! operations take an explicit random source so a seed fixes the trajectory.

mod basis;
mod lab;
mod prepare;
mod state;

pub use basis::{Basis, BellOutcome, Ket, Outcome, PairKet, PauliCorrection, TwoQubitBasis};
pub use lab::Lab;
pub use prepare::{class_basis, prepare_state, Family, SignalState, StateClass, StatePreparation};
pub use state::{Measurement, PairMeasurement, Qubit, StateVector, MAX_QUBITS};

pub(crate) use basis::TOLERANCE;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QcoreError {
    #[error("qubit {0} is not part of this state")]
    UnknownQubit(Qubit),
    #[error("qubit {0} appears more than once")]
    DuplicateLabel(Qubit),
    #[error("expected {expected} amplitudes, got {got}")]
    AmplitudeCount { expected: usize, got: usize },
    #[error("amplitude vector cannot be normalized")]
    NotNormalizable,
    #[error("{0} qubits exceeds the supported maximum of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("states have different qubit counts ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("label sets differ")]
    LabelMismatch,
    #[error("basis vectors {i} and {j} are not orthonormal")]
    NonOrthonormalBasis { i: usize, j: usize },
}

/// Convenience wrapper matching the free-function form used by callers.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<f64, QcoreError> {
    a.overlap(b)
}
