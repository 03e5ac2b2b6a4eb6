//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("dimension {requested} exceeds the configured cap of {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("matrix is not Hermitian (max |A - A^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is rank deficient (pivot {pivot} vanishes)")]
    RankDeficient { pivot: usize },

    #[error("eigensolver failed to converge")]
    EigenConvergence,

    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("control and target coincide on qubit {qubit}")]
    ControlEqualsTarget { qubit: usize },

    #[error("parameter slot {slot} out of range ({n_params} slots)")]
    MissingSlot { slot: usize, n_params: usize },

    #[error("parameter count mismatch: template has {expected}, vector has {found}")]
    ParameterCount { expected: usize, found: usize },

    #[error("slot {slot} is not bound to a rotation gate")]
    SlotNotRotation { slot: usize },

    #[error("parameter slots must each be referenced by exactly one rotation")]
    SlotCoverage,

    #[error("{n_qubits} qubits exceed the dense-construction cap of {max}")]
    SystemTooLarge { n_qubits: usize, max: usize },

    #[error("state vector is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("duplicate qubit {qubit} in Pauli string")]
    DuplicatePauliQubit { qubit: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid finite-difference step {step}")]
    InvalidStep { step: f64 },

    #[error("invalid {what}: {value}")]
    InvalidSize { what: &'static str, value: usize },

    #[error("templates cannot be composed: {reason}")]
    Compose { reason: &'static str },

    #[error("cannot encode an all-zero image")]
    ZeroImage,

    #[error("bad IDX magic number {found:#010x}")]
    BadMagic { found: u32 },

    #[error("truncated IDX payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("{extra} trailing bytes after IDX payload")]
    TrailingBytes { extra: usize },

    #[error("image/label count mismatch: {images} images, {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("template text parse error on line {line}: {message}")]
    TemplateParse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
