use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point is not on the unit sphere (norm {norm})")]
    NonUnitNorm { norm: f64 },

    #[error("vector is not tangent to the base point (inner product {inner})")]
    NonTangent { inner: f64 },

    #[error("points are antipodal; logarithmic map is undefined")]
    AntipodalPoint,

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("sphere dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("Frechet mean did not converge after {iterations} iterations (gradient norm {gradient_norm})")]
    NoConvergence { iterations: usize, gradient_norm: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("landmark kernel matrix is numerically singular")]
    SingularKernel,

    #[error("insufficient data: need {needed} rows, got {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("model in {0} mode cannot be inverted")]
    NotInvertible(&'static str),

    #[error("eigenvalue spectrum is empty")]
    EmptySpectrum,

    #[error("neighbor count k={k} invalid for n={n} (need 1 <= k < n/2)")]
    InvalidK { k: usize, n: usize },

    #[error("{amplitudes} amplitudes do not fit into {qubits} qubits")]
    TooManyAmplitudes { amplitudes: usize, qubits: usize },

    #[error("qubit index {index} out of range for {qubits} qubits")]
    IndexOutOfRange { index: usize, qubits: usize },

    #[error("noise can only be applied to a density-matrix state")]
    NoiseOnPureState,

    #[error("gate {0} cannot carry a trainable parameter")]
    UnsupportedGate(String),

    #[error("SMO solver did not converge after {0} pair updates")]
    NotConverged(usize),

    #[error("non-finite loss encountered")]
    NonFiniteLoss,

    #[error("fold {0} is empty")]
    EmptyFold(usize),

    #[error("bad magic number {found:#010x} (expected {expected:#010x})")]
    BadMagic { found: u32, expected: u32 },

    #[error("truncated file: {0}")]
    TruncatedFile(String),

    #[error("unknown class {0}")]
    UnknownClass(u8),

    #[error("class {class} has {available} samples, {requested} requested")]
    NotEnoughSamples { class: u8, available: usize, requested: usize },

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("manifest does not match payload: {0}")]
    ManifestMismatch(String),

    #[error("I/O failure: {0}")]
    IoFailure(#[from] std::io::Error),

    #[error("manifest encoding: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
