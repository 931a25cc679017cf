use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Hilbert-space dimension {dim} exceeds the ceiling {ceiling}")]
    DimensionOverflow { dim: usize, ceiling: usize },
    #[error("mode `{label}` has cutoff {cutoff}; at least 1 is required")]
    InvalidCutoff { label: String, cutoff: usize },
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange { what: &'static str, index: usize, len: usize },
    #[error("operands live on different Hilbert spaces")]
    SpaceMismatch,
    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("operation requires a {expected} model, got {found}")]
    WrongModel { expected: &'static str, found: &'static str },
    #[error("qubit and resonator frequencies coincide (|omega_q - omega_c| = {detuning:e})")]
    DegenerateDetuning { detuning: f64 },
    #[error("no interior minimum of the level gap in [{lo}, {hi}]: {reason}")]
    NoBracketedMinimum { lo: f64, hi: f64, reason: String },
    #[error("singular denominator in `{formula}` ({value:e})")]
    SingularDenominator { formula: &'static str, value: f64 },
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("integration failed at t = {t}: {reason}")]
    ToleranceFailure { t: f64, reason: String },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("window holds {samples} samples; at least {required} are needed")]
    WindowTooShort { samples: usize, required: usize },
    #[error("time grid is not uniformly spaced")]
    NonuniformGrid,
    #[error("trajectory has no observable named `{0}`")]
    MissingObservable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
