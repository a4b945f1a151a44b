use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli label {label:?}: unexpected character {found:?} at position {position}")]
    InvalidPauliLabel {
        label: String,
        position: usize,
        found: char,
    },

    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitCountMismatch { expected: usize, found: usize },

    #[error("coefficient of term {label:?} is not finite")]
    NonFiniteCoefficient { label: String },

    #[error("dense diagonalization supports at most {max} qubits, got {n_qubits}")]
    DimensionTooLarge { n_qubits: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("the Hamiltonian has zero spectral norm")]
    ZeroHamiltonian,

    #[error("target overlap {target} is unreachable; scan covered [{min}, {max}]")]
    TargetUnreachable { target: f64, min: f64, max: f64 },

    #[error("gate {gate} addresses qubit {qubit} but the register has {n_qubits} qubits")]
    QubitOutOfRange {
        gate: String,
        qubit: usize,
        n_qubits: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("logarithm argument for {what} is {value}, must exceed 1")]
    LogArgument { what: &'static str, value: f64 },

    #[error("no shot records to evaluate")]
    EmptyRecords,

    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("no sign change of the derivative signal in [{lo}, {hi}]; the rough estimate is not sigma/4-close")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("fit did not converge after {iterations} iterations (best P={best_p}, Lambda={best_lambda})")]
    FitNotConverged {
        iterations: usize,
        best_p: f64,
        best_lambda: f64,
    },

    #[error("shot budget {budget} cannot cover a single energy evaluation ({needed} shots)")]
    BudgetTooSmall { budget: u64, needed: u64 },

    #[error("circuit contains a gate outside {{H, CNOT, Rz}}: {0}")]
    UntranspiledGate(String),

    #[error("timing table has no entry for {0}")]
    MissingTiming(String),

    #[error("cannot build a report from zero rows")]
    EmptyReport,

    #[error("configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
