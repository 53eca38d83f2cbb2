use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("unknown DoF `{0}`")]
    UnknownDof(String),
    #[error("DoF `{0}` listed more than once")]
    DuplicateDof(String),

    #[error("need at least 2 poses to estimate a covariance, got {0}")]
    InsufficientSamples(usize),
    #[error("non-finite value in {0}")]
    NonFiniteInput(String),
    #[error("covariance is singular; increase the ridge term")]
    SingularCovariance,

    #[error("measurement matrix is rank deficient (rank {rank} < {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },
    #[error("H P_o H^T is ill-conditioned (condition number {0:.3e})")]
    IllConditionedGram(f64),
    #[error("innovation matrix H P_o H^T + R is ill-conditioned (condition number {0:.3e})")]
    IllConditionedInnovation(f64),
    #[error("prior covariance is not invertible")]
    SingularPrior,
    #[error("noise covariance is not invertible; use the minimum variance (SMW) form instead")]
    SingularNoise,
    #[error("measurement matrix is not a selection matrix")]
    NotSelectionMatrix,
    #[error("prior covariance block of the measured DoFs is singular")]
    SingularMeasuredBlock,
    #[error("invalid measurement model: {0}")]
    InvalidModel(String),

    #[error("calibration poses do not span the joint space (rank {rank} < {dofs}); collect at least {dofs} linearly independent reference poses")]
    RankDeficientPoses { rank: usize, dofs: usize },
    #[error("need at least 2 samples per raw window, got {0}")]
    InsufficientWindowSamples(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample has fewer than 2 distinct values")]
    TooFewDistinct,

    #[error("report is incomplete: {0}")]
    IncompleteReport(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownDof(_) => "UNKNOWN_DOF",
            Error::DuplicateDof(_) => "DUPLICATE_DOF",
            Error::InsufficientSamples(_) => "INSUFFICIENT_SAMPLES",
            Error::NonFiniteInput(_) => "NON_FINITE_INPUT",
            Error::SingularCovariance => "SINGULAR_COVARIANCE",
            Error::RankDeficient { .. } => "RANK_DEFICIENT",
            Error::IllConditionedGram(_) => "ILL_CONDITIONED_GRAM",
            Error::IllConditionedInnovation(_) => "ILL_CONDITIONED_INNOVATION",
            Error::SingularPrior => "SINGULAR_PRIOR",
            Error::SingularNoise => "SINGULAR_NOISE",
            Error::NotSelectionMatrix => "NOT_SELECTION_MATRIX",
            Error::SingularMeasuredBlock => "SINGULAR_MEASURED_BLOCK",
            Error::InvalidModel(_) => "INVALID_MODEL",
            Error::RankDeficientPoses { .. } => "RANK_DEFICIENT_POSES",
            Error::InsufficientWindowSamples(_) => "INSUFFICIENT_WINDOW_SAMPLES",
            Error::DimensionMismatch(_) => "DIMENSION_MISMATCH",
            Error::TooFewSamples { .. } => "TOO_FEW_SAMPLES",
            Error::TooFewDistinct => "TOO_FEW_DISTINCT",
            Error::IncompleteReport(_) => "INCOMPLETE_REPORT",
            Error::Parse { .. } => "PARSE",
            Error::Config(_) => "CONFIG",
            Error::Io(_) => "IO",
            Error::Json(_) => "JSON",
        }
    }
}
