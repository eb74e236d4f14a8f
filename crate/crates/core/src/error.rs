use thiserror::Error;

/// Coarse failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
    Infeasible,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero return at row {row}, column {col} (zero policy is `error`)")]
    ZeroReturn { row: usize, col: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("invalid panel: {0}")]
    InvalidPanel(String),
    #[error("insufficient sample: need more than {needed} observations, got {got}")]
    InsufficientSample { needed: usize, got: usize },
    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),
    #[error("penalty derivative requires theta > 0")]
    NonPositiveTheta,
    #[error("coordinate descent did not converge within {sweeps} sweeps (max change {max_change:e})")]
    NoConvergence { sweeps: usize, max_change: f64 },
    #[error("degenerate cross-validation folds: {0}")]
    DegenerateFolds(String),
    #[error("singular design matrix in {0}")]
    SingularDesign(&'static str),
    #[error("variance split infeasible: tr(S_x) = {trace:.6} must exceed p*pi^2/2 = {threshold:.6}")]
    SplitInfeasible { trace: f64, threshold: f64 },
    #[error("column {0} has zero sample variance")]
    ZeroVarianceColumn(usize),
    #[error("autoregressive matrix is (near) singular, condition number {condition:e}")]
    PhiSingular { condition: f64 },
    #[error("autoregressive matrix is not stable: spectral radius {radius:.6} >= 1")]
    UnstablePhi { radius: f64 },
    #[error("model is not usable for smoothing: {0}")]
    UnstableModel(String),
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("no admissible parameter draw after {draws} attempts: {reason}")]
    AdmissibilitySampleExhausted { draws: usize, reason: String },
    #[error("optimizer failed: {0}")]
    OptimFailure(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("covariance matrix is singular or not positive definite")]
    SingularH,
    #[error("loss differential has zero variance")]
    DegenerateVariance,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidPenalty(_) | InvalidArgument(_) | DegenerateFolds(_) => ErrorClass::Config,
            ZeroReturn { .. }
            | NonFinite { .. }
            | InvalidPanel(_)
            | InsufficientSample { .. }
            | ZeroVarianceColumn(_)
            | LengthMismatch { .. }
            | Format(_)
            | Io(_)
            | Csv(_)
            | Json(_) => ErrorClass::Data,
            SplitInfeasible { .. } | AdmissibilitySampleExhausted { .. } => ErrorClass::Infeasible,
            NonPositiveTheta
            | NoConvergence { .. }
            | SingularDesign(_)
            | PhiSingular { .. }
            | UnstablePhi { .. }
            | UnstableModel(_)
            | SolverFailure(_)
            | OptimFailure(_)
            | SingularH
            | DegenerateVariance => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
