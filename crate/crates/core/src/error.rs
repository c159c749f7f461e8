use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("too few rows: {rows} rows for {params} coefficients (need at least {needed})")]
    InsufficientRows {
        rows: usize,
        params: usize,
        needed: usize,
    },

    #[error("singular design: condition estimate {condition:.3e} exceeds 1e10")]
    SingularDesign { condition: f64 },

    #[error("degenerate fit: residual variance estimate is zero")]
    DegenerateFit,

    #[error("leverage of observation {index} is {leverage} (deletion leaves a rank-deficient design)")]
    LeverageDegenerate { index: usize, leverage: f64 },

    #[error("coefficient norm {norm:.3e} is too small to measure relative changes")]
    DegenerateNorm { norm: f64 },

    #[error("empirical distribution is empty")]
    EmptyDistribution,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("cannot split {n} observations into {k} folds")]
    InfeasibleSplit { n: usize, k: usize },

    #[error("fold {fold} is degenerate: {reason}")]
    FoldDegenerate { fold: usize, reason: String },

    #[error("no grid point produced a valid cross-validation score")]
    NoValidAlpha,

    #[error("bootstrap replication {replication} failed after {attempts} draws (failure rate {failure_rate:.3})")]
    BootstrapDegenerate {
        replication: usize,
        attempts: usize,
        failure_rate: f64,
    },

    #[error("{failed} of {total} replications failed (ceiling is 10%)")]
    TooManyFailures { failed: usize, total: usize },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDataset(_) => "E_INVALID_DATASET",
            Error::InsufficientRows { .. } => "E_INSUFFICIENT_ROWS",
            Error::SingularDesign { .. } => "E_SINGULAR_DESIGN",
            Error::DegenerateFit => "E_DEGENERATE_FIT",
            Error::LeverageDegenerate { .. } => "E_LEVERAGE_DEGENERATE",
            Error::DegenerateNorm { .. } => "E_DEGENERATE_NORM",
            Error::EmptyDistribution => "E_EMPTY_DISTRIBUTION",
            Error::Domain(_) => "E_DOMAIN",
            Error::Dimension(_) => "E_DIMENSION",
            Error::Alignment(_) => "E_ALIGNMENT",
            Error::InfeasibleSplit { .. } => "E_INFEASIBLE_SPLIT",
            Error::FoldDegenerate { .. } => "E_FOLD_DEGENERATE",
            Error::NoValidAlpha => "E_NO_VALID_ALPHA",
            Error::BootstrapDegenerate { .. } => "E_BOOTSTRAP_DEGENERATE",
            Error::TooManyFailures { .. } => "E_TOO_MANY_FAILURES",
            Error::Csv(_) => "E_CSV",
            Error::Config(_) => "E_CONFIG",
            Error::Io(_) => "E_IO",
        }
    }

    /// Module the error originates from.
    pub fn origin(&self) -> &'static str {
        match self {
            Error::InvalidDataset(_)
            | Error::InsufficientRows { .. }
            | Error::SingularDesign { .. }
            | Error::DegenerateFit
            | Error::LeverageDegenerate { .. } => "regression_core",
            Error::DegenerateNorm { .. } | Error::EmptyDistribution => "sample_extension",
            Error::Domain(_) => "domain",
            Error::Dimension(_) | Error::Alignment(_) | Error::TooManyFailures { .. } => {
                "simulation"
            }
            Error::InfeasibleSplit { .. } | Error::FoldDegenerate { .. } | Error::NoValidAlpha => {
                "tuning"
            }
            Error::BootstrapDegenerate { .. } => "inference",
            Error::Csv(_) | Error::Config(_) | Error::Io(_) => "cli_io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
