use thiserror::Error;

/// Errors raised by the design, validation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e}, max {max_eigenvalue:e})")]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad channel dimension: {0}")]
    BadDimension(String),
    #[error("main and eavesdropper channels are collinear (relative deviation {deviation:e})")]
    CollinearChannels { deviation: f64 },
    #[error("power budget must be positive and finite, got {0}")]
    NonPositivePower(f64),
    #[error("gamma must be positive and finite, got {0}")]
    NonPositiveGamma(f64),
    #[error("gamma must be < {m}")]
    GammaTooLarge { gamma: f64, m: usize },
    #[error("multiplier {nu} outside the dual feasible interval [0, {upper}]")]
    OutOfInterval { nu: f64, upper: f64 },
    #[error("dual bisection failed: {0}")]
    BisectionFailed(String),
    #[error("power-inactive closed form undefined: diagonal entry {index} is {value:e}")]
    RegimeUndefined { index: usize, value: f64 },
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("solver did not converge: {0}")]
    ConvergenceFailed(String),
    #[error("expected inverse requires n_rows > {required}, got {n_rows}")]
    DegreesOfFreedom { n_rows: usize, required: usize },
    #[error("conditional-mean alphabet too large: {points}^{streams} terms")]
    AlphabetTooLarge { points: usize, streams: usize },
    #[error("scenario is not degraded (min eigenvalue of M - E is {min_eigenvalue:e})")]
    NotDegraded { min_eigenvalue: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Short variant name, used in CSV error rows.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::BadDimension(_) => "BadDimension",
            Error::CollinearChannels { .. } => "CollinearChannels",
            Error::NonPositivePower(_) => "NonPositivePower",
            Error::NonPositiveGamma(_) => "NonPositiveGamma",
            Error::GammaTooLarge { .. } => "GammaTooLarge",
            Error::OutOfInterval { .. } => "OutOfInterval",
            Error::BisectionFailed(_) => "BisectionFailed",
            Error::RegimeUndefined { .. } => "RegimeUndefined",
            Error::WrongRegime(_) => "WrongRegime",
            Error::ConvergenceFailed(_) => "ConvergenceFailed",
            Error::DegreesOfFreedom { .. } => "DegreesOfFreedom",
            Error::AlphabetTooLarge { .. } => "AlphabetTooLarge",
            Error::NotDegraded { .. } => "NotDegraded",
            Error::NonFinite(_) => "NonFinite",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse(_) => "Parse",
        }
    }

    /// True when the error is caused by the caller's input rather than by a
    /// numerical failure inside a solver.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::RankDeficient { .. }
                | Error::DimensionMismatch(_)
                | Error::BadDimension(_)
                | Error::CollinearChannels { .. }
                | Error::NonPositivePower(_)
                | Error::NonPositiveGamma(_)
                | Error::GammaTooLarge { .. }
                | Error::DegreesOfFreedom { .. }
                | Error::AlphabetTooLarge { .. }
                | Error::NotDegraded { .. }
                | Error::NonFinite(_)
                | Error::InvalidArgument(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
