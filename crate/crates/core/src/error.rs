use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("integration diverged at t = {time} s")]
    IntegrationDiverged { time: f64 },

    #[error("signal power is zero; SNR is undefined")]
    ZeroSignalPower,

    #[error("range [{start}, {end}] of a {len}-sample series yields no windows for lag count {lag_count}")]
    EmptyDataset {
        start: usize,
        end: usize,
        len: usize,
        lag_count: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cannot fit {k} clusters to {points} points")]
    TooFewPoints { k: usize, points: usize },

    #[error("training diverged at iteration {iteration} (error = {error})")]
    Diverged { iteration: usize, error: f64 },

    #[error("run {run_index}: {source}")]
    Run {
        run_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short stable name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::IntegrationDiverged { .. } => "integration_diverged",
            Error::ZeroSignalPower => "zero_signal_power",
            Error::EmptyDataset { .. } => "empty_dataset",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::TooFewPoints { .. } => "too_few_points",
            Error::Diverged { .. } => "diverged",
            Error::Run { source, .. } => source.kind(),
            Error::Domain(_) => "domain",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
