use thiserror::Error;

/// Errors raised by estimation, simulation and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("restriction time {tau} exceeds the admissible maximum {max}")]
    TauOutOfRange { tau: f64, max: f64 },

    #[error("no events observed; {0} is undefined")]
    NoEvents(String),

    #[error("monotone partial likelihood: log hazard ratio diverges to {direction}")]
    MonotoneLikelihood { direction: Divergence },

    #[error("Cox fit did not converge after {iterations} iterations (|score| = {score:e})")]
    NotConverged { iterations: usize, score: f64 },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("insufficient events: requested {requested}, at most {available} achievable")]
    InsufficientEvents { requested: usize, available: usize },

    #[error("row {row}, column `{column}`: {message}")]
    Row {
        row: usize,
        column: String,
        message: String,
    },

    #[error("{} row(s) rejected; first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    RejectedRows(Vec<crate::io::RowDiagnostic>),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Direction in which a divergent Cox estimate runs off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    PositiveInfinity,
    NegativeInfinity,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Divergence::PositiveInfinity => f.write_str("+infinity"),
            Divergence::NegativeInfinity => f.write_str("-infinity"),
        }
    }
}

impl Error {
    /// True for errors caused by malformed user input, as opposed to
    /// statistical signals raised during computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::EmptySample(_)
                | Error::TauOutOfRange { .. }
                | Error::Row { .. }
                | Error::RejectedRows(_)
                | Error::MissingColumn(_)
                | Error::Config(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
