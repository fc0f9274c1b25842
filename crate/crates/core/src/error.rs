use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure category, stable across releases so scripts can branch on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorClass {
    Io,
    Parse,
    Validation,
    TooShort,
    Numeric,
}

impl ErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Io => "io",
            ErrorClass::Parse => "parse",
            ErrorClass::Validation => "validation",
            ErrorClass::TooShort => "too-short",
            ErrorClass::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate date label `{date}`")]
    DuplicateDate { date: String },

    #[error("non-positive price {value} for `{ticker}` on {date}")]
    NonPositivePrice {
        ticker: String,
        date: String,
        value: f64,
    },

    #[error("`{ticker}` is missing on the first date {date}; no earlier value to carry forward")]
    LeadingGap { ticker: String, date: String },

    #[error("need at least {needed} {what}, got {got}")]
    TooShort {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("zero variance in return column `{ticker}`")]
    ZeroVariance { ticker: String },

    #[error("graph has no edges")]
    EmptyEdgeSet,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("non-finite activation in {gate} gate")]
    NonFiniteGate { gate: &'static str },

    #[error("training diverged at iteration {iteration} (loss {loss})")]
    Diverged { iteration: usize, loss: f64 },

    #[error("window ending {date}: {source}")]
    Window {
        date: String,
        #[source]
        source: Box<Error>,
    },

    #[error("sub-series `{name}`: {source}")]
    SubSeries {
        name: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) => ErrorClass::Io,
            Error::Csv(e) if e.is_io_error() => ErrorClass::Io,
            Error::Csv(_) | Error::Parse { .. } => ErrorClass::Parse,
            Error::EmptyInput
            | Error::DuplicateDate { .. }
            | Error::NonPositivePrice { .. }
            | Error::LeadingGap { .. }
            | Error::Invalid(_)
            | Error::ZeroVariance { .. }
            | Error::EmptyEdgeSet => ErrorClass::Validation,
            Error::TooShort { .. } => ErrorClass::TooShort,
            Error::NonFinite { .. } | Error::NonFiniteGate { .. } | Error::Diverged { .. } => {
                ErrorClass::Numeric
            }
            Error::Window { source, .. } | Error::SubSeries { source, .. } => source.class(),
        }
    }

    pub(crate) fn in_window(self, date: &str) -> Error {
        Error::Window {
            date: date.to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn in_sub_series(self, name: &str) -> Error {
        Error::SubSeries {
            name: name.to_string(),
            source: Box::new(self),
        }
    }
}
