use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the pipeline can surface.
///
/// Variants are grouped by the process exit code they map to (see
/// [`Error::exit_code`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // -- usage / configuration (exit 2)
    #[error("configuration error: {0}")]
    Config(String),
    #[error("template error: unresolved placeholder `{{{placeholder}}}` in {template}")]
    Template { template: String, placeholder: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("degenerate calibration for metric `{metric}` on {direction}: pooled scores have zero spread")]
    DegenerateCalibration { metric: String, direction: String },
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),
    #[error("missing upstream artifact {path} (run `{stage}` first)")]
    Dependency { stage: String, path: PathBuf },

    // -- data integrity (exit 3)
    #[error("{path}:{line}: parse error: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("tag format error: {0}")]
    TagFormat(String),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("overlapping edits [{a_start}, {a_end}) and [{b_start}, {b_end})")]
    Overlap { a_start: usize, a_end: usize, b_start: usize, b_end: usize },
    #[error("edit [{start}, {end}) out of bounds for text of length {len}")]
    Bounds { start: usize, end: usize, len: usize },
    #[error("coverage error: no `{metric}` score for triplet `{triplet_id}`")]
    Coverage { triplet_id: String, metric: String },

    // -- external scorer (exit 4)
    #[error("scorer `{metric}` failed: {message}\n--- scorer stderr ---\n{stderr}")]
    Scorer { metric: String, message: String, stderr: String },
    #[error("scorer `{metric}` protocol error: {message}")]
    Protocol { metric: String, message: String },
    #[error("scorer `{metric}` timed out after {seconds} s without a response")]
    Timeout { metric: String, seconds: f64 },

    // -- capacity (exit 5)
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    pub fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, message: message.into() }
    }

    /// Process exit code: 2 usage, 3 data integrity, 4 scorer failure, 5 capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Template { .. }
            | Error::Domain(_)
            | Error::Calibration(_)
            | Error::DegenerateCalibration { .. }
            | Error::UndefinedCorrelation(_)
            | Error::Dependency { .. } => 2,
            Error::Parse { .. }
            | Error::Integrity(_)
            | Error::TagFormat(_)
            | Error::Alignment(_)
            | Error::Overlap { .. }
            | Error::Bounds { .. }
            | Error::Coverage { .. }
            | Error::Json(_) => 3,
            Error::Scorer { .. } | Error::Protocol { .. } | Error::Timeout { .. } => 4,
            Error::Capacity(_) => 5,
            Error::Io { .. } => 1,
        }
    }
}
