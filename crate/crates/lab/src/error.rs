use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Core(#[from] broomlab_core::Error),
    #[error("property suite {suite} failed {failed} of {trials} trials")]
    SuiteFailed { suite: String, failed: usize, trials: usize },
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

impl LabError {
    pub fn parse(line: usize, message: impl Into<String>) -> LabError {
        LabError::Parse {
            line,
            message: message.into(),
        }
    }

    /// 2: parse error, 3: solver refusal, 4: property-suite failure.
    pub fn exit_code(&self) -> i32 {
        use broomlab_core::Error as E;
        match self {
            LabError::Parse { .. } | LabError::Json(_) | LabError::Usage(_) => 2,
            LabError::Core(E::TooLarge { .. } | E::GraphTooLarge { .. }) => 3,
            LabError::SuiteFailed { .. } => 4,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Parse { .. } => "parse",
            LabError::Io(_) => "io",
            LabError::Json(_) => "json",
            LabError::Csv(_) => "csv",
            LabError::Core(broomlab_core::Error::TooLarge { .. } | broomlab_core::Error::GraphTooLarge { .. }) => {
                "solver-refusal"
            }
            LabError::Core(_) => "core",
            LabError::SuiteFailed { .. } => "suite-failure",
            LabError::Usage(_) => "usage",
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorReport {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}
