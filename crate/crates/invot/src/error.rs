use serde_json::json;

/// Everything that stops a run, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration or inputs: exit code 1.
    #[error("{code}: {message}")]
    Config { code: String, message: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    /// A computation failed on valid inputs: exit code 2.
    #[error("{operation} failed: {source}")]
    Numerical {
        operation: &'static str,
        #[source]
        source: invot_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(code: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } => 2,
            _ => 1,
        }
    }

    /// Single-line machine-readable form for the diagnostic stream.
    pub fn to_json(&self) -> String {
        let value = match self {
            CliError::Config { code, message } => json!({"error": code, "message": message}),
            CliError::Parse { line, column, message } => {
                json!({"error": "ParseError", "line": line, "column": column, "message": message})
            }
            CliError::Numerical { operation, source } => {
                json!({"error": source.name(), "operation": operation, "message": source.to_string()})
            }
            CliError::Io { path, source } => json!({"error": "IoError", "path": path, "message": source.to_string()}),
        };
        value.to_string()
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches the operation name to core failures. Validation-type core errors
/// stay configuration errors; numerical ones map to exit code 2.
pub trait Context<T> {
    fn op(self, operation: &'static str) -> CliResult<T>;
}

impl<T> Context<T> for invot_core::Result<T> {
    fn op(self, operation: &'static str) -> CliResult<T> {
        self.map_err(|source| {
            if source.is_numerical() {
                CliError::Numerical { operation, source }
            } else {
                CliError::config(source.name(), format!("{operation}: {source}"))
            }
        })
    }
}
