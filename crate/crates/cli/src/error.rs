use mmsec_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent configuration.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    /// Core validation rejected a value derived from the configuration.
    #[error("invalid input to {}: {source}", source.module())]
    Invalid { source: CoreError },

    /// A numerical routine failed on otherwise valid input.
    #[error("numerical failure in {}: {source}", source.module())]
    Numerical { source: CoreError },

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },

    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Wraps a core error raised while validating the `field` section.
    pub fn field(field: &str, e: CoreError) -> Self {
        Self::config(field, e.to_string())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Invalid { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } | CliError::Output(_) => 1,
        }
    }
}

/// Input-domain errors map to configuration failures, the rest to numerical
/// ones.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SingularGram(_)
            | CoreError::NonOrthogonalInputs(_)
            | CoreError::DictionaryOverflow { .. } => CliError::Numerical { source: e },
            other => CliError::Invalid { source: other },
        }
    }
}
