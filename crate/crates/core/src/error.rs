use thiserror::Error;

/// Errors raised by the design, analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid array configuration: {0}")]
    InvalidConfig(String),

    #[error("angle {0} rad lies outside [0, pi]")]
    InvalidAngle(f64),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid subset size M={m} for N_T={n}: {reason}")]
    InvalidSubsetSize {
        n: usize,
        m: usize,
        reason: &'static str,
    },

    #[error("degenerate sectors: {0}")]
    DegenerateSectors(String),

    #[error("precoder components are not orthogonal (|f_s^H f_n| = {0:e})")]
    NonOrthogonalInputs(f64),

    #[error("gram matrix is singular (condition number {0:e}); densify the angle grid")]
    SingularGram(f64),

    #[error("dictionary would have {columns} columns, cap is {cap}")]
    DictionaryOverflow { columns: u128, cap: usize },

    #[error("eavesdropper angle coincides with the receiver angle")]
    ReceiverAngle,

    #[error("angle {0} rad lies outside the noise-injection sectors")]
    OutsideSector(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Name of the subsystem that raised the error, for diagnostics.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) | Error::InvalidAngle(_) | Error::InvalidGeometry(_) => {
                "array_channel"
            }
            Error::InvalidScenario(_) => "array_channel",
            Error::InvalidSubsetSize { .. } => "analog_jammer",
            Error::DegenerateSectors(_)
            | Error::NonOrthogonalInputs(_)
            | Error::SingularGram(_) => "an_precoder",
            Error::DictionaryOverflow { .. } => "hybrid_codebook",
            Error::ReceiverAngle | Error::OutsideSector(_) => "secrecy_analytics",
            Error::InvalidParameter(_) => "parameters",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
