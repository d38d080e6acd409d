use sfharris::gig::GigError;
use sfharris::harris::HarrisError;
use sfharris::inference::InferenceError;
use sfharris::io::IoError;
use sfharris::sv::SvError;
use thiserror::Error;

/// A failed run. Invalid input exits with 1, a numerical failure with 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Invalid(format!("JSON: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Invalid(format!("CSV: {e}"))
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<GigError> for CliError {
    fn from(e: GigError) -> Self {
        match e {
            GigError::InvalidParams(_) | GigError::DegenerateKappa(_) => CliError::Invalid(e.to_string()),
            GigError::Domain(_) | GigError::Numerics(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<HarrisError> for CliError {
    fn from(e: HarrisError) -> Self {
        match e {
            HarrisError::Gig(g) => g.into(),
            HarrisError::InvalidParams(_) | HarrisError::TimeOutOfRange { .. } | HarrisError::InvalidTrajectory(_) => {
                CliError::Invalid(e.to_string())
            }
            HarrisError::NonFiniteExpectation | HarrisError::Numerics(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::Gig(g) => g.into(),
            InferenceError::Harris(h) => h.into(),
            InferenceError::InvalidData(_) => CliError::Invalid(e.to_string()),
            InferenceError::TooFewDraws { .. } | InferenceError::Sampler(_) | InferenceError::Numerics(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<SvError> for CliError {
    fn from(e: SvError) -> Self {
        match e {
            SvError::InvalidBars(_) | SvError::InvalidConfig(_) => CliError::Invalid(e.to_string()),
            SvError::Degenerate(_) | SvError::Stage { .. } => CliError::Numerical(e.to_string()),
        }
    }
}
