use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] rdbf_core::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("scenario is infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Wav(#[from] hound::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the failure means "no allocation meets the bound" rather than
    /// a bad input or a broken run.
    pub fn is_infeasible(&self) -> bool {
        match self {
            Error::Infeasible(_) => true,
            Error::Core(rdbf_core::Error::AllocationFailed { status, .. }) => {
                matches!(status, None | Some(rdbf_core::sdp::SdpStatus::Infeasible))
            }
            _ => false,
        }
    }
}
