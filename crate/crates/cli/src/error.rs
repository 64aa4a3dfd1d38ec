use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ghostlet_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("image: {0}")]
    Image(#[from] image::ImageError),
    #[error("metric {name} is not finite")]
    NonFiniteMetric { name: String },
    #[error("{failed} check(s) exceeded tolerance: {names}")]
    ChecksFailed { failed: usize, names: String },
}

impl CliError {
    /// 2 for usage errors, 3 for numerical-accuracy failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use ghostlet_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::Domain(_) | E::GridMismatch(_) | E::UnsupportedProfile { .. } | E::Capacity { .. }) => 2,
            CliError::Core(E::Accuracy(_) | E::Rank { .. } | E::Singular(_) | E::NonFinite { .. }) => 3,
            CliError::NonFiniteMetric { .. } | CliError::ChecksFailed { .. } => 3,
            _ => 1,
        }
    }
}
