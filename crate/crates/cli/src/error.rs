use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unknown model, unreadable or malformed input.
    #[error("{0}")]
    Input(String),
    /// An eigensolver ran out of budget.
    #[error("{0}")]
    Convergence(String),
    /// A verification command found a violated check.
    #[error("{0}")]
    CheckFailed(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::CheckFailed(_) => 4,
            CliError::Io(_) | CliError::Internal(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Convergence(_) => "convergence",
            CliError::CheckFailed(_) => "check-failed",
            CliError::Io(_) => "io",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

impl From<gaugegap::code::CodeError> for CliError {
    fn from(e: gaugegap::code::CodeError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<gaugegap::blocks::BlockError> for CliError {
    fn from(e: gaugegap::blocks::BlockError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<gaugegap::decompose::DecompositionError> for CliError {
    fn from(e: gaugegap::decompose::DecompositionError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<gaugegap::gapsearch::SectorFailure> for CliError {
    fn from(e: gaugegap::gapsearch::SectorFailure) -> Self {
        if e.is_convergence() {
            CliError::Convergence(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<gaugegap::gapsearch::GapError> for CliError {
    fn from(e: gaugegap::gapsearch::GapError) -> Self {
        use gaugegap::gapsearch::GapError;
        match e {
            GapError::Ground(f) => f.into(),
            GapError::Code(c) => c.into(),
            GapError::Block(b) => b.into(),
            GapError::NotSymmetry { .. } | GapError::SweepTooLarge { .. } | GapError::Unsupported(_) => {
                CliError::Input(e.to_string())
            }
            GapError::Decomposition(d) => d.into(),
        }
    }
}

impl From<gaugegap::cheeger::CheegerError> for CliError {
    fn from(e: gaugegap::cheeger::CheegerError) -> Self {
        use gaugegap::cheeger::CheegerError;
        match e {
            CheegerError::Eigen(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
