//! Error severities mapped onto process exit codes.

use taxacc_core::augment::AugmentError;
use taxacc_core::baseline::BaselineError;
use taxacc_core::corpus::CorpusError;
use taxacc_core::eval::EvalError;
use taxacc_core::pipeline::PipelineError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or inconsistent configuration; exit code 2.
    #[error("{0}")]
    Config(String),
    /// Problems with input data or missing upstream artifacts; exit code 3.
    #[error("{0}")]
    Data(String),
    /// External provider failures (fill models, translators, subprocess
    /// backends, credentials); exit code 4.
    #[error("{0}")]
    Provider(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Provider(_) => 4,
        }
    }

    pub fn config(message: impl Into<String>) -> CliError {
        CliError::Config(message.into())
    }

    pub fn data(message: impl Into<String>) -> CliError {
        CliError::Data(message.into())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> CliError {
        match e {
            AugmentError::Provider { .. } => CliError::Provider(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> CliError {
        match e {
            PipelineError::UnknownStrategy { .. }
            | PipelineError::UnknownBackend { .. }
            | PipelineError::InvalidHyper { .. } => CliError::Config(e.to_string()),
            PipelineError::Backend { .. } | PipelineError::StageFailed { .. } => {
                CliError::Provider(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> CliError {
        match e {
            BaselineError::Encoder { .. } => CliError::Provider(e.to_string()),
            BaselineError::UnknownRegressor { .. } => CliError::Config(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> CliError {
        match e {
            EvalError::UnknownFormat { .. } => CliError::Config(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}
