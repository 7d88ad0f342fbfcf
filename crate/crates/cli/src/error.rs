use std::path::PathBuf;

use scengen::casestudy::CaseError;
use scengen::dsl::Diagnostic;
use scengen::{CountError, FormatError, SampleError, SynthError};
use thiserror::Error;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_OUT_OF_BOUNDS: u8 = 2;
pub const EXIT_NO_TRACES: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {n} error(s)", n = .diagnostics.len())]
    Spec {
        path: PathBuf,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        source: FormatError,
    },
    #[error("factor {factor} ({members}): {source}")]
    Synth {
        factor: usize,
        members: String,
        source: SynthError,
    },
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("invalid trace record on line {line}: {reason}")]
    Record { line: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

fn count_code(e: &CountError) -> u8 {
    match e {
        CountError::IndexOutOfBounds { .. } | CountError::InvalidPrefix { .. } => {
            EXIT_OUT_OF_BOUNDS
        }
        CountError::MemoryLimit { .. } => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

fn synth_code(e: &SynthError) -> u8 {
    match e {
        SynthError::NoTraces => EXIT_NO_TRACES,
        SynthError::LimitExceeded { .. } => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Synth { source, .. } => synth_code(source),
            CliError::Count(e) => count_code(e),
            CliError::Case(CaseError::Synth { source, .. }) => synth_code(source),
            CliError::Case(CaseError::Count(e)) => count_code(e),
            CliError::Sample(SampleError::NoTraces) => EXIT_NO_TRACES,
            CliError::Sample(SampleError::Count(e)) => count_code(e),
            _ => EXIT_USAGE,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
