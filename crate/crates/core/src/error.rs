use std::path::PathBuf;

use thiserror::Error;

/// Every failure the pipeline can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("identifier component {0:?} contains the `::` separator")]
    ComponentContainsSeparator(String),
    #[error("identifier component `{0}` is empty")]
    EmptyComponent(&'static str),
    #[error("malformed identifier `{0}`")]
    MalformedId(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}:{line}:{col}: syntax error, expected {expected}")]
    Syntax {
        path: String,
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("duplicate method signature `{0}`")]
    DuplicateMethodSignature(String),
    #[error("facts line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("dangling {kind} reference `{id}`")]
    DanglingReference { kind: &'static str, id: String },
    #[error("method `{0}` has both source and pre-extracted path contexts")]
    MixedModes(String),

    #[error("AST root is {0}, expected MethodDeclaration")]
    NotAMethodAst(String),

    #[error("walk corpus is empty")]
    EmptyWalkCorpus,
    #[error("dimension {dim} is not divisible by {parts} {what}")]
    DimNotDivisible {
        dim: usize,
        parts: usize,
        what: &'static str,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vocabulary input is empty")]
    EmptyCorpus,

    #[error("no input vectors")]
    EmptyInput,
    #[error("missing {family} embedding for `{id}`")]
    MissingEmbedding { family: &'static str, id: String },

    #[error("missing hybrid embedding for `{0}`")]
    MissingHybrid(String),
    #[error("training input contains a single class")]
    SingleClassInput,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{samples} samples ({minority} in minority class) cannot fill {folds} folds")]
    TooFewSamplesForFolds {
        samples: usize,
        minority: usize,
        folds: usize,
    },

    #[error("infeasible smell-injection spec: {0}")]
    SpecInfeasible(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("stage `{stage}` input `{path}` does not match the manifest (use --force)")]
    HashMismatch { stage: String, path: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for usage, 3 for unreadable or inconsistent
    /// input, 4 for data the pipeline cannot work with.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter(_) | Error::DimNotDivisible { .. } => 2,
            Error::EmptyWalkCorpus
            | Error::EmptyCorpus
            | Error::EmptyInput
            | Error::MissingEmbedding { .. }
            | Error::MissingHybrid(_)
            | Error::SingleClassInput
            | Error::DimensionMismatch { .. }
            | Error::TooFewSamplesForFolds { .. }
            | Error::SpecInfeasible(_) => 4,
            _ => 3,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
