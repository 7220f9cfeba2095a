use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification of failures, used by front-ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad user input: missing files, malformed documents, invalid parameters.
    Input,
    /// A well-formed request that contradicts an existing artifact
    /// (feature schema, label order, model file version).
    Contract,
    /// Failures that indicate a numerical or internal problem.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv parse error in {source_name}: {message}")]
    Csv {
        source_name: String,
        message: String,
    },
    #[error("invalid UTF-8 in {source_name} at row {row}, column {column}")]
    Decode {
        source_name: String,
        row: u64,
        column: usize,
    },
    #[error("{source_name}: zero data rows")]
    ZeroDataRows { source_name: String },
    #[error("invalid label file: {0}")]
    LabelFile(String),
    #[error("duplicate label for ({source_name}, {attribute})")]
    DuplicateLabel {
        source_name: String,
        attribute: String,
    },
    #[error("attribute ({source_name}, {attribute}) has no label")]
    UnlabeledAttribute {
        source_name: String,
        attribute: String,
    },
    #[error("label refers to nonexistent attribute ({source_name}, {attribute})")]
    DanglingLabel {
        source_name: String,
        attribute: String,
    },
    #[error("duplicate source name {0:?}")]
    DuplicateSource(String),
    #[error("invalid synthesis spec: {0}")]
    SynthSpec(String),
    #[error("attribute {0:?} has no values")]
    EmptyAttribute(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set has a single class ({0}); at least two are required")]
    SingleClass(String),
    #[error("non-finite feature value at instance {instance}, feature {feature}")]
    NonFiniteFeature { instance: usize, feature: usize },
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("input width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("model file version mismatch: file has version {found}, this build reads version {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("model file is not a semlabel model (bad magic bytes)")]
    BadMagic,
    #[error("model file checksum mismatch (truncated or corrupted payload)")]
    Checksum,
    #[error("model payload could not be decoded: {0}")]
    ModelDecode(String),
    #[error("protocol needs at least 2 sources, corpus has {0}")]
    TooFewSources(usize),
    #[error("fold {fold} (test: {test}) has fewer than 2 training classes")]
    DegenerateFold { fold: usize, test: String },
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("cannot compute MRR over zero rankings")]
    EmptyRankings,
    #[error("ranking for {0} carries no true label")]
    MissingTrueLabel(String),
    #[error("report error: {0}")]
    Report(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::SchemaMismatch(_)
            | Error::WidthMismatch { .. }
            | Error::VersionMismatch { .. } => ErrorKind::Contract,
            Error::NonFiniteLoss { .. } | Error::ModelDecode(_) => ErrorKind::Internal,
            _ => ErrorKind::Input,
        }
    }
}
