use chrono::{NaiveDate, NaiveDateTime};
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("gap in index on {date}: expected {expected} rows, found {found}")]
    GapInIndex { date: NaiveDate, expected: usize, found: usize },
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("insufficient history: {0}")]
    InsufficientHistory(String),
    #[error("unparsable timestamp {value:?} in {file}")]
    UnparsableTimestamp { file: PathBuf, value: String },
    #[error("duplicate timestamp {timestamp} in {file}")]
    DuplicateTimestamp { file: PathBuf, timestamp: NaiveDateTime },
    #[error("canonical name collision: {0}")]
    NameCollision(String),
    #[error("empty training range")]
    EmptyTrainingRange,
    #[error("unknown column: {0}")]
    UnknownColumn(String),
    #[error("context window for {0} is entirely missing")]
    AllMissingContext(String),
    #[error("availability violation: column {column} is tagged {tag}")]
    AvailabilityViolation { column: String, tag: String },
    #[error("corrupt cache entry {0}")]
    CorruptCacheEntry(String),
    #[error("horizon length mismatch for {variable}: expected {expected}, found {found}")]
    HorizonMismatch { variable: String, expected: usize, found: usize },
    #[error("unknown variable: {0}")]
    UnknownVariable(String),
    #[error("missing forecast for {variable} on {day}")]
    MissingForecast { day: NaiveDate, variable: String },
    #[error("empty data: {0}")]
    EmptyData(String),
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("checksum mismatch in {0}")]
    Checksum(String),
    #[error("missing required feature: {0}")]
    MissingFeature(String),
    #[error("singular system in least-squares fit")]
    SingularSystem,
    #[error("cover inconsistency in tree {tree} at node {node}")]
    CoverInconsistency { tree: usize, node: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("baseline metric is zero")]
    ZeroBaseline,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("window {window}: {source}")]
    Window {
        window: String,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable error name, printed by the CLI for domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::GapInIndex { .. } => "GapInIndex",
            Error::InvalidTable(_) => "InvalidTable",
            Error::InsufficientHistory(_) => "InsufficientHistory",
            Error::UnparsableTimestamp { .. } => "UnparsableTimestamp",
            Error::DuplicateTimestamp { .. } => "DuplicateTimestamp",
            Error::NameCollision(_) => "NameCollision",
            Error::EmptyTrainingRange => "EmptyTrainingRange",
            Error::UnknownColumn(_) => "UnknownColumn",
            Error::AllMissingContext(_) => "AllMissingContext",
            Error::AvailabilityViolation { .. } => "AvailabilityViolation",
            Error::CorruptCacheEntry(_) => "CorruptCacheEntry",
            Error::HorizonMismatch { .. } => "HorizonMismatch",
            Error::UnknownVariable(_) => "UnknownVariable",
            Error::MissingForecast { .. } => "MissingForecast",
            Error::EmptyData(_) => "EmptyData",
            Error::FeatureMismatch(_) => "FeatureMismatch",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::Checksum(_) => "Checksum",
            Error::MissingFeature(_) => "MissingFeature",
            Error::SingularSystem => "SingularSystem",
            Error::CoverInconsistency { .. } => "CoverInconsistency",
            Error::EmptyInput => "EmptyInput",
            Error::ZeroBaseline => "ZeroBaseline",
            Error::InsufficientData(_) => "InsufficientData",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::Config(_) => "Config",
            Error::Window { source, .. } => source.name(),
            Error::Io { .. } => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
            Error::Parse(_) => "Parse",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn in_window(self, window: impl Into<String>) -> Self {
        Error::Window { window: window.into(), source: Box::new(self) }
    }
}
