//! Error types for each pipeline stage.
//!
//! Every stage has its own enum so callers can tell data problems (bad
//! corpus, bad pattern) apart from environment problems (I/O, a paraphrase
//! backend being down) and map them to distinct exit codes.

use std::io;

use thiserror::Error;

/// Errors raised while reading CoNLL-U input.
///
/// Only structurally malformed *files* are errors; a sentence that parses but
/// fails tree validation is dropped and reported, never raised (see
/// [`crate::conllu::IngestReport`]).
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}:{line}: {reason}")]
    Malformed {
        file: String,
        line: u64,
        reason: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// Errors raised while parsing or loading dependency patterns.
#[derive(Debug, Error)]
pub enum PatternError {
    #[error("pattern syntax error at byte {offset}: {reason}")]
    Syntax { offset: usize, reason: String },
    #[error("duplicate capture variable ${var}")]
    DuplicateCapture { var: u32 },
    #[error("node at byte {offset} would have two heads")]
    DoubleHead { offset: usize },
    #[error("empty brackets at byte {offset}")]
    EmptyBrackets { offset: usize },
    #[error("{file}:{line}: {source}")]
    InFile {
        file: String,
        line: u64,
        #[source]
        source: Box<PatternError>,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// Errors raised while building or querying the chain-prefix index.
#[derive(Debug, Error)]
pub enum IndexError {
    #[error("unknown token id {token_id}")]
    UnknownToken { token_id: u32 },
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("index directory {dir}: {reason}")]
    Manifest { dir: String, reason: String },
    #[error("existing index does not match this corpus: {reason}")]
    ChecksumMismatch { reason: String },
    #[error("chunk {chunk_id}: {reason}")]
    CorruptChunk { chunk_id: u32, reason: String },
    #[error("unsupported index format version {found} (reader supports {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("sentence failed validation during index build: {0}")]
    InvalidSentence(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

/// Errors raised during template expansion.
///
/// Distinct from an expansion *skip*: a skip is a per-match data condition
/// (degenerate subtree, stoplisted modifier) recorded in the skip report,
/// while these errors mean the caller wired the stage up wrong.
#[derive(Debug, Error)]
pub enum ExpandError {
    #[error("pattern {pattern_id} is not expandable: {reason}")]
    UnsupportedPattern { pattern_id: String, reason: String },
    #[error("binding does not belong to sentence: {0}")]
    BindingMismatch(String),
}

/// Errors raised by paraphrase providers.
#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("invalid paraphrase request: {0}")]
    InvalidRequest(String),
    #[error("provider violated its contract: {0}")]
    Contract(String),
    #[error("no recorded response for request ({0})")]
    FixtureMiss(String),
    #[error("cannot load fixture {path}: {reason}")]
    FixtureLoad { path: String, reason: String },
    #[error("bad provider spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error("http transport: {0}")]
    Transport(String),
    #[error("service returned {status}: {message}")]
    Service { status: u16, message: String },
}

/// Errors raised while emitting training records.
#[derive(Debug, Error)]
pub enum EmitError {
    #[error("invalid emit option: {0}")]
    InvalidOption(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}
