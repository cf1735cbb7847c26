//! Error taxonomy shared by every module in the crate.
//!
//! Anything that can go wrong surfaces as a [`TairaError`]; the CLI maps the
//! variants onto exit codes, and the orchestrator folds them into per-session
//! failure reasons instead of aborting a batch.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum TairaError {
    /// A line of an input stream failed to parse.
    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    /// Two catalog records share the same id.
    #[error("duplicate item id `{0}`")]
    DuplicateId(String),

    /// The ingestion stream contained no records.
    #[error("empty catalog")]
    EmptyCatalog,

    /// An item id did not resolve against the catalog.
    #[error("unknown item id `{0}`")]
    UnknownItem(String),

    /// A user history has fewer than two interactions (target + at least one).
    #[error("history too short for user `{0}`: need a target item plus at least one interaction")]
    HistoryTooShort(String),

    /// A caller violated an operation precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The model kept returning output we could not parse, even after re-prompts.
    #[error("malformed model output after {attempts} attempts; last reply: {last_output}")]
    MalformedOutput { attempts: usize, last_output: String },

    /// The chat backend failed (transport error, missing scripted rule, ...).
    #[error("provider failure: {0}")]
    ProviderFailure(String),

    /// A scenario tag was not present in the pattern store.
    #[error("unknown scenario tag `{0}`")]
    UnknownScenario(String),

    /// A pattern id was not present in the pattern store.
    #[error("pattern `{0}` not found")]
    UnknownPattern(String),

    /// An executor agent could not produce its output.
    #[error("executor failure: {0}")]
    ExecutorFailure(String),

    /// A plan violated the planning contract (last-subtask rule, empty plan, ...).
    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    /// Configuration could not be loaded or validated.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, TairaError>;
