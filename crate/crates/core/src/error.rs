use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value that does not belong to a closed vocabulary or violates a
    /// type invariant.
    #[error("invalid input: {0}")]
    Input(String),

    /// A survey record whose declarations are mutually inconsistent.
    #[error("record {id}: {reason}")]
    Record { id: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    /// An arithmetic precondition failed (zero lifetime, zero traffic, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("degenerate infrastructure `{0}`: no traffic carries a positive allocation weight")]
    DegenerateInfrastructure(String),

    #[error("no emission factor for shifted mode `{0}`")]
    MissingFactor(String),

    #[error("stage shares are undefined for a report without marginal emissions")]
    UndefinedShare,

    #[error("no break-even: {0}")]
    NoBreakEven(String),

    #[error("missing characterization factors for flows: {}", .0.join(", "))]
    MissingFlowFactors(Vec<String>),

    #[error("{}: row {row}, column `{column}`: {message}", .file.display())]
    Schema {
        file: PathBuf,
        row: u64,
        column: String,
        message: String,
    },

    /// A dataset refers to a mode, scenario or infrastructure that no other
    /// dataset defines.
    #[error("link error: {0}")]
    Link(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable tag, used by the CLI for structured errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Record { .. } => "record",
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::EmptyInput(_) => "empty-input",
            Error::DegenerateInfrastructure(_) => "degenerate-infrastructure",
            Error::MissingFactor(_) => "missing-factor",
            Error::UndefinedShare => "undefined-share",
            Error::NoBreakEven(_) => "no-break-even",
            Error::MissingFlowFactors(_) => "missing-flow-factors",
            Error::Schema { .. } => "schema",
            Error::Link(_) => "link",
            Error::Io { .. } => "io",
        }
    }
}
