//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by population construction, selection, metrics,
/// sweeps, and dataset pipelines.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration document violates a precondition.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation argument is out of range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quota group has fewer members than its allocated slot count.
    #[error("quota infeasible: group {group} has {available} members but was allocated {allocated} slots")]
    QuotaInfeasible {
        group: String,
        allocated: usize,
        available: usize,
    },

    /// A selection references an entity id not present in the population.
    #[error("selection references unknown entity id {0}")]
    UnknownEntity(u64),

    /// A required CSV column is absent from the header row.
    #[error("missing column {column:?}")]
    MissingColumn { column: String },

    /// No rows survived filtering.
    #[error("no rows left after filtering")]
    EmptyData,

    /// A quality transform cannot be applied to the data.
    #[error("transform error: {0}")]
    Transform(String),

    /// An analytical formula was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model fitting requires every subgroup cell to be populated.
    #[error("cannot fit model: subgroup cell {cell} is empty")]
    EmptyCell { cell: String },

    /// Statistical routine received degenerate input.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
