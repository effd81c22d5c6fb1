use thiserror::Error;

use crate::model::ModelError;

/// Errors of the explanation procedures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExplainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("class {given} was supplied but the model predicts {predicted}")]
    ClassMismatch { given: usize, predicted: usize },
    #[error("invalid elimination order: {0}")]
    InvalidOrder(String),
    #[error("term refers to attribute {attribute}, schema has {len}")]
    TermOutOfRange { attribute: usize, len: usize },
    #[error("at least one run is required")]
    NoRuns,
    #[error("the seed term is not an abductive explanation (counterexample found)")]
    SeedNotAbductive,
    #[error("brute-force enumeration needs {cells} cells, cap is {cap}")]
    CapExceeded { cells: u128, cap: u128 },
}
