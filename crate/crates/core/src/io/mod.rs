//! Reading and writing models, instances and terms.
//!
//! * [`native`]: the crate's JSON model format (lossless round trip).
//! * [`xgboost`]: XGBoost JSON tree dumps.
//! * [`instances`]: CSV instance files.
//! * [`terms`]: JSON lists of explanations by attribute name.

use thiserror::Error;

use crate::model::ModelError;

pub mod instances;
pub mod native;
pub mod terms;
pub mod xgboost;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Format(String),
}

impl IoError {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        IoError::Format(msg.into())
    }
}
