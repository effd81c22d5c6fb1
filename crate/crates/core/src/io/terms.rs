//! Explanations as JSON: an array of terms, each an array of attribute names.

use std::path::Path;

use super::IoError;
use crate::model::{AttributeSchema, Term};

pub fn parse(schema: &AttributeSchema, s: &str) -> Result<Vec<Term>, IoError> {
    let raw: Vec<Vec<String>> = serde_json::from_str(s)?;
    raw.iter()
        .map(|names| {
            names
                .iter()
                .map(|n| {
                    schema
                        .index_of(n)
                        .ok_or_else(|| IoError::format(format!("unknown attribute `{n}`")))
                })
                .collect::<Result<Term, _>>()
        })
        .collect()
}

pub fn load(schema: &AttributeSchema, path: impl AsRef<Path>) -> Result<Vec<Term>, IoError> {
    parse(schema, &std::fs::read_to_string(path)?)
}

pub fn names(schema: &AttributeSchema, t: &Term) -> Vec<String> {
    t.iter().map(|i| schema.attribute(i).name.clone()).collect()
}
