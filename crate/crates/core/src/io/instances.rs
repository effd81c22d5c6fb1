//! CSV instance files.
//!
//! The header names every schema attribute (in any order; extra columns are
//! an error). Numerical cells are numbers, categorical cells are category
//! labels, Boolean cells are `0`/`1` (or `true`/`false`). An empty file
//! holds no instances.

use std::path::Path;

use super::IoError;
use crate::model::{AttributeKind, AttributeSchema, Instance, Value};

pub fn read<R: std::io::Read>(schema: &AttributeSchema, reader: R) -> Result<Vec<Instance>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() {
        // A zero-byte file holds no instances.
        return Ok(Vec::new());
    }
    if header.len() != schema.len() {
        return Err(IoError::format(format!(
            "{} columns, schema has {} attributes",
            header.len(),
            schema.len()
        )));
    }
    let columns = header
        .iter()
        .map(|h| {
            schema
                .index_of(h)
                .ok_or_else(|| IoError::format(format!("unknown column `{h}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let mut values = vec![Value::Bool(false); schema.len()];
        let mut seen = vec![false; schema.len()];
        for (cell, &a) in record.iter().zip(&columns) {
            if std::mem::replace(&mut seen[a], true) {
                return Err(IoError::format(format!("column `{}` repeated", schema.attribute(a).name)));
            }
            values[a] = parse_cell(schema, a, cell)
                .map_err(|e| IoError::format(format!("row {}: {e}", row + 1)))?;
        }
        out.push(Instance::new(schema, values)?);
    }
    Ok(out)
}

fn parse_cell(schema: &AttributeSchema, a: usize, cell: &str) -> Result<Value, String> {
    let attr = schema.attribute(a);
    match &attr.kind {
        AttributeKind::Numerical => cell
            .parse::<f64>()
            .map(Value::Number)
            .map_err(|_| format!("`{}`: `{cell}` is not a number", attr.name)),
        AttributeKind::Categorical(_) => schema
            .category_index(a, cell)
            .map(Value::Category)
            .map_err(|e| e.to_string()),
        AttributeKind::Boolean => match cell {
            "1" | "true" => Ok(Value::Bool(true)),
            "0" | "false" => Ok(Value::Bool(false)),
            _ => Err(format!("`{}`: `{cell}` is not 0/1", attr.name)),
        },
    }
}

pub fn load(schema: &AttributeSchema, path: impl AsRef<Path>) -> Result<Vec<Instance>, IoError> {
    read(schema, std::fs::File::open(path)?)
}

pub fn write<W: std::io::Write>(
    schema: &AttributeSchema,
    instances: &[Instance],
    writer: W,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(schema.names())?;
    for x in instances {
        w.write_record((0..schema.len()).map(|i| schema.format_value(i, x.value(i))))?;
    }
    w.flush()?;
    Ok(())
}
