//! JSON documents for instances and allocations.
//!
//! ```json
//! {"agents": ["a1", "a2"], "goods": ["g1"], "valuations": [["1/2"], ["0.25"]]}
//! {"bundles": [["g1"], []]}
//! ```
//!
//! Values are strings holding a decimal or `num/den`. Serialization is canonical:
//! fixed key order, one valuation row per line, lowest-terms rationals.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::model::{format_rational, parse_rational, validate_allocation, Allocation, Instance, ModelError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid value {value:?} for agent {agent}, good {good}")]
    Value { agent: usize, good: usize, value: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    agents: Vec<String>,
    goods: Vec<String>,
    valuations: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationDoc {
    bundles: Vec<Vec<String>>,
}

fn syntax(e: serde_json::Error) -> IoError {
    IoError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
}

/// Parses an instance; worthless goods are accepted, see [`crate::model::validate_instance`].
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(syntax)?;
    let mut rows = Vec::with_capacity(doc.valuations.len());
    for (agent, row) in doc.valuations.iter().enumerate() {
        let mut parsed = Vec::with_capacity(row.len());
        for (good, value) in row.iter().enumerate() {
            let v = parse_rational(value).map_err(|_| IoError::Value { agent, good, value: value.clone() })?;
            parsed.push(v);
        }
        rows.push(parsed);
    }
    Ok(Instance::new(doc.agents, doc.goods, rows)?)
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    format!("[{}]", items.into_iter().collect::<Vec<_>>().join(", "))
}

pub fn serialize_instance(inst: &Instance) -> String {
    let rows: Vec<String> = inst
        .valuations()
        .iter()
        .map(|row| format!("    {}", list(row.iter().map(|v| quote(&format_rational(v))))))
        .collect();
    format!(
        "{{\n  \"agents\": {},\n  \"goods\": {},\n  \"valuations\": [\n{}\n  ]\n}}\n",
        list(inst.agents().iter().map(|a| quote(a))),
        list(inst.goods().iter().map(|g| quote(g))),
        rows.join(",\n")
    )
}

/// Parses an allocation against `inst` and checks it is a complete partition.
pub fn parse_allocation(inst: &Instance, text: &str) -> Result<Allocation, IoError> {
    let doc: AllocationDoc = serde_json::from_str(text).map_err(syntax)?;
    let alloc = Allocation::from_names(inst, &doc.bundles)?;
    validate_allocation(inst, &alloc)?;
    Ok(alloc)
}

pub fn serialize_allocation(inst: &Instance, alloc: &Allocation) -> String {
    let bundles = alloc.bundle_names(inst).into_iter().map(|b| list(b.iter().map(|g| quote(g))));
    format!("{{\"bundles\": {}}}\n", list(bundles))
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn read_instance(path: &Path) -> Result<Instance, IoError> {
    parse_instance(&read(path)?)
}

pub fn read_allocation(inst: &Instance, path: &Path) -> Result<Allocation, IoError> {
    parse_allocation(inst, &read(path)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::File { path: path.display().to_string(), source })
}
