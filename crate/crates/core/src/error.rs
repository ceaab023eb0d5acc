use thiserror::Error;

use crate::numeric::Value;

/// Errors raised by planners, oracles, parsers and the simulator.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed number literal `{token}`: {reason}")]
    ParseValue { token: String, reason: &'static str },

    #[error("tree syntax error at byte {position}: {reason}")]
    ParseTree { position: usize, reason: String },

    #[error("line {line}: {reason}")]
    ParseInput { line: usize, reason: String },

    #[error("input is empty")]
    Empty,

    #[error("input contains a zero value at position {index}; addition-tree inputs must be nonzero")]
    ZeroValue { index: usize },

    #[error("{0}")]
    Precondition(String),

    #[error("input is not sorted nondecreasing at position {index}")]
    Unsorted { index: usize },

    #[error("instance of size {n} exceeds the {what} cap of {cap}")]
    SizeCap { what: &'static str, n: usize, cap: usize },

    #[error("invalid 3-partition instance: {0}")]
    InvalidInstance(String),

    #[error("partition does not cover the instance: {0}")]
    InvalidPartition(String),

    #[error("values not representable with {bits} significand bits: {}", render_list(.values))]
    NotRepresentable { bits: u32, values: Vec<Value> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn render_list(values: &[Value]) -> String {
    const SHOWN: usize = 8;
    let mut out: Vec<String> = values.iter().take(SHOWN).map(|v| v.to_string()).collect();
    if values.len() > SHOWN {
        out.push(format!("... ({} more)", values.len() - SHOWN));
    }
    out.join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
