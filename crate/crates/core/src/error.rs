use std::path::PathBuf;

use crate::network::{BusId, LineId, ValidationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed network document: {0}")]
    Malformed(String),

    #[error("duplicate bus id: {0}")]
    DuplicateBus(BusId),

    #[error("duplicate line id: {0}")]
    DuplicateLine(LineId),

    #[error("line {line} references unknown bus {bus}")]
    UnknownBus { line: LineId, bus: BusId },

    #[error("multiple slack buses: {}", join(.0))]
    MultipleSlack(Vec<BusId>),

    #[error("no slack bus")]
    NoSlack,

    #[error("invalid network:\n{0}")]
    Invalid(ValidationReport),

    #[error("case {case} requires line {line}, which the network does not contain")]
    MissingLine { case: String, line: LineId },

    #[error("singular susceptance system: {0}")]
    Singular(String),

    #[error("flow graph has {nodes} nodes; enumeration supports at most {max}")]
    GraphTooLarge { nodes: usize, max: usize },

    #[error("invalid option {name}: {message}")]
    InvalidOption { name: &'static str, message: String },
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}
