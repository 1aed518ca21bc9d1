use thiserror::Error;

use crate::netlist::{GateKind, NetId};

#[derive(Error, Debug)]
pub enum Error {
    #[error("gate {kind} expects {expected} inputs, got {got}")]
    Arity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("net {0} is not defined")]
    UnknownNet(NetId),
    #[error("inputs must be declared before the first gate")]
    LateInput,
    #[error("duplicate port name `{0}`")]
    DuplicatePort(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("malformed netlist: {0}")]
    Malformed(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cost models differ between reports")]
    CostModelMismatch,
    #[error("vector streams differ between reports")]
    VectorStreamMismatch,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
