use thiserror::Error;

use crate::scenario::ScenarioKind;

/// Errors raised by queries against a validated network.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown state {state} for node {node}")]
    UnknownState { node: String, state: String },
    #[error("target node {0} cannot carry a finding")]
    TargetObserved(String),
    #[error("impossible evidence")]
    ImpossibleEvidence,
    #[error("impossible evidence in the {0} scenario")]
    ImpossibleScenario(ScenarioKind),
    #[error("network too large for enumeration: {assignments} joint assignments exceed {limit}")]
    TooLarge { assignments: u128, limit: u128 },
    #[error("more than {cap} trails between {from} and {to}")]
    TooManyTrails { from: String, to: String, cap: usize },
    #[error("trail endpoints must differ (got {0} twice)")]
    SameEndpoints(String),
    #[error("node {0} is not a finding in the scenario")]
    FindingNotInScenario(String),
    #[error("structure mismatch: {0}")]
    StructureMismatch(String),
    #[error("malformed trail: {0}")]
    MalformedTrail(String),
    #[error("network id mismatch: {0} vs {1}")]
    NetworkMismatch(String, String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
