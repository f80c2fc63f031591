use thiserror::Error;

use crate::logic::ParseError;
use crate::template::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid template `{name}`: {}", join(violations))]
    InvalidTemplate {
        name: String,
        violations: Vec<Violation>,
    },

    #[error("unknown template `{0}`")]
    UnknownTemplate(String),

    #[error("duplicate template name `{0}` in registry")]
    DuplicateTemplate(String),

    #[error("node {node} out of range for a graph with {count} nodes")]
    NodeOutOfRange { node: usize, count: usize },

    #[error("label dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-Boolean label at node {node}")]
    NonBooleanLabel { node: usize },

    #[error("proposition index {index} outside the {count} available propositions")]
    PropositionOutOfRange { index: usize, count: usize },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported aggregator `{0}`")]
    UnsupportedAggregator(String),

    #[error("the corpus does not contain the subject pointed graph")]
    SubjectNotInCorpus,

    #[error("target set is not a union of bisimulation classes of the corpus")]
    TargetNotClassClosed,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
