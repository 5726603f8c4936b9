//! Crate-wide error type.

use thiserror::Error;

use crate::topology::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The graph has more than one connected component. Each entry names a
    /// component by its lowest node id and size.
    #[error("graph is disconnected: components {}", format_components(.components))]
    Disconnected { components: Vec<(NodeId, usize)> },

    #[error("no path from node {from} to node {to}")]
    Unreachable { from: NodeId, to: NodeId },

    #[error("no eligible edge routers for client assignment")]
    NoEligibleClients,

    #[error("request sampling requires a non-empty client set")]
    EmptyClients,

    #[error("metric requires a non-empty event log")]
    EmptyLog,

    #[error("baseline footprint must be positive")]
    ZeroBaseline,

    #[error("degenerate rebase baseline: footprint reduction {0} leaves no footprint")]
    DegenerateBaseline(f64),

    #[error("undefined correlation: zero variance in {0}")]
    UndefinedCorrelation(&'static str),

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("reports do not share the same metric set")]
    MetricMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Disconnected { .. } => "disconnected",
            Error::Unreachable { .. } => "unreachable",
            Error::NoEligibleClients => "no_eligible_clients",
            Error::EmptyClients => "empty_clients",
            Error::EmptyLog => "empty_log",
            Error::ZeroBaseline => "zero_baseline",
            Error::DegenerateBaseline(_) => "degenerate_baseline",
            Error::UndefinedCorrelation(_) => "undefined_correlation",
            Error::Config(_) => "config",
            Error::MetricMismatch => "metric_mismatch",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

fn format_components(components: &[(NodeId, usize)]) -> String {
    components
        .iter()
        .map(|(rep, size)| format!("{{min node {rep}, {size} nodes}}"))
        .collect::<Vec<_>>()
        .join(", ")
}
