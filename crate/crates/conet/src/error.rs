//! Crate-wide error plumbing. Most modules define their own error enum
//! next to the code that raises it; this module holds the shared
//! configuration error and the top-level aggregate used by the CLI.

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::graph::GraphError;
use crate::harness::HarnessError;
use crate::metrics::MetricsError;

/// Rejected model or run parameters.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{links} links cannot fit in a simple graph on {nodes} nodes (max {max})")]
    TooManyLinks { nodes: usize, links: u64, max: u64 },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl ConfigError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        ConfigError::Invalid(msg.into())
    }
}

/// Anything the library can fail with; the CLI maps each variant to a
/// stable machine-readable kind.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable error category, used in the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Graph(_) => "graph",
            Error::Corpus(_) => "corpus",
            Error::Metrics(_) => "metrics",
            Error::Config(_) => "config",
            Error::Harness(_) => "harness",
            Error::Io(_) => "io",
        }
    }
}
