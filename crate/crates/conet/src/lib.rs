//! Concept co-occurrence networks: construction from document corpora,
//! a structural metric suite, and generative models.
//!
//! A corpus is a stream of articles, each tagged with the set of
//! concepts it uses. Concepts become nodes; two concepts are linked if
//! some article uses both, so each article contributes a clique and the
//! network is the union of those cliques. The crate measures such
//! networks (density, degree statistics, assortativity, clustering,
//! transitivity, components, degree distributions) and grows synthetic
//! ones three ways:
//!
//! * [`baselines::erdos_renyi`]: uniform random graphs with an exact
//!   link count.
//! * [`baselines::barabasi_albert`]: preferential attachment with an
//!   m-node seed and one newcomer per step.
//! * [`growth`]: block growth, where each article picks a block of
//!   concepts slot by slot; a slot mints a new concept with probability
//!   nu, otherwise reuses one chosen uniformly (USP) or proportionally
//!   to past use (PSP), without repeats inside the block.
//!
//! The [`harness`] module runs any model over R independent seeded
//! realizations, aggregates the metrics, sweeps nu, and renders
//! side-by-side comparisons. All randomness flows through explicitly
//! seeded generators, so every artifact is reproducible bit for bit.

pub mod baselines;
pub mod corpus;
pub mod error;
pub mod fenwick;
pub mod graph;
pub mod growth;
pub mod harness;
pub mod metrics;

pub use baselines::{barabasi_albert, erdos_renyi, BaConfig, ErConfig};
pub use corpus::{
    ArticleRecord, BipartiteNetwork, BlockSizeDistribution, Corpus, CorpusError, ParseStats,
};
pub use error::{ConfigError, Error};
pub use fenwick::FenwickTree;
pub use graph::{GraphError, NodeId, UndirectedGraph};
pub use growth::{
    generate_corpus, generate_network, select_concepts, GeneratedCorpus, GrowthState, ModelConfig,
    SelectionMode,
};
pub use harness::{
    compare, derive_seed, generate_for_seed, ingest_and_report, run, sweep_nu, AggregateMetric,
    AggregateReport, BlockSpec, ComparisonTable, HarnessError, IngestReport, ModelSpec, RunFile,
    RunSpec, SweepPoint, SweepReport, SweepSpec,
};
pub use metrics::{
    assortativity, average_clustering, degree_distribution, degree_stats, density, full_report,
    local_clustering, transitivity, DegreeBin, DegreeDistribution, DegreeStats, MetricsError,
    MetricsReport,
};
