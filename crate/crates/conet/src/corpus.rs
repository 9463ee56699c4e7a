//! Document corpora and their network forms: JSON-lines parsing,
//! generic-concept filtering, the bipartite article-concept network,
//! both single-mode projections, and the per-article block-size
//! distribution.
//!
//! Corpus files are JSON-lines, one article per line:
//!
//! ```text
//! {"id": "A1", "concepts": ["Scale-free", "Small world"], "generic": ["Small world"]}
//! ```
//!
//! `generic` is optional and, when present, must be a subset of
//! `concepts`. Concept identity is the exact string after trimming
//! leading/trailing whitespace; matching is case-sensitive. Duplicate
//! concepts within one article collapse to a single occurrence (the
//! bipartite network is simple), counted as warnings rather than
//! errors.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ConfigError;
use crate::graph::{NodeId, UndirectedGraph};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate article id {id:?}")]
    DuplicateArticle { line: usize, id: String },
    #[error("article {0:?} has no generic annotations, cannot filter generic concepts")]
    MissingGenericFlags(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("every article has zero concepts, block-size support would be empty")]
    NoBlockSizes,
    #[error("corpus i/o: {0}")]
    Io(#[from] io::Error),
}

/// One article: its id, deduplicated concept list, and optionally a
/// per-concept generic flag (aligned with `concepts`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleRecord {
    pub article_id: String,
    pub concepts: Vec<String>,
    pub generic_flags: Option<Vec<bool>>,
}

/// Ordered article records plus a dense concept index: concepts are
/// numbered 0..N-1 in order of first appearance across the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    articles: Vec<ArticleRecord>,
    concept_names: Vec<String>,
    concept_index: HashMap<String, u32>,
}

/// Non-fatal observations from parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseStats {
    /// In-article duplicate concept mentions that were collapsed.
    pub duplicate_concepts: u64,
}

#[derive(Serialize, Deserialize)]
struct JsonArticle {
    id: String,
    concepts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generic: Option<Vec<String>>,
}

impl Corpus {
    /// Builds a corpus from records whose concept lists are already
    /// deduplicated, indexing concepts by first appearance.
    pub fn from_articles(articles: Vec<ArticleRecord>) -> Self {
        let mut corpus = Corpus {
            articles,
            concept_names: Vec::new(),
            concept_index: HashMap::new(),
        };
        for article in &corpus.articles {
            for name in &article.concepts {
                if !corpus.concept_index.contains_key(name) {
                    let id = corpus.concept_names.len() as u32;
                    corpus.concept_index.insert(name.clone(), id);
                    corpus.concept_names.push(name.clone());
                }
            }
        }
        corpus
    }

    /// Parses a JSON-lines stream. Malformed lines and duplicate
    /// article ids are errors (reported with their line number);
    /// in-article duplicate concepts are collapsed and counted.
    pub fn parse_jsonl<R: BufRead>(input: R) -> Result<(Self, ParseStats), CorpusError> {
        let mut stats = ParseStats::default();
        let mut seen_ids = HashSet::new();
        let mut articles = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| CorpusError::Parse {
                line: lineno,
                message,
            };
            let raw: JsonArticle =
                serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
            if raw.id.is_empty() {
                return Err(parse_err("article id must be non-empty".into()));
            }
            if !seen_ids.insert(raw.id.clone()) {
                return Err(CorpusError::DuplicateArticle {
                    line: lineno,
                    id: raw.id,
                });
            }
            let mut concepts = Vec::with_capacity(raw.concepts.len());
            let mut in_article = HashSet::new();
            for name in &raw.concepts {
                let name = name.trim();
                if name.is_empty() {
                    return Err(parse_err("concept names must be non-empty".into()));
                }
                if in_article.insert(name.to_string()) {
                    concepts.push(name.to_string());
                } else {
                    stats.duplicate_concepts += 1;
                }
            }
            let generic_flags = match &raw.generic {
                None => None,
                Some(names) => {
                    let mut generic = HashSet::new();
                    for name in names {
                        let name = name.trim();
                        if !in_article.contains(name) {
                            return Err(parse_err(format!(
                                "generic entry {:?} does not appear among the article's concepts",
                                name
                            )));
                        }
                        generic.insert(name.to_string());
                    }
                    Some(concepts.iter().map(|c| generic.contains(c)).collect())
                }
            };
            articles.push(ArticleRecord {
                article_id: raw.id,
                concepts,
                generic_flags,
            });
        }
        Ok((Corpus::from_articles(articles), stats))
    }

    /// Serializes back to the JSON-lines format accepted by
    /// [`Self::parse_jsonl`].
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for article in &self.articles {
            let generic = article.generic_flags.as_ref().map(|flags| {
                article
                    .concepts
                    .iter()
                    .zip(flags)
                    .filter(|(_, &g)| g)
                    .map(|(c, _)| c.clone())
                    .collect::<Vec<_>>()
            });
            let raw = JsonArticle {
                id: article.article_id.clone(),
                concepts: article.concepts.clone(),
                generic,
            };
            serde_json::to_writer(&mut out, &raw)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn articles(&self) -> &[ArticleRecord] {
        &self.articles
    }

    pub fn article_count(&self) -> usize {
        self.articles.len()
    }

    pub fn concept_count(&self) -> usize {
        self.concept_names.len()
    }

    pub fn concept_id(&self, name: &str) -> Option<u32> {
        self.concept_index.get(name).copied()
    }

    pub fn concept_name(&self, id: u32) -> Option<&str> {
        self.concept_names.get(id as usize).map(String::as_str)
    }

    /// With `exclude` set, drops every concept flagged generic and
    /// rebuilds the concept index densely; articles whose concepts are
    /// all generic are retained empty. With `exclude` unset this is the
    /// identity.
    pub fn filter_generic(&self, exclude: bool) -> Result<Corpus, CorpusError> {
        if !exclude {
            return Ok(self.clone());
        }
        let mut filtered = Vec::with_capacity(self.articles.len());
        for article in &self.articles {
            let flags = article
                .generic_flags
                .as_ref()
                .ok_or_else(|| CorpusError::MissingGenericFlags(article.article_id.clone()))?;
            let concepts: Vec<String> = article
                .concepts
                .iter()
                .zip(flags)
                .filter(|(_, &g)| !g)
                .map(|(c, _)| c.clone())
                .collect();
            let kept = concepts.len();
            filtered.push(ArticleRecord {
                article_id: article.article_id.clone(),
                concepts,
                generic_flags: Some(vec![false; kept]),
            });
        }
        Ok(Corpus::from_articles(filtered))
    }

    /// Empirical distribution of concepts-per-article. Articles left
    /// with zero concepts carry no block size and are skipped; a corpus
    /// consisting only of such articles has no support and is rejected.
    pub fn block_size_histogram(&self) -> Result<BlockSizeDistribution, CorpusError> {
        if self.articles.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let mut counts: HashMap<u32, u64> = HashMap::new();
        for article in &self.articles {
            let n = article.concepts.len() as u32;
            if n > 0 {
                *counts.entry(n).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return Err(CorpusError::NoBlockSizes);
        }
        let weights: Vec<(u32, f64)> = counts.into_iter().map(|(n, c)| (n, c as f64)).collect();
        BlockSizeDistribution::empirical(weights)
            .map_err(|e| CorpusError::Parse { line: 0, message: e.to_string() })
    }
}

/// Two-mode article-concept network: links run only between an article
/// and the concepts it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteNetwork {
    concept_count: usize,
    /// Per article, the (deduplicated) concept ids it touches.
    incidence: Vec<Vec<u32>>,
}

impl BipartiteNetwork {
    /// One cross-link per (article, concept) incidence.
    pub fn build(corpus: &Corpus) -> Self {
        let incidence = corpus
            .articles
            .iter()
            .map(|a| {
                a.concepts
                    .iter()
                    .map(|c| corpus.concept_index[c])
                    .collect()
            })
            .collect();
        BipartiteNetwork {
            concept_count: corpus.concept_count(),
            incidence,
        }
    }

    pub fn article_count(&self) -> usize {
        self.incidence.len()
    }

    pub fn concept_count(&self) -> usize {
        self.concept_count
    }

    pub fn cross_link_count(&self) -> u64 {
        self.incidence.iter().map(|c| c.len() as u64).sum()
    }

    /// Concept projection: concepts are linked iff some article
    /// contains both, i.e. the union of per-article cliques.
    pub fn project_concepts(&self) -> UndirectedGraph {
        let mut graph = UndirectedGraph::with_nodes(self.concept_count);
        let mut scratch = Vec::new();
        for concepts in &self.incidence {
            scratch.clear();
            scratch.extend(concepts.iter().map(|&c| NodeId(c)));
            graph.add_clique(&scratch).expect("concept ids are dense");
        }
        graph
    }

    /// Article projection: articles are linked iff they share at least
    /// one concept. Quadratic in the popularity of common concepts; fine
    /// for fixture-scale corpora, not meant for the full-size network.
    pub fn project_articles(&self) -> UndirectedGraph {
        let mut by_concept: Vec<Vec<NodeId>> = vec![Vec::new(); self.concept_count];
        for (article, concepts) in self.incidence.iter().enumerate() {
            for &c in concepts {
                by_concept[c as usize].push(NodeId(article as u32));
            }
        }
        let mut graph = UndirectedGraph::with_nodes(self.incidence.len());
        for members in &by_concept {
            graph.add_clique(members).expect("article ids are dense");
        }
        graph
    }
}

/// Distribution of the number of concepts per article (block size n_t).
///
/// Three kinds: a fixed constant, an empirical histogram, and a
/// discrete log-normal fallback for when no empirical histogram is
/// available. The log-normal is parameterized by its continuous mean
/// and log-space sigma; samples are rounded and clamped to >= 1.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockSizeDistribution {
    Fixed(u32),
    Empirical(EmpiricalBlockSizes),
    LogNormal { mean: f64, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalBlockSizes {
    sizes: Vec<u32>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BlockSizeDistribution {
    pub fn fixed(n: u32) -> Result<Self, ConfigError> {
        if n == 0 {
            return Err(ConfigError::invalid("block size must be >= 1"));
        }
        Ok(BlockSizeDistribution::Fixed(n))
    }

    /// Builds the empirical kind from (size, weight) pairs; weights are
    /// normalized, duplicate sizes merged.
    pub fn empirical(weights: Vec<(u32, f64)>) -> Result<Self, ConfigError> {
        let mut merged: HashMap<u32, f64> = HashMap::new();
        for (n, w) in weights {
            if n == 0 {
                return Err(ConfigError::invalid("block sizes must be >= 1"));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(ConfigError::invalid(format!(
                    "weight for block size {} must be finite and >= 0, got {}",
                    n, w
                )));
            }
            *merged.entry(n).or_insert(0.0) += w;
        }
        merged.retain(|_, w| *w > 0.0);
        if merged.is_empty() {
            return Err(ConfigError::invalid("empirical block-size support is empty"));
        }
        let total: f64 = merged.values().sum();
        let mut sizes: Vec<u32> = merged.keys().copied().collect();
        sizes.sort_unstable();
        let probs: Vec<f64> = sizes.iter().map(|n| merged[n] / total).collect();
        let mut acc = 0.0;
        let cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        debug_assert!((acc - 1.0).abs() < 1e-9);
        Ok(BlockSizeDistribution::Empirical(EmpiricalBlockSizes {
            sizes,
            probs,
            cumulative,
        }))
    }

    pub fn log_normal(mean: f64, sigma: f64) -> Result<Self, ConfigError> {
        if !mean.is_finite() || mean < 1.0 {
            return Err(ConfigError::invalid(format!(
                "log-normal mean must be >= 1, got {}",
                mean
            )));
        }
        if !sigma.is_finite() || sigma <= 0.0 || sigma > 3.0 {
            return Err(ConfigError::invalid(format!(
                "log-normal sigma must lie in (0, 3], got {}",
                sigma
            )));
        }
        Ok(BlockSizeDistribution::LogNormal { mean, sigma })
    }

    /// Draws one block size. The fixed kind consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            BlockSizeDistribution::Fixed(n) => *n,
            BlockSizeDistribution::Empirical(e) => {
                let x: f64 = rng.gen();
                let idx = e.cumulative.partition_point(|&c| c <= x);
                e.sizes[idx.min(e.sizes.len() - 1)]
            }
            BlockSizeDistribution::LogNormal { mean, sigma } => {
                // Mean of exp(N(mu, sigma^2)) is exp(mu + sigma^2/2).
                let mu = mean.ln() - sigma * sigma / 2.0;
                let dist = LogNormal::new(mu, *sigma).expect("validated at construction");
                let x: f64 = dist.sample(rng);
                x.round().max(1.0).min(u32::MAX as f64) as u32
            }
        }
    }

    /// Mean block size. For the log-normal kind this is the mean of the
    /// underlying continuous distribution (rounding bias is not
    /// corrected for).
    pub fn mean(&self) -> f64 {
        match self {
            BlockSizeDistribution::Fixed(n) => *n as f64,
            BlockSizeDistribution::Empirical(e) => e
                .sizes
                .iter()
                .zip(&e.probs)
                .map(|(&n, &p)| n as f64 * p)
                .sum(),
            BlockSizeDistribution::LogNormal { mean, .. } => *mean,
        }
    }

    /// Histogram as `n,probability` CSV. The parametric kind has no
    /// finite histogram and is rejected.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), ConfigError> {
        let rows: Vec<(u32, f64)> = match self {
            BlockSizeDistribution::Fixed(n) => vec![(*n, 1.0)],
            BlockSizeDistribution::Empirical(e) => {
                e.sizes.iter().copied().zip(e.probs.iter().copied()).collect()
            }
            BlockSizeDistribution::LogNormal { .. } => {
                return Err(ConfigError::invalid(
                    "parametric block-size distribution has no finite histogram",
                ))
            }
        };
        let io_err = |e: io::Error| ConfigError::invalid(format!("histogram write: {}", e));
        writeln!(out, "n,probability").map_err(io_err)?;
        for (n, p) in rows {
            writeln!(out, "{},{}", n, crate::metrics::fmt_f64(p)).map_err(io_err)?;
        }
        Ok(())
    }

    /// Parses the CSV written by [`Self::write_csv`] into the empirical
    /// kind. A leading `n,probability` header is optional.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, ConfigError> {
        let mut weights = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line =
                line.map_err(|e| ConfigError::invalid(format!("histogram read: {}", e)))?;
            let line = line.trim();
            if line.is_empty() || (idx == 0 && line.eq_ignore_ascii_case("n,probability")) {
                continue;
            }
            let (n, p) = line.split_once(',').ok_or_else(|| {
                ConfigError::invalid(format!(
                    "histogram line {}: expected `n,probability`, got {:?}",
                    idx + 1,
                    line
                ))
            })?;
            let n: u32 = n.trim().parse().map_err(|e| {
                ConfigError::invalid(format!("histogram line {}: bad size: {}", idx + 1, e))
            })?;
            let p: f64 = p.trim().parse().map_err(|e| {
                ConfigError::invalid(format!("histogram line {}: bad probability: {}", idx + 1, e))
            })?;
            weights.push((n, p));
        }
        BlockSizeDistribution::empirical(weights)
    }
}
