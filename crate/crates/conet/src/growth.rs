//! Growth-by-blocks model: at each time step an article is generated
//! as a block of n_t distinct concepts and inserted into the concepts
//! network as a clique.
//!
//! Per slot, a concept is novel with probability nu (minting a fresh
//! id); otherwise an existing concept is drawn from the pool of
//! concepts seen in completed articles, minus those already selected
//! for the current article, either uniformly (USP) or proportionally
//! to the number of articles a concept has appeared in (PSP).
//!
//! Rules pinned down here:
//!
//! * t = 1 bootstraps: the pool is empty, so every slot is novel and
//!   no novelty coin is consumed.
//! * Occurrence counts reflect completed articles only; they are
//!   committed after the whole block is selected.
//! * If the eligible pool empties mid-block, the slot falls back to
//!   novel, keeping n_t exact.
//!
//! RNG consumption order per article: one block-size draw, then per
//! slot one novelty coin (skipped when the pool forces novel) followed
//! by one selection draw for existing slots (USP: uniform ints with
//! rejection of already-selected ids; PSP: one weighted-tree draw).

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ArticleRecord, BlockSizeDistribution, Corpus};
use crate::error::ConfigError;
use crate::fenwick::FenwickTree;
use crate::graph::{NodeId, UndirectedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    Usp,
    Psp,
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionMode::Usp => "usp",
            SelectionMode::Psp => "psp",
        })
    }
}

impl FromStr for SelectionMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.to_ascii_lowercase().as_str() {
            "usp" => Ok(SelectionMode::Usp),
            "psp" => Ok(SelectionMode::Psp),
            other => Err(ConfigError::invalid(format!(
                "unknown selection mode {:?} (expected usp or psp)",
                other
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Number of articles to generate.
    pub articles: u32,
    /// Per-slot novelty probability.
    pub nu: f64,
    pub block_sizes: BlockSizeDistribution,
    pub selection: SelectionMode,
    pub seed: u64,
    pub realizations: u32,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.nu.is_finite() && (0.0..=1.0).contains(&self.nu)) {
            return Err(ConfigError::invalid(format!(
                "nu must lie in [0, 1], got {}",
                self.nu
            )));
        }
        if self.articles == 0 {
            return Err(ConfigError::invalid("article count must be >= 1"));
        }
        if self.realizations == 0 {
            return Err(ConfigError::invalid("realizations must be >= 1"));
        }
        Ok(())
    }
}

/// Evolving state of one growth trajectory: per-concept occurrence
/// counts over completed articles, mirrored in a cumulative tree for
/// weighted draws.
#[derive(Debug, Clone)]
pub struct GrowthState {
    t: u32,
    counts: Vec<u64>,
    total: u64,
    tree: FenwickTree,
}

impl Default for GrowthState {
    fn default() -> Self {
        Self::new()
    }
}

impl GrowthState {
    pub fn new() -> Self {
        GrowthState {
            t: 0,
            counts: Vec::new(),
            total: 0,
            tree: FenwickTree::new(),
        }
    }

    /// State with prescribed occurrence counts, as if that many
    /// articles had already used each concept. For law tests.
    pub fn from_counts(counts: &[u64]) -> Self {
        GrowthState {
            t: 0,
            counts: counts.to_vec(),
            total: counts.iter().sum(),
            tree: FenwickTree::with_weights(counts),
        }
    }

    /// Completed articles.
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn concept_count(&self) -> usize {
        self.counts.len()
    }

    pub fn occurrence_count(&self, concept: u32) -> u64 {
        self.counts[concept as usize]
    }

    pub fn total_occurrences(&self) -> u64 {
        self.total
    }

    fn mint(&mut self) -> u32 {
        let id = self.counts.len() as u32;
        self.counts.push(0);
        self.tree.push(0);
        id
    }

    fn record_block(&mut self, block: &[u32]) {
        for &id in block {
            self.counts[id as usize] += 1;
            self.tree.add(id as usize, 1);
            self.total += 1;
        }
        self.t += 1;
    }
}

/// Draws one block size n_t.
pub fn draw_block_size<R: Rng + ?Sized>(dist: &BlockSizeDistribution, rng: &mut R) -> u32 {
    dist.sample(rng)
}

/// Selects one article's block of exactly `n_t` distinct concept ids
/// and commits it to the state (minting novel concepts, then updating
/// occurrence counts once the block is complete).
pub fn select_concepts<R: Rng + ?Sized>(
    state: &mut GrowthState,
    n_t: u32,
    config: &ModelConfig,
    rng: &mut R,
) -> Vec<u32> {
    let pool = state.counts.len() as u32;
    let mut block = Vec::with_capacity(n_t as usize);
    let mut taken_existing = 0u32;
    let mut taken: HashSet<u32> = HashSet::new();
    // PSP exclusions: weights zeroed for this block, restored below.
    let mut zeroed: Vec<(usize, u64)> = Vec::new();
    for _ in 0..n_t {
        let forced_novel = taken_existing == pool;
        let novel = forced_novel || rng.gen_bool(config.nu);
        let id = if novel {
            state.mint()
        } else {
            let id = match config.selection {
                SelectionMode::Usp => loop {
                    let candidate = rng.gen_range(0..pool);
                    if !taken.contains(&candidate) {
                        break candidate;
                    }
                },
                SelectionMode::Psp => {
                    let index = state
                        .tree
                        .sample(rng)
                        .expect("eligible pool is nonempty and all counts >= 1");
                    zeroed.push((index, state.tree.set(index, 0)));
                    index as u32
                }
            };
            taken_existing += 1;
            taken.insert(id);
            id
        };
        block.push(id);
    }
    for (index, weight) in zeroed {
        state.tree.set(index, weight);
    }
    state.record_block(&block);
    block
}

/// Articles produced by one growth run: each block is the article's
/// concept-id set, ids dense in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedCorpus {
    blocks: Vec<Vec<u32>>,
    concept_count: usize,
}

impl GeneratedCorpus {
    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn article_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn concept_count(&self) -> usize {
        self.concept_count
    }

    /// Union of per-block cliques.
    pub fn to_graph(&self) -> UndirectedGraph {
        let mut graph = UndirectedGraph::with_nodes(self.concept_count);
        let mut scratch = Vec::new();
        for block in &self.blocks {
            scratch.clear();
            scratch.extend(block.iter().map(|&c| NodeId(c)));
            graph.add_clique(&scratch).expect("ids are dense");
        }
        graph
    }

    /// JSON-lines export with synthetic ids `A{t}` / `C{j}` (1-based),
    /// round-trippable through the corpus module.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (t, block) in self.blocks.iter().enumerate() {
            let names: Vec<String> = block.iter().map(|&c| format!("C{}", c + 1)).collect();
            let names_json = serde_json::to_string(&names)?;
            writeln!(out, r#"{{"id": "A{}", "concepts": {}}}"#, t + 1, names_json)?;
        }
        Ok(())
    }

    /// In-memory corpus with the same synthetic names; its concept
    /// index coincides with the block ids.
    pub fn to_corpus(&self) -> Corpus {
        let articles = self
            .blocks
            .iter()
            .enumerate()
            .map(|(t, block)| ArticleRecord {
                article_id: format!("A{}", t + 1),
                concepts: block.iter().map(|&c| format!("C{}", c + 1)).collect(),
                generic_flags: None,
            })
            .collect();
        Corpus::from_articles(articles)
    }
}

/// Runs one full trajectory of `config.articles` blocks.
pub fn generate_corpus(config: &ModelConfig) -> Result<GeneratedCorpus, ConfigError> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut state = GrowthState::new();
    let mut blocks = Vec::with_capacity(config.articles as usize);
    for _ in 0..config.articles {
        let n_t = draw_block_size(&config.block_sizes, &mut rng);
        blocks.push(select_concepts(&mut state, n_t, config, &mut rng));
    }
    Ok(GeneratedCorpus {
        blocks,
        concept_count: state.concept_count(),
    })
}

/// Runs one trajectory and builds its concepts network.
pub fn generate_network(
    config: &ModelConfig,
) -> Result<(UndirectedGraph, GeneratedCorpus), ConfigError> {
    let corpus = generate_corpus(config)?;
    Ok((corpus.to_graph(), corpus))
}
