//! Reference generators: Erdős–Rényi G(N, L) with an exact link count
//! and Barabási–Albert linear preferential attachment.
//!
//! Both are deterministic given their seed; realizations differ only
//! through it.

use rand::seq::index::sample as index_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::ConfigError;
use crate::fenwick::FenwickTree;
use crate::graph::{NodeId, UndirectedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErConfig {
    pub nodes: usize,
    pub links: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaConfig {
    /// Initial isolated nodes m0.
    pub m0: usize,
    /// Links created per arriving node; must satisfy m <= m0.
    pub m: usize,
    /// Number of node arrivals.
    pub steps: usize,
    pub seed: u64,
}

/// G(N, L): exactly `links` distinct links, uniform over all unordered
/// pairs. Pairs are rejection-sampled into the graph, which at the
/// densities of interest (<= ~30%) wastes little work and is exactly
/// uniform.
pub fn erdos_renyi(config: &ErConfig) -> Result<UndirectedGraph, ConfigError> {
    let n = config.nodes;
    let max = n as u128 * (n as u128 - 1) / 2;
    if config.links as u128 > max {
        return Err(ConfigError::TooManyLinks {
            nodes: n,
            links: config.links,
            max: max.min(u64::MAX as u128) as u64,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut graph = UndirectedGraph::with_nodes(n);
    while graph.link_count() < config.links {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u == v {
            continue;
        }
        graph
            .add_link(NodeId(u), NodeId(v))
            .expect("ids drawn in range");
    }
    Ok(graph)
}

/// Barabási–Albert: `m0` initial isolated nodes, then `steps` arrivals
/// each linking to `m` distinct existing nodes drawn without
/// replacement with probability proportional to current degree.
///
/// While the total degree is zero (the isolated cold start) targets are
/// drawn uniformly; afterwards strictly proportional to degree, with
/// within-step exclusion realized by zeroing a node's weight in the
/// cumulative tree and restoring it when the step completes.
pub fn barabasi_albert(config: &BaConfig) -> Result<UndirectedGraph, ConfigError> {
    if config.m == 0 {
        return Err(ConfigError::invalid("m must be >= 1"));
    }
    if config.m > config.m0 {
        return Err(ConfigError::invalid(format!(
            "m = {} exceeds m0 = {}",
            config.m, config.m0
        )));
    }
    if config.steps == 0 {
        return Err(ConfigError::invalid("steps must be >= 1"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut graph = UndirectedGraph::with_nodes(config.m0);
    let mut tree = FenwickTree::new();
    for _ in 0..config.m0 {
        tree.push(0);
    }
    let mut saved: Vec<(usize, u64)> = Vec::with_capacity(config.m);
    for _ in 0..config.steps {
        let existing = graph.node_count();
        saved.clear();
        if tree.total() == 0 {
            for target in index_sample(&mut rng, existing, config.m) {
                saved.push((target, 0));
            }
        } else {
            // After any completed step at least m+1 nodes carry weight,
            // so m exclusions never exhaust the tree.
            for _ in 0..config.m {
                let target = tree.sample(&mut rng).expect("positive weight remains");
                saved.push((target, tree.set(target, 0)));
            }
        }
        let newcomer = graph.add_node();
        for &(target, old_weight) in &saved {
            graph
                .add_link(newcomer, NodeId(target as u32))
                .expect("targets are distinct existing nodes");
            tree.set(target, old_weight + 1);
        }
        tree.push(config.m as u64);
    }
    debug_assert_eq!(graph.node_count(), config.m0 + config.steps);
    debug_assert_eq!(graph.link_count(), (config.m * config.steps) as u64);
    Ok(graph)
}
