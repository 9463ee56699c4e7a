//! Structural measurements of undirected graphs: density, degree
//! statistics and distributions, assortativity, clustering, and
//! transitivity.
//!
//! Conventions baked in here:
//!
//! * Degree statistics use the population standard deviation (divide
//!   by N, not N-1).
//! * The local clustering coefficient of a node with degree 0 or 1 is
//!   defined as 0 and contributes to the average over all N nodes.
//! * Assortativity is the Pearson correlation of degrees over the 2L
//!   ordered link endpoint pairs; it is undefined when the endpoint
//!   degree variance vanishes (e.g. regular graphs).
//! * Transitivity is 3 * triangles / connected triples; undefined when
//!   the graph has no path of length two.
//!
//! Undefined is a first-class outcome, not an NaN: fallible metrics
//! return dedicated errors, and [`full_report`] carries them as `None`.
//!
//! Sums over nodes and links accumulate in wide integers, so results
//! are exact up to the final division and independent of traversal
//! batching.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, NodeId, UndirectedGraph};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("{metric} is undefined here: {reason}")]
    Undefined {
        metric: &'static str,
        reason: &'static str,
    },
    #[error("need at least {need} nodes, graph has {got}")]
    TooFewNodes { need: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Link density 2L / (N (N - 1)), as a fraction in [0, 1].
pub fn density(graph: &UndirectedGraph) -> Result<f64, MetricsError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(MetricsError::TooFewNodes { need: 2, got: n });
    }
    let pairs = n as u128 * (n as u128 - 1) / 2;
    Ok(graph.link_count() as f64 / pairs as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub max: u32,
}

pub fn degree_stats(graph: &UndirectedGraph) -> Result<DegreeStats, MetricsError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(MetricsError::TooFewNodes { need: 1, got: 0 });
    }
    let degrees = graph.degrees();
    let sum: u64 = degrees.iter().map(|&k| k as u64).sum();
    let sum_sq: u128 = degrees.iter().map(|&k| (k as u128) * (k as u128)).sum();
    let max = degrees.iter().copied().max().unwrap_or(0);
    // N * sum(k^2) - (sum k)^2 is N^2 times the population variance.
    let var_num = n as u128 * sum_sq - (sum as u128) * (sum as u128);
    Ok(DegreeStats {
        mean: sum as f64 / n as f64,
        std: (var_num as f64).sqrt() / n as f64,
        max,
    })
}

/// One row of an exact (unbinned) degree distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeBin {
    pub k: u32,
    /// Fraction of nodes with degree exactly k.
    pub pk: f64,
    /// Fraction of nodes with degree >= k.
    pub pcum: f64,
}

/// Exact degree distribution over the degrees that occur in the graph,
/// ascending in k. Binning for plots is deliberately left to consumers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    pub bins: Vec<DegreeBin>,
}

impl DegreeDistribution {
    pub fn pk(&self, k: u32) -> f64 {
        self.bins
            .iter()
            .find(|b| b.k == k)
            .map(|b| b.pk)
            .unwrap_or(0.0)
    }

    /// Tab-separated `k  P(k)  P_cum(k)` rows under a comment header.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# k\tP(k)\tP_cum(k)")?;
        for b in &self.bins {
            writeln!(out, "{}\t{:e}\t{:e}", b.k, b.pk, b.pcum)?;
        }
        Ok(())
    }
}

pub fn degree_distribution(graph: &UndirectedGraph) -> Result<DegreeDistribution, MetricsError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(MetricsError::TooFewNodes { need: 1, got: 0 });
    }
    let mut counts = std::collections::BTreeMap::new();
    for &k in graph.degrees() {
        *counts.entry(k).or_insert(0u64) += 1;
    }
    let mut remaining = n as u64;
    let mut bins = Vec::with_capacity(counts.len());
    for (k, c) in counts {
        bins.push(DegreeBin {
            k,
            pk: c as f64 / n as f64,
            pcum: remaining as f64 / n as f64,
        });
        remaining -= c;
    }
    debug_assert_eq!(remaining, 0);
    Ok(DegreeDistribution { bins })
}

/// Degree assortativity: Pearson correlation of (k_u, k_v) over all 2L
/// ordered endpoint pairs.
pub fn assortativity(graph: &UndirectedGraph) -> Result<f64, MetricsError> {
    if graph.link_count() == 0 {
        return Err(MetricsError::Undefined {
            metric: "assortativity",
            reason: "graph has no links",
        });
    }
    let degrees = graph.degrees();
    // Accumulate per link: s1 = sum (k_u + k_v), sxx = sum (k_u^2 + k_v^2),
    // sxy = sum k_u k_v. Over ordered pairs n = 2L, sum x = s1,
    // sum x^2 = sxx, sum xy = 2 sxy, and x and y are exchangeable.
    let mut s1: u128 = 0;
    let mut sxx: u128 = 0;
    let mut sxy: u128 = 0;
    graph.for_each_link(|u, v| {
        let ku = degrees[u.index()] as u128;
        let kv = degrees[v.index()] as u128;
        s1 += ku + kv;
        sxx += ku * ku + kv * kv;
        sxy += ku * kv;
    });
    let n = 2 * graph.link_count() as u128;
    let num = (n * 2 * sxy) as i128 - (s1 * s1) as i128;
    let den = (n * sxx) as i128 - (s1 * s1) as i128;
    if den == 0 {
        return Err(MetricsError::Undefined {
            metric: "assortativity",
            reason: "endpoint degrees have zero variance",
        });
    }
    Ok(num as f64 / den as f64)
}

/// Local clustering coefficient of one node; 0 by convention for
/// degree <= 1.
pub fn local_clustering(graph: &UndirectedGraph, node: NodeId) -> Result<f64, MetricsError> {
    let k = graph.degree(node)? as u64;
    if k <= 1 {
        return Ok(0.0);
    }
    let m = graph.links_among_neighbors(node)?;
    Ok(2.0 * m as f64 / (k * (k - 1)) as f64)
}

/// Per-node triangle bookkeeping shared by the clustering metrics:
/// links among each node's neighbors, their sum (= 3 * triangles), and
/// the number of connected triples sum k (k - 1) / 2.
fn triangle_scan(graph: &UndirectedGraph) -> (Vec<u64>, u128, u128) {
    let n = graph.node_count();
    let mut among = vec![0u64; n];
    let mut sum_among: u128 = 0;
    let mut triples: u128 = 0;
    for u in 0..n {
        let k = graph.degrees()[u] as u128;
        if k >= 2 {
            triples += k * (k - 1) / 2;
        }
        let m = graph
            .links_among_neighbors(NodeId(u as u32))
            .expect("node is in range");
        among[u] = m;
        sum_among += m as u128;
    }
    (among, sum_among, triples)
}

/// Mean local clustering coefficient over all N nodes.
pub fn average_clustering(graph: &UndirectedGraph) -> Result<f64, MetricsError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(MetricsError::TooFewNodes { need: 1, got: 0 });
    }
    let (among, _, _) = triangle_scan(graph);
    let mut sum = 0.0;
    for u in 0..n {
        let k = graph.degrees()[u] as u64;
        if k > 1 {
            sum += 2.0 * among[u] as f64 / (k * (k - 1)) as f64;
        }
    }
    Ok(sum / n as f64)
}

/// Global transitivity 3 * triangles / connected triples.
pub fn transitivity(graph: &UndirectedGraph) -> Result<f64, MetricsError> {
    let (_, sum_among, triples) = triangle_scan(graph);
    if triples == 0 {
        return Err(MetricsError::Undefined {
            metric: "transitivity",
            reason: "graph has no connected triples",
        });
    }
    // sum_among counts each triangle once per corner, i.e. 3 * triangles.
    Ok(sum_among as f64 / triples as f64)
}

/// The full structural profile of one graph. `assortativity` and
/// `transitivity` are `None` where the metric is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub nodes: usize,
    pub links: u64,
    /// Link density as a fraction (not percent).
    pub density: f64,
    pub mean_degree: f64,
    pub degree_std: f64,
    pub max_degree: u32,
    pub assortativity: Option<f64>,
    pub avg_clustering: f64,
    pub transitivity: Option<f64>,
    /// Component sizes, largest first.
    pub component_sizes: Vec<usize>,
}

impl MetricsReport {
    pub fn csv_header() -> &'static str {
        "N,L,rho_percent,mean_k,sigma,k_max,r,avg_c,T"
    }

    /// One CSV row matching [`Self::csv_header`]; undefined metrics
    /// render as `undef`, density is scaled to percent.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.nodes,
            self.links,
            fmt_f64(self.density * 100.0),
            fmt_f64(self.mean_degree),
            fmt_f64(self.degree_std),
            self.max_degree,
            fmt_opt(self.assortativity),
            fmt_f64(self.avg_clustering),
            fmt_opt(self.transitivity),
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::csv_header())?;
        writeln!(out, "{}", self.to_csv_row())
    }
}

pub(crate) fn fmt_f64(x: f64) -> String {
    // Shortest representation that round-trips, so reports are exact.
    let mut s = format!("{}", x);
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "undef".into(),
    }
}

/// Computes every metric of the suite in one pass over the graph.
pub fn full_report(graph: &UndirectedGraph) -> Result<MetricsReport, MetricsError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(MetricsError::TooFewNodes { need: 2, got: n });
    }
    let stats = degree_stats(graph)?;
    let (among, sum_among, triples) = triangle_scan(graph);
    let mut clustering_sum = 0.0;
    for u in 0..n {
        let k = graph.degrees()[u] as u64;
        if k > 1 {
            clustering_sum += 2.0 * among[u] as f64 / (k * (k - 1)) as f64;
        }
    }
    let assort = match assortativity(graph) {
        Ok(r) => Some(r),
        Err(MetricsError::Undefined { .. }) => None,
        Err(e) => return Err(e),
    };
    let transit = if triples == 0 {
        None
    } else {
        Some(sum_among as f64 / triples as f64)
    };
    let mut component_sizes: Vec<usize> = graph
        .connected_components()
        .iter()
        .map(Vec::len)
        .collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(MetricsReport {
        nodes: n,
        links: graph.link_count(),
        density: density(graph)?,
        mean_degree: stats.mean,
        degree_std: stats.std,
        max_degree: stats.max,
        assortativity: assort,
        avg_clustering: clustering_sum / n as f64,
        transitivity: transit,
        component_sizes,
    })
}
