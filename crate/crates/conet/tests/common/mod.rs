//! Shared helpers for the integration suites: naive O(N^3) metric
//! oracles over dense boolean adjacency, small-graph enumeration, and a
//! log-binned tail-slope fit for degree distributions.

#![allow(dead_code)]

use conet::graph::{NodeId, UndirectedGraph};
use conet::metrics::DegreeBin;
use rand::Rng;

/// Dense adjacency-matrix view of a small graph; every metric below is
/// computed by the textbook triple-loop definition.
pub struct Dense {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
}

impl Dense {
    pub fn from_links(n: usize, links: &[(usize, usize)]) -> Dense {
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in links {
            assert_ne!(u, v);
            adj[u][v] = true;
            adj[v][u] = true;
        }
        Dense { n, adj }
    }

    pub fn from_graph(graph: &UndirectedGraph) -> Dense {
        let mut links = Vec::new();
        graph.for_each_link(|u, v| links.push((u.index(), v.index())));
        Dense::from_links(graph.node_count(), &links)
    }

    pub fn to_graph(&self) -> UndirectedGraph {
        let mut graph = UndirectedGraph::with_nodes(self.n);
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.adj[u][v] {
                    graph.add_link(NodeId(u as u32), NodeId(v as u32)).unwrap();
                }
            }
        }
        graph
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].iter().filter(|&&b| b).count()
    }

    pub fn link_count(&self) -> u64 {
        let mut twice = 0u64;
        for u in 0..self.n {
            twice += self.degree(u) as u64;
        }
        twice / 2
    }

    pub fn density(&self) -> f64 {
        let pairs = (self.n * (self.n - 1) / 2) as f64;
        self.link_count() as f64 / pairs
    }

    pub fn mean_degree(&self) -> f64 {
        let sum: usize = (0..self.n).map(|u| self.degree(u)).sum();
        sum as f64 / self.n as f64
    }

    pub fn degree_std(&self) -> f64 {
        let mean = self.mean_degree();
        let var = (0..self.n)
            .map(|u| {
                let d = self.degree(u) as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / self.n as f64;
        var.sqrt()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    pub fn local_clustering(&self, u: usize) -> f64 {
        let k = self.degree(u);
        if k <= 1 {
            return 0.0;
        }
        let neighbors: Vec<usize> = (0..self.n).filter(|&v| self.adj[u][v]).collect();
        let mut closed = 0u64;
        for i in 0..neighbors.len() {
            for j in (i + 1)..neighbors.len() {
                if self.adj[neighbors[i]][neighbors[j]] {
                    closed += 1;
                }
            }
        }
        2.0 * closed as f64 / (k * (k - 1)) as f64
    }

    pub fn avg_clustering(&self) -> f64 {
        (0..self.n).map(|u| self.local_clustering(u)).sum::<f64>() / self.n as f64
    }

    /// 3 * triangles / connected triples, None when there are no triples.
    pub fn transitivity(&self) -> Option<f64> {
        let mut triangles = 0u64;
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                for w in (v + 1)..self.n {
                    if self.adj[u][v] && self.adj[v][w] && self.adj[u][w] {
                        triangles += 1;
                    }
                }
            }
        }
        let triples: u64 = (0..self.n)
            .map(|u| {
                let k = self.degree(u) as u64;
                k * k.saturating_sub(1) / 2
            })
            .sum();
        if triples == 0 {
            return None;
        }
        Some(3.0 * triangles as f64 / triples as f64)
    }

    /// Pearson correlation over the 2L ordered endpoint-degree pairs,
    /// None when there are no links or endpoint degrees do not vary.
    pub fn assortativity(&self) -> Option<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for u in 0..self.n {
            for v in 0..self.n {
                if self.adj[u][v] {
                    xs.push(self.degree(u) as f64);
                    ys.push(self.degree(v) as f64);
                }
            }
        }
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        let mut sxy = 0.0;
        for i in 0..xs.len() {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            syy += (ys[i] - my) * (ys[i] - my);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        if sxx == 0.0 || syy == 0.0 {
            return None;
        }
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// All simple graphs on exactly `n` nodes, one per subset of the
/// C(n, 2) node pairs.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Dense> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    let count = 1u64 << pairs.len();
    (0..count).map(move |mask| {
        let links: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        Dense::from_links(n, &links)
    })
}

/// G(n, p) sample as a dense matrix.
pub fn random_dense(n: usize, p: f64, rng: &mut impl Rng) -> Dense {
    let mut links = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                links.push((u, v));
            }
        }
    }
    Dense::from_links(n, &links)
}

/// Least-squares slope of ln(density) vs ln(k) over the top decade of a
/// degree distribution, after geometric binning (8 bins per decade).
/// Raw P(k) is too sparse in the tail for a direct fit: most large
/// degrees occur zero or one time, and the floor of singleton bins
/// flattens any slope estimate.
pub fn log_binned_tail_slope(bins: &[DegreeBin]) -> f64 {
    let k_max = bins.iter().map(|b| b.k).max().expect("non-empty distribution") as f64;
    let ratio = 10f64.powf(1.0 / 8.0);
    let mut points = Vec::new();
    let mut lo = 1.0;
    while lo <= k_max {
        let hi = lo * ratio;
        let mass: f64 = bins
            .iter()
            .filter(|b| (b.k as f64) >= lo && (b.k as f64) < hi)
            .map(|b| b.pk)
            .sum();
        let center = (lo * hi).sqrt();
        if mass > 0.0 && center >= k_max / 10.0 {
            points.push((center.ln(), (mass / (hi - lo)).ln()));
        }
        lo = hi;
    }
    assert!(points.len() >= 3, "need >= 3 tail bins, got {}", points.len());
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Compares an optional metric against its oracle within `tol`.
pub fn opt_close(actual: Option<f64>, oracle: Option<f64>, tol: f64) -> bool {
    match (actual, oracle) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() <= tol,
        _ => false,
    }
}

/// Path of the compiled CLI binary.
pub fn conet_bin() -> &'static str {
    env!("CARGO_BIN_EXE_conet")
}
