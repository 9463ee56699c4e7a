//! Simple undirected graphs on a dense node range, backed by bitset
//! adjacency rows.
//!
//! The representation targets graphs that are small in node count
//! (tens of thousands) but may be extremely dense, as co-occurrence
//! projections tend to be. One bitset row per node makes link lookup
//! O(1) and neighborhood intersection a word-parallel popcount, which
//! is what the clustering and triangle machinery in [`crate::metrics`]
//! leans on.

use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Index of a node in an [`UndirectedGraph`]. Nodes are dense: a graph
/// with `n` nodes has ids `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node {0} does not exist in a graph of {1} nodes")]
    UnknownNode(NodeId, usize),
    #[error("self-loops are not representable (node {0})")]
    SelfLoop(NodeId),
    #[error("malformed edge list at line {line}: {message}")]
    BadEdgeList { line: usize, message: String },
    #[error("edge list i/o: {0}")]
    Io(#[from] io::Error),
}

/// Undirected simple graph: no self-loops, no parallel links.
///
/// Invariants: the adjacency relation is symmetric, `degree` counts set
/// bits in a node's row, and `link_count` equals half the sum of all
/// degrees. Rows only grow as far as the highest neighbor actually
/// stored, so equality ignores trailing zero words.
#[derive(Debug, Clone, Default)]
pub struct UndirectedGraph {
    rows: Vec<Vec<u64>>,
    degrees: Vec<u32>,
    links: u64,
}

impl UndirectedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph with `n` nodes and no links.
    pub fn with_nodes(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "node ids are u32");
        UndirectedGraph {
            rows: vec![Vec::new(); n],
            degrees: vec![0; n],
            links: 0,
        }
    }

    /// Appends an isolated node and returns its id.
    pub fn add_node(&mut self) -> NodeId {
        let id = self.rows.len();
        assert!(id <= u32::MAX as usize, "node ids are u32");
        self.rows.push(Vec::new());
        self.degrees.push(0);
        NodeId(id as u32)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn link_count(&self) -> u64 {
        self.links
    }

    #[inline]
    fn check(&self, node: NodeId) -> Result<(), GraphError> {
        if node.index() < self.rows.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(node, self.rows.len()))
        }
    }

    /// Whether `u` and `v` are linked. Panics if either id is out of
    /// range.
    #[inline]
    pub fn contains_link(&self, u: NodeId, v: NodeId) -> bool {
        assert!(u.index() < self.rows.len() && v.index() < self.rows.len());
        let row = &self.rows[u.index()];
        let (word, bit) = (v.index() / 64, v.index() % 64);
        word < row.len() && row[word] >> bit & 1 == 1
    }

    #[inline]
    fn set_bit(row: &mut Vec<u64>, target: usize) -> bool {
        let (word, bit) = (target / 64, target % 64);
        if row.len() <= word {
            row.resize(word + 1, 0);
        }
        let fresh = row[word] >> bit & 1 == 0;
        row[word] |= 1 << bit;
        fresh
    }

    /// Inserts the link `{u, v}`. Returns `true` if the link was newly
    /// created, `false` if it was already present.
    pub fn add_link(&mut self, u: NodeId, v: NodeId) -> Result<bool, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let fresh = Self::set_bit(&mut self.rows[u.index()], v.index());
        Self::set_bit(&mut self.rows[v.index()], u.index());
        if fresh {
            self.degrees[u.index()] += 1;
            self.degrees[v.index()] += 1;
            self.links += 1;
        }
        Ok(fresh)
    }

    /// Links every unordered pair among `nodes` (duplicates in the
    /// slice are ignored) and returns how many links were newly
    /// created. Ids are validated before anything is mutated, so a
    /// failed call leaves the graph untouched.
    pub fn add_clique(&mut self, nodes: &[NodeId]) -> Result<u64, GraphError> {
        for &n in nodes {
            self.check(n)?;
        }
        let mut members: Vec<NodeId> = nodes.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut created = 0;
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                if self.add_link(u, v)? {
                    created += 1;
                }
            }
        }
        Ok(created)
    }

    pub fn degree(&self, node: NodeId) -> Result<u32, GraphError> {
        self.check(node)?;
        Ok(self.degrees[node.index()])
    }

    #[inline]
    pub(crate) fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Number of links whose both endpoints are neighbors of `node`,
    /// i.e. the numerator of the local clustering coefficient.
    ///
    /// Each neighbor pair {v, w} with a v-w link is counted once.
    pub fn links_among_neighbors(&self, node: NodeId) -> Result<u64, GraphError> {
        self.check(node)?;
        let row = &self.rows[node.index()];
        let mut twice = 0u64;
        for v in iter_bits(row) {
            twice += intersection_size(row, &self.rows[v]);
        }
        debug_assert!(twice % 2 == 0);
        Ok(twice / 2)
    }

    /// Neighbors of `node` in ascending order. Panics if `node` is out
    /// of range.
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        assert!(node.index() < self.rows.len());
        iter_bits(&self.rows[node.index()]).map(|v| NodeId(v as u32))
    }

    /// Calls `f` once per link, with endpoints ordered `u < v`, in
    /// ascending (u, v) order.
    pub fn for_each_link(&self, mut f: impl FnMut(NodeId, NodeId)) {
        for u in 0..self.rows.len() {
            let row = &self.rows[u];
            // Mask off bits <= u so each link is visited from its lower
            // endpoint only.
            let start_word = (u + 1) / 64;
            for word in start_word..row.len() {
                let mut bits = row[word];
                if word == u / 64 {
                    bits &= !0u64 << (u % 64 + 1);
                }
                while bits != 0 {
                    let v = word * 64 + bits.trailing_zeros() as usize;
                    f(NodeId(u as u32), NodeId(v as u32));
                    bits &= bits - 1;
                }
            }
        }
    }

    /// Connected components as sorted node lists, ordered by their
    /// smallest member. Isolated nodes form singleton components.
    pub fn connected_components(&self) -> Vec<Vec<NodeId>> {
        let n = self.rows.len();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        let mut queue = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.clear();
            queue.push(start);
            let mut members = vec![NodeId(start as u32)];
            while let Some(u) = queue.pop() {
                for v in iter_bits(&self.rows[u]) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push(v);
                        members.push(NodeId(v as u32));
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    /// Writes the graph as a tab-separated link list with a
    /// `#nodes=N links=L` header. Links appear as `u\tv` with `u < v`,
    /// ascending.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "#nodes={} links={}", self.rows.len(), self.links)?;
        let mut result = Ok(());
        self.for_each_link(|u, v| {
            if result.is_ok() {
                result = writeln!(out, "{}\t{}", u, v);
            }
        });
        result
    }

    /// Parses the format produced by [`Self::write_edge_list`]. The
    /// header is mandatory; the declared link count is verified.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, GraphError> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| GraphError::BadEdgeList {
                line: 1,
                message: "missing header".into(),
            })??;
        let (nodes, declared_links) = parse_header(&header)?;
        let mut graph = UndirectedGraph::with_nodes(nodes);
        for (idx, line) in lines.enumerate() {
            let line = line?;
            let lineno = idx + 2;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (u, v) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (parse_id(a, lineno)?, parse_id(b, lineno)?),
                _ => {
                    return Err(GraphError::BadEdgeList {
                        line: lineno,
                        message: format!("expected `u\\tv`, got {:?}", line),
                    })
                }
            };
            graph.add_link(u, v).map_err(|e| GraphError::BadEdgeList {
                line: lineno,
                message: e.to_string(),
            })?;
        }
        if graph.links != declared_links {
            return Err(GraphError::BadEdgeList {
                line: 1,
                message: format!(
                    "header declares {} links but body holds {}",
                    declared_links, graph.links
                ),
            });
        }
        Ok(graph)
    }
}

impl PartialEq for UndirectedGraph {
    fn eq(&self, other: &Self) -> bool {
        if self.rows.len() != other.rows.len() || self.links != other.links {
            return false;
        }
        // Rows may differ in trailing zero words depending on insertion
        // history.
        self.rows.iter().zip(&other.rows).all(|(a, b)| {
            let common = a.len().min(b.len());
            a[..common] == b[..common]
                && a[common..].iter().all(|&w| w == 0)
                && b[common..].iter().all(|&w| w == 0)
        })
    }
}

impl Eq for UndirectedGraph {}

/// Indices of set bits in `row`, ascending.
fn iter_bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(word, &bits)| {
        std::iter::successors(
            if bits == 0 { None } else { Some(bits) },
            |&b| {
                let b = b & (b - 1);
                if b == 0 {
                    None
                } else {
                    Some(b)
                }
            },
        )
        .map(move |b| word * 64 + b.trailing_zeros() as usize)
    })
}

#[inline]
fn intersection_size(a: &[u64], b: &[u64]) -> u64 {
    let n = a.len().min(b.len());
    let mut count = 0u64;
    for i in 0..n {
        count += (a[i] & b[i]).count_ones() as u64;
    }
    count
}

fn parse_header(header: &str) -> Result<(usize, u64), GraphError> {
    let bad = |message: String| GraphError::BadEdgeList { line: 1, message };
    let rest = header
        .strip_prefix("#nodes=")
        .ok_or_else(|| bad(format!("expected `#nodes=N links=L` header, got {:?}", header)))?;
    let (nodes, links) = rest
        .split_once(" links=")
        .ok_or_else(|| bad(format!("expected `#nodes=N links=L` header, got {:?}", header)))?;
    let nodes: usize = nodes
        .parse()
        .map_err(|e| bad(format!("bad node count {:?}: {}", nodes, e)))?;
    let links: u64 = links
        .trim_end()
        .parse()
        .map_err(|e| bad(format!("bad link count {:?}: {}", links, e)))?;
    Ok((nodes, links))
}

fn parse_id(field: &str, line: usize) -> Result<NodeId, GraphError> {
    field
        .parse::<u32>()
        .map(NodeId)
        .map_err(|e| GraphError::BadEdgeList {
            line,
            message: format!("bad node id {:?}: {}", field, e),
        })
}
