//! Undirected graphs on nodes labelled `1..=p`.
//!
//! Node labels are 1-based everywhere in the public API. Adjacency is kept
//! as a dense 0-based boolean matrix internally; the graphs of interest here
//! have at most a few hundred nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Simple undirected graph with nodes `1..=p`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<bool>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("p", &self.p)
            .field("edges", &self.edges)
            .finish()
    }
}

impl Graph {
    /// Builds a graph from 1-based edge pairs. Pairs may be given in either
    /// orientation; repeated pairs collapse.
    pub fn new<I>(p: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if p == 0 {
            return Err(Error::InvalidParameter("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        let mut adj = vec![vec![false; p]; p];
        for (i, j) in edges {
            check_node(i, p)?;
            check_node(j, p)?;
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            set.insert((a, b));
            adj[a - 1][b - 1] = true;
            adj[b - 1][a - 1] = true;
        }
        Ok(Graph { p, edges: set, adj })
    }

    pub fn complete(p: usize) -> Result<Self> {
        let edges = (1..=p).flat_map(|i| ((i + 1)..=p).map(move |j| (i, j)));
        Graph::new(p, edges)
    }

    pub fn edgeless(p: usize) -> Result<Self> {
        Graph::new(p, std::iter::empty())
    }

    /// Number of nodes.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adjacency test on 1-based labels. Out-of-range labels are simply not adjacent.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && (1..=self.p).contains(&i) && (1..=self.p).contains(&j) && self.adj[i - 1][j - 1]
    }

    pub(crate) fn adjacent0(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    /// Whether off-diagonal storage position `(a, b)` (0-based) may be nonzero.
    pub(crate) fn allows0(&self, a: usize, b: usize) -> bool {
        a == b || self.adj[a][b]
    }

    pub fn neighbors(&self, i: usize) -> Result<BTreeSet<usize>> {
        check_node(i, self.p)?;
        Ok((1..=self.p).filter(|&j| self.adj[i - 1][j - 1]).collect())
    }

    /// True iff every distinct pair in `nodes` is adjacent. The empty set and
    /// singletons are cliques.
    pub fn is_clique(&self, nodes: &[usize]) -> Result<bool> {
        for &v in nodes {
            check_node(v, self.p)?;
        }
        Ok(self.is_clique0(nodes.iter().map(|&v| v - 1)))
    }

    fn is_clique0<I: IntoIterator<Item = usize>>(&self, nodes: I) -> bool {
        let v: Vec<usize> = nodes.into_iter().collect();
        v.iter()
            .enumerate()
            .all(|(k, &a)| v[k + 1..].iter().all(|&b| a == b || self.adj[a][b]))
    }

    /// All maximal cliques, each sorted ascending, the list sorted
    /// lexicographically (equivalently: by smallest element, then
    /// lexicographically).
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let candidates: Vec<usize> = (0..self.p).collect();
        self.bron_kerbosch(&mut Vec::new(), candidates, Vec::new(), &mut out);
        let mut cliques: Vec<Vec<usize>> = out
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.into_iter().map(|v| v + 1).collect()
            })
            .collect();
        cliques.sort();
        cliques
    }

    // Bron–Kerbosch with Tomita pivoting.
    fn bron_kerbosch(
        &self,
        current: &mut Vec<usize>,
        mut candidates: Vec<usize>,
        mut excluded: Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if candidates.is_empty() {
            if excluded.is_empty() {
                out.push(current.clone());
            }
            return;
        }
        let pivot = candidates
            .iter()
            .chain(excluded.iter())
            .copied()
            .max_by_key(|&u| candidates.iter().filter(|&&v| self.adj[u][v]).count())
            .expect("candidates nonempty");
        let branch: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&v| !self.adj[pivot][v])
            .collect();
        for v in branch {
            let nc = candidates.iter().copied().filter(|&u| self.adj[v][u]).collect();
            let nx = excluded.iter().copied().filter(|&u| self.adj[v][u]).collect();
            current.push(v);
            self.bron_kerbosch(current, nc, nx, out);
            current.pop();
            candidates.retain(|&u| u != v);
            excluded.push(v);
        }
    }

    /// Subgraph induced by `nodes`, relabelled order-preservingly to `1..=|A|`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<InducedSubgraph> {
        if nodes.is_empty() {
            return Err(Error::EmptyNodeSet);
        }
        for &v in nodes {
            check_node(v, self.p)?;
        }
        let labels: Vec<usize> = nodes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let mut edges = Vec::new();
        for (a, &u) in labels.iter().enumerate() {
            for (b, &v) in labels.iter().enumerate().skip(a + 1) {
                if self.adj[u - 1][v - 1] {
                    edges.push((a + 1, b + 1));
                }
            }
        }
        Ok(InducedSubgraph {
            graph: Graph::new(labels.len(), edges)?,
            labels,
        })
    }

    /// Perfect ordering by maximum cardinality search, ties broken by the
    /// smallest label. Returns `None` when the graph is not decomposable.
    pub fn perfect_ordering(&self) -> Option<NodeOrdering> {
        let p = self.p;
        let mut numbered = vec![false; p];
        let mut weight = vec![0usize; p];
        let mut order = Vec::with_capacity(p);
        for _ in 0..p {
            // max_by_key keeps the last maximum, so scan in reverse to prefer small labels
            let next = (0..p)
                .rev()
                .filter(|&v| !numbered[v])
                .max_by_key(|&v| weight[v])
                .expect("an unnumbered node remains");
            numbered[next] = true;
            order.push(next + 1);
            for u in 0..p {
                if !numbered[u] && self.adj[next][u] {
                    weight[u] += 1;
                }
            }
        }
        let ordering = NodeOrdering { order };
        ordering.is_perfect_for(self).then_some(ordering)
    }

    pub fn is_decomposable(&self) -> bool {
        self.perfect_ordering().is_some()
    }

    /// Parses the plain-text graph format: first non-comment line `p`, then one
    /// `i j` pair per line. `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Parse("missing node count".into()))?;
        let p: usize = first
            .parse()
            .map_err(|_| Error::Parse(format!("bad node count {first:?}")))?;
        let mut edges = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed: Vec<usize> = fields.iter().filter_map(|f| f.parse().ok()).collect();
            if fields.len() != 2 || parsed.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected two node labels, got {line:?}",
                    lineno + 1
                )));
            }
            edges.push((parsed[0], parsed[1]));
        }
        Graph::new(p, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.p);
        for (i, j) in self.edges() {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Graph::parse_text(s)
    }
}

fn check_node(v: usize, p: usize) -> Result<()> {
    if (1..=p).contains(&v) {
        Ok(())
    } else {
        Err(Error::NodeOutOfRange { node: v, p })
    }
}

/// Result of [`Graph::induced_subgraph`]: node `k` of `graph` is node
/// `labels[k - 1]` of the parent graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub graph: Graph,
    pub labels: Vec<usize>,
}

impl InducedSubgraph {
    /// Edges expressed in the parent graph's labels.
    pub fn original_edges(&self) -> Vec<(usize, usize)> {
        self.graph
            .edges()
            .map(|(i, j)| (self.labels[i - 1], self.labels[j - 1]))
            .collect()
    }
}

/// A numbering of the nodes: `order[k]` is the node numbered `k + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeOrdering {
    order: Vec<usize>,
}

impl NodeOrdering {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let p = order.len();
        let mut seen = vec![false; p];
        for &v in &order {
            check_node(v, p)?;
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::InvalidParameter(format!("node {v} repeated in ordering")));
            }
        }
        Ok(NodeOrdering { order })
    }

    pub fn identity(p: usize) -> Self {
        NodeOrdering {
            order: (1..=p).collect(),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// Whether each node's lower-numbered neighbours form a clique.
    pub fn is_perfect_for(&self, g: &Graph) -> bool {
        if self.order.len() != g.p() {
            return false;
        }
        (0..self.order.len()).all(|k| {
            let v = self.order[k] - 1;
            let earlier = self.order[..k]
                .iter()
                .map(|&u| u - 1)
                .filter(|&u| g.adjacent0(u, v));
            g.is_clique0(earlier)
        })
    }
}

/// The four example graphs (keys `"a"` to `"d"`): a 4-node decomposable
/// graph, the 4-cycle, and a decomposable and a non-decomposable graph on 10
/// nodes with 15 edges each.
pub fn benchmark_graphs() -> BTreeMap<&'static str, Graph> {
    ["a", "b", "c", "d"]
        .into_iter()
        .map(|k| (k, benchmark_graph(k).expect("known key")))
        .collect()
}

pub fn benchmark_graph(name: &str) -> Option<Graph> {
    let (p, edges): (usize, &[(usize, usize)]) = match name {
        "a" => (4, &[(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)]),
        "b" => (4, &[(1, 2), (1, 3), (2, 4), (3, 4)]),
        "c" => (
            10,
            &[
                (1, 2), (1, 4), (2, 3), (2, 4), (2, 5), (2, 6), (3, 5), (3, 6),
                (4, 8), (4, 9), (5, 6), (6, 7), (6, 10), (7, 10), (8, 9),
            ],
        ),
        "d" => (
            10,
            &[
                (1, 2), (1, 4), (2, 3), (2, 4), (3, 5), (3, 6), (3, 7), (4, 8),
                (5, 6), (5, 9), (6, 7), (6, 10), (7, 10), (8, 9), (9, 10),
            ],
        ),
        _ => return None,
    };
    Some(Graph::new(p, edges.iter().copied()).expect("benchmark edges are valid"))
}
