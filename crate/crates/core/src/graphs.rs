//! Stability graphs and the recognition of complete multipartite graphs.
//!
//! A stability graph lives on the labels `2..=n`; marking `1` is never a
//! vertex. Three independent tests decide complete multipartiteness:
//!
//! * the complement is a disjoint union of cliques ([`StabilityGraph::is_complete_multipartite`]),
//! * every vertex sees at least one end of every edge ([`StabilityGraph::neighbor_cover_check`]),
//! * no vertex triple induces exactly one edge ([`StabilityGraph::multipartite_witness`]).

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::sets::{IndexSet, MAX_LABEL};

/// Largest `n` accepted by [`enumerate_stability_graphs`].
pub const ENUMERATION_BOUND: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph is not simple: {0}")]
    NotSimple(String),
    #[error("graph is not connected on vertices 2..={0}")]
    NotConnected(usize),
    #[error("graph does not contain the edge 2-3")]
    MissingEdge23,
    #[error("label out of range: {0}")]
    BadLabelRange(String),
    #[error("n = {n} is outside the supported range 4..={max}")]
    BoundExceeded { n: usize, max: usize },
    #[error("cannot parse graph: {0}")]
    Parse(String),
}

/// A validated stability graph on vertices `2..=n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StabilityGraph {
    n: usize,
    /// `adj[v]` is the neighbourhood of label `v`; indices 0 and 1 are unused.
    adj: Vec<IndexSet>,
}

/// Vertex partition witnessing that a graph is complete multipartite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultipartitePartition {
    pub parts: Vec<IndexSet>,
}

impl MultipartitePartition {
    /// All pairs `{i,j}` (with `i < j`) lying in different parts.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, p) in self.parts.iter().enumerate() {
            for q in &self.parts[a + 1..] {
                for i in p.iter() {
                    for j in q.iter() {
                        out.push((i.min(j), i.max(j)));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Validates a stability graph on `2..=n`.
pub fn validate_graph(n: usize, edges: &[(usize, usize)]) -> Result<StabilityGraph, GraphError> {
    if !(4..=MAX_LABEL).contains(&n) {
        return Err(GraphError::BadLabelRange(format!(
            "n = {n} must lie in 4..={MAX_LABEL}"
        )));
    }
    let mut adj = vec![IndexSet::EMPTY; n + 1];
    for &(i, j) in edges {
        for v in [i, j] {
            if !(2..=n).contains(&v) {
                return Err(GraphError::BadLabelRange(format!(
                    "vertex {v} in edge {i}-{j} is not in 2..={n}"
                )));
            }
        }
        if i == j {
            return Err(GraphError::NotSimple(format!("loop at {i}")));
        }
        if adj[i].contains(j) {
            return Err(GraphError::NotSimple(format!("repeated edge {}-{}", i.min(j), i.max(j))));
        }
        adj[i].insert(j);
        adj[j].insert(i);
    }
    if !adj[2].contains(3) {
        return Err(GraphError::MissingEdge23);
    }
    let g = StabilityGraph { n, adj };
    if !g.is_connected() {
        return Err(GraphError::NotConnected(n));
    }
    Ok(g)
}

impl StabilityGraph {
    /// The complete graph `K_{n-1}` on `2..=n`.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for i in 2..=n {
            for j in i + 1..=n {
                edges.push((i, j));
            }
        }
        validate_graph(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The vertex set `{2,...,n}`.
    pub fn vertex_set(&self) -> IndexSet {
        IndexSet::range(2, self.n)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i <= self.n && j <= self.n && self.adj[i].contains(j)
    }

    pub fn neighbors(&self, v: usize) -> IndexSet {
        self.adj[v]
    }

    /// Edges `(i,j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 2..=self.n {
            for j in self.adj[i].iter().filter(|&j| j > i) {
                out.push((i, j));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// `N`: the number of edges removed from `K_{n-1}` to obtain this graph.
    pub fn removed_edge_count(&self) -> usize {
        let m = self.n - 1;
        m * (m - 1) / 2 - self.edge_count()
    }

    /// Whether the induced subgraph on `set` has at least one edge.
    pub fn spans_edge(&self, set: IndexSet) -> bool {
        set.iter()
            .filter(|&v| (2..=self.n).contains(&v))
            .any(|v| !self.adj[v].intersection(set).is_empty())
    }

    /// Edges of the induced subgraph on `set`.
    pub fn edges_within(&self, set: IndexSet) -> Vec<(usize, usize)> {
        self.edges()
            .into_iter()
            .filter(|&(i, j)| set.contains(i) && set.contains(j))
            .collect()
    }

    fn is_connected(&self) -> bool {
        let all = self.vertex_set();
        let mut seen = IndexSet::singleton(2);
        let mut frontier = seen;
        while !frontier.is_empty() {
            let mut next = IndexSet::EMPTY;
            for v in frontier.iter() {
                next = next.union(self.adj[v]);
            }
            frontier = next.difference(seen);
            seen = seen.union(next);
        }
        seen == all
    }

    /// The parts of a complete multipartite structure, if one exists: the
    /// connected components of the complement, each of which must be a clique.
    pub fn is_complete_multipartite(&self) -> Option<MultipartitePartition> {
        complement_clique_partition(self.vertex_set(), |i, j| self.has_edge(i, j))
            .map(|parts| MultipartitePartition { parts })
    }

    /// A triple `(i, j, k)` whose induced subgraph has exactly one edge,
    /// namely `{i, j}` (with `i < j`). Triples are scanned in lexicographic
    /// order of their sorted labels.
    pub fn multipartite_witness(&self) -> Option<(usize, usize, usize)> {
        single_edge_triple(self.vertex_set(), |i, j| self.has_edge(i, j))
    }

    /// True iff for every edge `{i,j}` and every other vertex `k`, one of
    /// `{i,k}`, `{j,k}` is an edge.
    pub fn neighbor_cover_check(&self) -> bool {
        self.edges().into_iter().all(|(i, j)| {
            self.vertex_set()
                .iter()
                .filter(|&k| k != i && k != j)
                .all(|k| self.has_edge(i, k) || self.has_edge(j, k))
        })
    }

    /// Canonical text form `n=<n>;edges=<i>-<j>,...`.
    pub fn to_spec_string(&self) -> String {
        self.to_string()
    }
}

/// Components of the complement graph on `vertices`, provided each is a clique
/// in the complement (i.e. an independent set of the graph). Parts are ordered
/// by their smallest element.
pub fn complement_clique_partition(
    vertices: IndexSet,
    has_edge: impl Fn(usize, usize) -> bool,
) -> Option<Vec<IndexSet>> {
    let mut remaining = vertices;
    let mut parts = Vec::new();
    while let Some(start) = remaining.min() {
        let mut comp = IndexSet::singleton(start);
        let mut frontier = comp;
        while !frontier.is_empty() {
            let mut next = IndexSet::EMPTY;
            for v in frontier.iter() {
                for w in remaining.iter() {
                    if w != v && !has_edge(v, w) {
                        next.insert(w);
                    }
                }
            }
            frontier = next.difference(comp);
            comp = comp.union(next);
        }
        let elems = comp.to_vec();
        for (a, &i) in elems.iter().enumerate() {
            for &j in &elems[a + 1..] {
                if has_edge(i, j) {
                    return None;
                }
            }
        }
        remaining = remaining.difference(comp);
        parts.push(comp);
    }
    Some(parts)
}

/// First vertex triple inducing exactly one edge, reported edge-first.
pub fn single_edge_triple(
    vertices: IndexSet,
    has_edge: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize, usize)> {
    for t in vertices.subsets_of_size(3) {
        let v = t.to_vec();
        let (a, b, c) = (v[0], v[1], v[2]);
        let e = [(a, b, c), (a, c, b), (b, c, a)];
        let present: Vec<_> = e.iter().filter(|(i, j, _)| has_edge(*i, *j)).collect();
        if present.len() == 1 {
            return Some(*present[0]);
        }
    }
    None
}

/// Every simple connected graph on `2..=n` containing `{2,3}`, each once, in
/// increasing order of the bitmask over the remaining pairs.
pub fn enumerate_stability_graphs(
    n: usize,
) -> Result<impl Iterator<Item = StabilityGraph>, GraphError> {
    if !(4..=ENUMERATION_BOUND).contains(&n) {
        return Err(GraphError::BoundExceeded { n, max: ENUMERATION_BOUND });
    }
    let free: Vec<(usize, usize)> = (2..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .filter(|&p| p != (2, 3))
        .collect();
    let total: u64 = 1 << free.len();
    Ok((0..total).filter_map(move |mask| {
        let mut edges = vec![(2, 3)];
        edges.extend(
            free.iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &p)| p),
        );
        validate_graph(n, &edges).ok()
    }))
}

impl fmt::Display for StabilityGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={};edges=", self.n)?;
        let e: Vec<String> = self.edges().iter().map(|(i, j)| format!("{i}-{j}")).collect();
        write!(f, "{}", e.join(","))
    }
}

impl fmt::Debug for StabilityGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StabilityGraph({self})")
    }
}

impl FromStr for StabilityGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| GraphError::Parse(format!("{m} in {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut n = None;
        let mut edges = None;
        for field in compact.split(';').filter(|f| !f.is_empty()) {
            let (key, value) = field.split_once('=').ok_or_else(|| bad("missing '='"))?;
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad("bad n"))?),
                "edges" => {
                    let mut list = Vec::new();
                    for e in value.split(',').filter(|e| !e.is_empty()) {
                        let (i, j) = e.split_once('-').ok_or_else(|| bad("edge without '-'"))?;
                        let i = i.parse::<usize>().map_err(|_| bad("bad edge label"))?;
                        let j = j.parse::<usize>().map_err(|_| bad("bad edge label"))?;
                        list.push((i, j));
                    }
                    edges = Some(list);
                }
                _ => return Err(bad("unknown key")),
            }
        }
        let n = n.ok_or_else(|| bad("missing n"))?;
        let edges = edges.ok_or_else(|| bad("missing edges"))?;
        validate_graph(n, &edges)
    }
}
