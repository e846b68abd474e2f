//! Dual graphs of stable marked rational curves.
//!
//! A boundary stratum is stored as a [`NestedFamily`]: one index set per node,
//! namely the markings cut off from marking 1 by that node. [`MarkedTree`] is
//! the equivalent explicit tree and is derived on demand.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::StabilityGraph;
use crate::sets::{IndexSet, MAX_LABEL};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("invalid nested family: {0}")]
    InvalidFamily(String),
    #[error("invalid marked tree: {0}")]
    InvalidTree(String),
    #[error("tree is not stable for the given stability graph")]
    UnstableTree,
    #[error("edge lengths must be positive")]
    NonPositiveLength,
    #[error("distances do not come from a metric tree")]
    NotTreeMetric,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Pairwise nested-or-disjoint index sets, sorted canonically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NestedFamily {
    n: usize,
    sets: Vec<IndexSet>,
}

impl NestedFamily {
    pub fn new(n: usize, mut sets: Vec<IndexSet>) -> Result<Self, TreeError> {
        let bad = |m: String| Err(TreeError::InvalidFamily(m));
        if !(3..=MAX_LABEL).contains(&n) {
            return bad(format!("n = {n} out of range"));
        }
        let ground = IndexSet::range(2, n);
        sets.sort();
        for (k, &s) in sets.iter().enumerate() {
            if !s.is_subset(ground) {
                return bad(format!("{s} is not a subset of {{2..{n}}}"));
            }
            if s.len() < 2 || s.len() > n - 2 {
                return bad(format!("{s} must have between 2 and {} elements", n - 2));
            }
            if k > 0 && sets[k - 1] == s {
                return bad(format!("{s} repeated"));
            }
            if let Some(t) = sets[..k].iter().find(|t| !t.is_compatible(s)) {
                return bad(format!("{t} and {s} are neither nested nor disjoint"));
            }
        }
        if sets.len() > n.saturating_sub(3) {
            return bad(format!("{} members exceed n-3 = {}", sets.len(), n - 3));
        }
        Ok(NestedFamily { n, sets })
    }

    pub fn empty(n: usize) -> Self {
        NestedFamily { n, sets: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, set: IndexSet) -> bool {
        self.sets.binary_search(&set).is_ok()
    }

    /// Members containing no other member.
    pub fn minimal_members(&self) -> Vec<IndexSet> {
        self.sets
            .iter()
            .copied()
            .filter(|&s| !self.sets.iter().any(|&t| t != s && t.is_subset(s)))
            .collect()
    }

    /// Every minimal member spans an edge of `g`. Non-minimal members then
    /// span one too.
    pub fn is_gamma_stable(&self, g: &StabilityGraph) -> bool {
        self.minimal_members().into_iter().all(|s| g.spans_edge(s))
    }

    /// Members spanning an edge of `g`; this is the family of the stabilized curve.
    pub fn gamma_stable_part(&self, g: &StabilityGraph) -> NestedFamily {
        NestedFamily {
            n: self.n,
            sets: self.sets.iter().copied().filter(|&s| g.spans_edge(s)).collect(),
        }
    }

    pub fn without(&self, set: IndexSet) -> NestedFamily {
        NestedFamily { n: self.n, sets: self.sets.iter().copied().filter(|&s| s != set).collect() }
    }

    pub fn intersection(&self, other: &NestedFamily) -> NestedFamily {
        NestedFamily {
            n: self.n,
            sets: self.sets.iter().copied().filter(|&s| other.contains(s)).collect(),
        }
    }

    pub fn is_subfamily_of(&self, other: &NestedFamily) -> bool {
        self.sets.iter().all(|&s| other.contains(s))
    }

    /// Parses `{3,4};{3,4,5}`; the empty string is the empty family.
    pub fn parse(n: usize, s: &str) -> Result<Self, TreeError> {
        let mut sets = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            sets.push(part.parse::<IndexSet>().map_err(|e| TreeError::Parse(e.to_string()))?);
        }
        NestedFamily::new(n, sets)
    }
}

impl fmt::Display for NestedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sets.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl fmt::Debug for NestedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl Serialize for NestedFamily {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.sets.serialize(serializer)
    }
}

/// A stable tree with legs labelled `1..=n`. The root is the vertex carrying leg 1.
#[derive(Clone, PartialEq, Eq)]
pub struct MarkedTree {
    n: usize,
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    /// `legs[m]` is the vertex carrying marking `m`; `legs[0]` is unused.
    legs: Vec<usize>,
}

impl fmt::Debug for MarkedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkedTree")
            .field("vertices", &self.vertex_count)
            .field("edges", &self.edges)
            .field("legs", &&self.legs[1..])
            .finish()
    }
}

impl MarkedTree {
    /// `legs[m-1]` is the vertex of marking `m`.
    pub fn new(
        n: usize,
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        legs: &[usize],
    ) -> Result<Self, TreeError> {
        let bad = |m: String| Err(TreeError::InvalidTree(m));
        if legs.len() != n || !(3..=MAX_LABEL).contains(&n) {
            return bad(format!("expected {n} legs, got {}", legs.len()));
        }
        if vertex_count == 0 || edges.len() + 1 != vertex_count {
            return bad("a tree needs |E| = |V| - 1".into());
        }
        if let Some(&v) = legs.iter().chain(edges.iter().flat_map(|(a, b)| [a, b])).find(|&&v| v >= vertex_count) {
            return bad(format!("vertex {v} out of range"));
        }
        let mut full = vec![0];
        full.extend_from_slice(legs);
        let t = MarkedTree { n, vertex_count, edges, legs: full };
        let adj = t.adjacency();
        for (a, b) in &t.edges {
            if a == b {
                return bad(format!("loop at vertex {a}"));
            }
        }
        let mut seen = vec![false; vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("not connected".into());
        }
        for v in 0..vertex_count {
            if t.valence(v) < 3 {
                return bad(format!("vertex {v} has valence {} < 3", t.valence(v)));
            }
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn leg_vertex(&self, marking: usize) -> usize {
        self.legs[marking]
    }

    pub fn root(&self) -> usize {
        self.legs[1]
    }

    /// Markings attached to `v`.
    pub fn legs_at(&self, v: usize) -> IndexSet {
        IndexSet::from_labels((1..=self.n).filter(|&m| self.legs[m] == v))
    }

    pub fn bounded_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.bounded_degree(v) + self.legs_at(v).len()
    }

    /// `adj[v]` lists `(neighbour, edge index)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, k));
            adj[b].push((a, k));
        }
        adj
    }

    /// For each edge, the endpoint farther from the root.
    fn child_endpoints(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut parent_edge = vec![usize::MAX; self.vertex_count];
        let mut child = vec![0; self.edges.len()];
        let mut stack = vec![self.root()];
        let mut seen = vec![false; self.vertex_count];
        seen[self.root()] = true;
        while let Some(v) = stack.pop() {
            for &(w, k) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent_edge[w] = k;
                    child[k] = w;
                    stack.push(w);
                }
            }
        }
        child
    }

    /// Vertices on the non-root side of `edge`.
    fn tail_vertices(&self, edge: usize) -> Vec<bool> {
        let child = self.child_endpoints()[edge];
        let adj = self.adjacency();
        let mut inside = vec![false; self.vertex_count];
        inside[child] = true;
        let mut stack = vec![child];
        while let Some(v) = stack.pop() {
            for &(w, k) in &adj[v] {
                if k != edge && !inside[w] {
                    inside[w] = true;
                    stack.push(w);
                }
            }
        }
        inside
    }

    /// Markings on the non-root side of each edge, in edge order.
    pub fn edge_cuts(&self) -> Vec<IndexSet> {
        (0..self.edges.len())
            .map(|k| {
                let inside = self.tail_vertices(k);
                IndexSet::from_labels((1..=self.n).filter(|&m| inside[self.legs[m]]))
            })
            .collect()
    }

    /// Contracts the tail cut off by `edge` onto the root-side endpoint; its
    /// legs move to that endpoint.
    pub fn contract_tail(&self, edge: usize) -> MarkedTree {
        let inside = self.tail_vertices(edge);
        let (a, b) = self.edges[edge];
        let attach = if inside[a] { b } else { a };
        let mut new_index = vec![usize::MAX; self.vertex_count];
        let mut count = 0;
        for v in 0..self.vertex_count {
            if !inside[v] {
                new_index[v] = count;
                count += 1;
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|(a, b)| !inside[*a] && !inside[*b])
            .map(|&(a, b)| (new_index[a], new_index[b]))
            .collect();
        let legs = (0..=self.n)
            .map(|m| {
                if m == 0 {
                    0
                } else if inside[self.legs[m]] {
                    new_index[attach]
                } else {
                    new_index[self.legs[m]]
                }
            })
            .collect();
        MarkedTree { n: self.n, vertex_count: count, edges, legs }
    }

    /// Serializable form; `lengths` are written as exact `p/q` strings.
    pub fn to_json(&self, lengths: Option<&[Rational]>) -> TreeJson {
        TreeJson {
            n: self.n,
            vertices: self.vertex_count,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            legs: (1..=self.n).map(|m| (m.to_string(), self.legs[m])).collect(),
            lengths: lengths.map(|ls| ls.iter().map(|q| q.to_string()).collect()),
        }
    }
}

/// Tree JSON: `{"n":5,"vertices":2,"edges":[[0,1]],"legs":{"1":0,...},"lengths":["3/2"]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub n: usize,
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub legs: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<String>>,
}

impl TreeJson {
    pub fn into_tree(self) -> Result<(MarkedTree, Option<Vec<Rational>>), TreeError> {
        let mut legs = vec![usize::MAX; self.n];
        for (k, v) in &self.legs {
            let m: usize = k.parse().map_err(|_| TreeError::Parse(format!("leg key {k:?}")))?;
            if !(1..=self.n).contains(&m) {
                return Err(TreeError::Parse(format!("leg {m} out of range")));
            }
            legs[m - 1] = *v;
        }
        let tree = MarkedTree::new(
            self.n,
            self.vertices,
            self.edges.iter().map(|e| (e[0], e[1])).collect(),
            &legs,
        )?;
        let lengths = match self.lengths {
            None => None,
            Some(ls) => Some(
                ls.iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        Ok((tree, lengths))
    }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<Rational, TreeError> {
    s.trim().parse::<Rational>().map_err(|_| TreeError::Parse(format!("rational {s:?}")))
}

/// The unique stable tree whose edge cuts are the members of `family`.
/// Vertex 0 is the root; vertex `k+1` sits below edge `k`, which carries the
/// `k`-th member.
pub fn tree_from_nested_family(family: &NestedFamily) -> MarkedTree {
    let sets = family.sets();
    let n = family.n();
    let smallest_above = |s: IndexSet| -> usize {
        sets.iter()
            .enumerate()
            .filter(|(_, &t)| t != s && s.is_subset(t))
            .min_by_key(|(_, t)| t.len())
            .map_or(0, |(k, _)| k + 1)
    };
    let edges = sets.iter().enumerate().map(|(k, &s)| (smallest_above(s), k + 1)).collect();
    let legs = (0..=n)
        .map(|m| {
            if m <= 1 {
                0
            } else {
                sets.iter()
                    .enumerate()
                    .filter(|(_, t)| t.contains(m))
                    .min_by_key(|(_, t)| t.len())
                    .map_or(0, |(k, _)| k + 1)
            }
        })
        .collect();
    MarkedTree { n, vertex_count: sets.len() + 1, edges, legs }
}

/// One index set per bounded edge: the markings not on the side of leg 1.
pub fn nested_family_from_tree(tree: &MarkedTree) -> NestedFamily {
    NestedFamily::new(tree.n(), tree.edge_cuts())
        .expect("edge cuts of a stable tree form a nested family")
}

/// Every non-root vertex with exactly one bounded edge carries two markings
/// joined by an edge of `g`.
pub fn is_gamma_stable_tree(tree: &MarkedTree, g: &StabilityGraph) -> bool {
    (0..tree.vertex_count())
        .filter(|&v| v != tree.root() && tree.bounded_degree(v) == 1)
        .all(|v| g.spans_edge(tree.legs_at(v)))
}

/// Tails not containing marking 1 whose markings span no edge of `g`,
/// reported by their marking sets.
pub fn extremal_assignment(tree: &MarkedTree, g: &StabilityGraph) -> Vec<IndexSet> {
    let mut out: Vec<IndexSet> = tree.edge_cuts().into_iter().filter(|&s| !g.spans_edge(s)).collect();
    out.sort();
    out
}

/// Contracts every maximal tail in the extremal assignment.
pub fn stabilize(tree: &MarkedTree, g: &StabilityGraph) -> MarkedTree {
    let mut t = tree.clone();
    loop {
        let cuts = t.edge_cuts();
        let assigned: Vec<usize> = (0..cuts.len()).filter(|&k| !g.spans_edge(cuts[k])).collect();
        let maximal = assigned
            .iter()
            .copied()
            .find(|&k| !assigned.iter().any(|&j| j != k && cuts[k].is_subset(cuts[j])));
        match maximal {
            Some(k) => t = t.contract_tail(k),
            None => return t,
        }
    }
}

/// A stable tree with positive rational lengths on its bounded edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricTree {
    tree: MarkedTree,
    lengths: Vec<Rational>,
}

impl MetricTree {
    pub fn new(tree: MarkedTree, lengths: Vec<Rational>) -> Result<Self, TreeError> {
        if lengths.len() != tree.edges().len() {
            return Err(TreeError::InvalidTree(format!(
                "{} lengths for {} edges",
                lengths.len(),
                tree.edges().len()
            )));
        }
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(TreeError::NonPositiveLength);
        }
        Ok(MetricTree { tree, lengths })
    }

    /// Metric tree on the combinatorial type of `family`; `lengths` follow
    /// the family's member order.
    pub fn from_family(family: &NestedFamily, lengths: Vec<Rational>) -> Result<Self, TreeError> {
        MetricTree::new(tree_from_nested_family(family), lengths)
    }

    pub fn tree(&self) -> &MarkedTree {
        &self.tree
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    /// Members of the combinatorial type paired with their edge lengths.
    pub fn weighted_cuts(&self) -> Vec<(IndexSet, Rational)> {
        let mut out: Vec<_> = self.tree.edge_cuts().into_iter().zip(self.lengths.iter().cloned()).collect();
        out.sort_by_key(|a| a.0);
        out
    }

    /// Contracts the assigned tails, keeping the lengths of surviving edges.
    pub fn stabilize(&self, g: &StabilityGraph) -> MetricTree {
        let kept: Vec<(IndexSet, Rational)> =
            self.weighted_cuts().into_iter().filter(|(s, _)| g.spans_edge(*s)).collect();
        let family = NestedFamily::new(self.tree.n(), kept.iter().map(|(s, _)| *s).collect())
            .expect("subfamily of a nested family");
        MetricTree::from_family(&family, kept.into_iter().map(|(_, l)| l).collect())
            .expect("lengths stay positive")
    }

    /// Reconstructs the metric tree from leg distances, up to the leg-length
    /// ambiguity. Each internal split's length is its isolation index.
    pub fn from_distances(d: &DistanceVector) -> Result<MetricTree, TreeError> {
        let n = d.n();
        let two = Rational::from_integer(2.into());
        let mut cuts = Vec::new();
        let mut lengths = Vec::new();
        let ground = IndexSet::range(2, n);
        for size in 2..=n - 2 {
            for inside in ground.subsets_of_size(size) {
                let outside = IndexSet::range(1, n).difference(inside);
                let mut best: Option<Rational> = None;
                for a in inside.iter() {
                    for a2 in inside.iter().filter(|&x| x > a) {
                        for b in outside.iter() {
                            for b2 in outside.iter().filter(|&x| x > b) {
                                let s1 = d.get(a, b) + d.get(a2, b2);
                                let s2 = d.get(a, b2) + d.get(a2, b);
                                let m = if s1 > s2 { s1 } else { s2 };
                                let val = (m - d.get(a, a2) - d.get(b, b2)) / &two;
                                if best.as_ref().is_none_or(|bv| val < *bv) {
                                    best = Some(val);
                                }
                            }
                        }
                    }
                }
                let best = best.expect("both sides have two elements");
                if best.is_positive() {
                    cuts.push(inside);
                    lengths.push(best);
                }
            }
        }
        let mut paired: Vec<_> = cuts.into_iter().zip(lengths).collect();
        paired.sort_by_key(|a| a.0);
        let family = NestedFamily::new(n, paired.iter().map(|p| p.0).collect())
            .map_err(|_| TreeError::NotTreeMetric)?;
        let tree = MetricTree::from_family(&family, paired.into_iter().map(|p| p.1).collect())?;
        if !distance_vector(&tree).equivalent(d) {
            return Err(TreeError::NotTreeMetric);
        }
        Ok(tree)
    }
}

/// Leg-to-leg distances `dist(i,j)` for `1 <= i < j <= n`, lexicographic.
/// Two vectors are identified when they differ by `(x_i + x_j)_{i<j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceVector {
    n: usize,
    entries: Vec<Rational>,
}

impl DistanceVector {
    pub fn new(n: usize, entries: Vec<Rational>) -> Self {
        assert_eq!(entries.len(), n * (n - 1) / 2);
        DistanceVector { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        // pairs (1,2),(1,3),...,(1,n),(2,3),...
        (i - 1) * (2 * self.n - i) / 2 + (j - i - 1)
    }

    /// `dist(i,j)`; zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Rational {
        if i == j {
            Rational::zero()
        } else {
            self.entries[self.index(i, j)].clone()
        }
    }

    pub fn scale(&self, c: &Rational) -> DistanceVector {
        DistanceVector { n: self.n, entries: self.entries.iter().map(|e| e * c).collect() }
    }

    /// Equality modulo the image of `x -> (x_i + x_j)_{i<j}`.
    pub fn equivalent(&self, other: &DistanceVector) -> bool {
        if self.n != other.n {
            return false;
        }
        let n = self.n;
        let delta = |i, j| self.get(i, j) - other.get(i, j);
        let two = Rational::from_integer(2.into());
        let x1 = (delta(1, 2) + delta(1, 3) - delta(2, 3)) / two;
        let x: Vec<Rational> = (0..=n)
            .map(|i| match i {
                0 => Rational::zero(),
                1 => x1.clone(),
                _ => delta(1, i) - &x1,
            })
            .collect();
        (1..=n).all(|i| (i + 1..=n).all(|j| delta(i, j) == &x[i] + &x[j]))
    }

    /// Four-point condition: for distinct `i,j,k,l` the two largest of the three
    /// pair sums agree.
    pub fn satisfies_four_point(&self) -> bool {
        let n = self.n;
        for q in IndexSet::range(1, n).subsets_of_size(4) {
            let v = q.to_vec();
            let (i, j, k, l) = (v[0], v[1], v[2], v[3]);
            let mut s = [
                self.get(i, j) + self.get(k, l),
                self.get(i, k) + self.get(j, l),
                self.get(i, l) + self.get(j, k),
            ];
            s.sort();
            if s[1] != s[2] {
                return false;
            }
        }
        true
    }
}

/// Pairwise leg distances through the tree.
pub fn distance_vector(m: &MetricTree) -> DistanceVector {
    let t = m.tree();
    let n = t.n();
    let adj = t.adjacency();
    let mut from = Vec::with_capacity(t.vertex_count());
    for s in 0..t.vertex_count() {
        let mut dist: Vec<Option<Rational>> = vec![None; t.vertex_count()];
        dist[s] = Some(Rational::zero());
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            let dv = dist[v].clone().unwrap();
            for &(w, k) in &adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(&dv + &m.lengths()[k]);
                    stack.push(w);
                }
            }
        }
        from.push(dist.into_iter().map(Option::unwrap).collect::<Vec<_>>());
    }
    let mut entries = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            entries.push(from[t.leg_vertex(i)][t.leg_vertex(j)].clone());
        }
    }
    DistanceVector { n, entries }
}

/// Unit length on every edge.
pub fn unit_lengths(count: usize) -> Vec<Rational> {
    vec![Rational::one(); count]
}
