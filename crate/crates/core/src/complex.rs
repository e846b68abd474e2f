//! Boundary divisors and the boundary complex of the graphically stable
//! compactification. Its cells are the Γ-stable nested families.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::graphs::StabilityGraph;
use crate::sets::IndexSet;
use crate::trees::NestedFamily;

/// Index sets `I ⊆ {2..n}` with `2 <= |I| <= n-2` spanning an edge of `g`,
/// ordered by size then lexicographically.
pub fn enumerate_divisors(g: &StabilityGraph) -> Vec<IndexSet> {
    all_index_sets(g.n()).into_iter().filter(|&s| g.spans_edge(s)).collect()
}

/// Every divisor index set of the Deligne–Mumford space, i.e. all
/// `I ⊆ {2..n}` with `2 <= |I| <= n-2`.
pub fn all_index_sets(n: usize) -> Vec<IndexSet> {
    let ground = IndexSet::range(2, n);
    (2..=n - 2).flat_map(|k| ground.subsets_of_size(k)).collect()
}

#[derive(Debug, Clone)]
pub struct BoundaryComplex {
    graph: StabilityGraph,
    divisors: Vec<IndexSet>,
    /// `cells[k]` holds the families with `k` members; `cells[0]` is the empty cell.
    cells: Vec<Vec<NestedFamily>>,
}

/// All Γ-stable nested families, generated by recursive descent over
/// pairwise compatible divisors.
pub fn enumerate_complex(g: &StabilityGraph) -> BoundaryComplex {
    let divisors = enumerate_divisors(g);
    let n = g.n();
    let mut cells = vec![Vec::new(); n - 2];
    let mut chosen = Vec::new();
    extend_cells(&divisors, 0, &mut chosen, &mut cells, n);
    for level in &mut cells {
        level.sort();
    }
    BoundaryComplex { graph: g.clone(), divisors, cells }
}

fn extend_cells(
    divisors: &[IndexSet],
    start: usize,
    chosen: &mut Vec<IndexSet>,
    cells: &mut Vec<Vec<NestedFamily>>,
    n: usize,
) {
    let family = NestedFamily::new(n, chosen.clone()).expect("compatible divisors form a nested family");
    cells[chosen.len()].push(family);
    if chosen.len() == n - 3 {
        return;
    }
    for k in start..divisors.len() {
        let d = divisors[k];
        if chosen.iter().all(|c| c.is_compatible(d)) {
            chosen.push(d);
            extend_cells(divisors, k + 1, chosen, cells, n);
            chosen.pop();
        }
    }
}

/// The divisors whose intersection is the stratum of `family`.
pub fn stratum_divisors(family: &NestedFamily) -> Vec<IndexSet> {
    family.sets().to_vec()
}

impl BoundaryComplex {
    pub fn graph(&self) -> &StabilityGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn divisors(&self) -> &[IndexSet] {
        &self.divisors
    }

    /// Cells with exactly `k` members.
    pub fn cells_of_size(&self, k: usize) -> &[NestedFamily] {
        self.cells.get(k).map_or(&[], |v| v.as_slice())
    }

    /// All cells, empty cell first, by size.
    pub fn cells(&self) -> impl Iterator<Item = &NestedFamily> {
        self.cells.iter().flatten()
    }

    /// Nonempty cells.
    pub fn nonempty_cells(&self) -> impl Iterator<Item = &NestedFamily> {
        self.cells.iter().skip(1).flatten()
    }

    /// Cell counts by size; index 0 is the empty cell.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.cells.iter().map(Vec::len).collect();
        while f.len() > 1 && f.last() == Some(&0) {
            f.pop();
        }
        f
    }

    pub fn contains_cell(&self, family: &NestedFamily) -> bool {
        self.cells
            .get(family.len())
            .is_some_and(|level| level.binary_search(family).is_ok())
    }

    /// Cells not contained in any larger cell.
    pub fn maximal_cells(&self) -> Vec<NestedFamily> {
        let mut out = Vec::new();
        for (k, level) in self.cells.iter().enumerate().skip(1) {
            for c in level {
                let extendable = self.cells.get(k + 1).is_some_and(|up| {
                    up.iter().any(|u| c.is_subfamily_of(u))
                });
                if !extendable {
                    out.push(c.clone());
                }
            }
        }
        out
    }

    /// Pairs of divisor indices forming one-cells.
    pub fn one_skeleton(&self) -> Vec<(usize, usize)> {
        let pos = |s: IndexSet| self.divisors.iter().position(|&d| d == s).unwrap();
        self.cells_of_size(2)
            .iter()
            .map(|c| {
                let (a, b) = (pos(c.sets()[0]), pos(c.sets()[1]));
                (a.min(b), a.max(b))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let mut cells = serde_json::Map::new();
        for (k, level) in self.cells.iter().enumerate().skip(1) {
            if !level.is_empty() {
                cells.insert(k.to_string(), serde_json::to_value(level).unwrap());
            }
        }
        json!({
            "n": self.n(),
            "graph": self.graph.to_string(),
            "divisors": self.divisors,
            "cells": cells,
            "f_vector": self.f_vector(),
        })
    }

    /// Graphviz rendering of the one-skeleton.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph boundary_complex {\n");
        for (k, d) in self.divisors.iter().enumerate() {
            writeln!(s, "  v{k} [label=\"{d}\"];").unwrap();
        }
        for (a, b) in self.one_skeleton() {
            writeln!(s, "  v{a} -- v{b};").unwrap();
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexSummary {
    pub divisors: usize,
    pub f_vector: Vec<usize>,
    pub maximal_cells: usize,
}

impl From<&BoundaryComplex> for ComplexSummary {
    fn from(c: &BoundaryComplex) -> Self {
        ComplexSummary {
            divisors: c.divisors().len(),
            f_vector: c.f_vector(),
            maximal_cells: c.maximal_cells().len(),
        }
    }
}
