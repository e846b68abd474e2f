//! The divisorial valuation map into the cocharacter lattice of the torus
//! with coordinates `x_ij / x_23`.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::complex::enumerate_divisors;
use crate::graphs::StabilityGraph;
use crate::sets::IndexSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("pair {0}-{1} is not a coordinate of the frame")]
    PairNotInFrame(usize, usize),
    #[error("{0} is not a divisor of the stability graph")]
    UnstableDivisor(IndexSet),
}

/// The coordinates `x_ij / x_23`: Γ-edges other than `{2,3}`, lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoordinateFrame {
    pairs: Vec<(usize, usize)>,
}

impl CoordinateFrame {
    pub fn for_graph(g: &StabilityGraph) -> Self {
        CoordinateFrame { pairs: g.edges().into_iter().filter(|&p| p != (2, 3)).collect() }
    }

    /// Frame of the complete graph `K_{n-1}`.
    pub fn complete(n: usize) -> Self {
        let pairs = (2..=n)
            .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
            .filter(|&p| p != (2, 3))
            .collect();
        CoordinateFrame { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let p = (i.min(j), i.max(j));
        self.pairs.iter().position(|&q| q == p)
    }

    /// Column headers such as `x24`.
    pub fn labels(&self) -> Vec<String> {
        self.pairs.iter().map(|(i, j)| format!("x{i}{j}")).collect()
    }
}

/// An integer vector in frame coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn zero(dim: usize) -> Self {
        LatticeVector(vec![0; dim])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Order of vanishing of `x_ij / x_23` along `D_I`.
///
/// `+1` if `{2,3} ⊄ I` and `{i,j} ⊆ I`; `-1` if `{2,3} ⊆ I` and `{i,j} ⊄ I`;
/// `0` otherwise. Here `⊄` means "not both elements contained".
pub fn ord(set: IndexSet, pair: (usize, usize), g: &StabilityGraph) -> Result<i64, ValuationError> {
    let (i, j) = (pair.0.min(pair.1), pair.0.max(pair.1));
    if (i, j) == (2, 3) || !g.has_edge(i, j) {
        return Err(ValuationError::PairNotInFrame(i, j));
    }
    Ok(ord_unchecked(set, (i, j)))
}

fn ord_unchecked(set: IndexSet, (i, j): (usize, usize)) -> i64 {
    let has23 = set.contains(2) && set.contains(3);
    let hasij = set.contains(i) && set.contains(j);
    match (has23, hasij) {
        (false, true) => 1,
        (true, false) => -1,
        _ => 0,
    }
}

/// `π_Γ(D_I)`, the valuation vector of a Γ-stable divisor.
pub fn pi_gamma(set: IndexSet, g: &StabilityGraph) -> Result<LatticeVector, ValuationError> {
    let n = g.n();
    if !set.is_subset(IndexSet::range(2, n)) || set.len() < 2 || set.len() > n - 2 || !g.spans_edge(set) {
        return Err(ValuationError::UnstableDivisor(set));
    }
    let frame = CoordinateFrame::for_graph(g);
    Ok(LatticeVector(frame.pairs().iter().map(|&p| ord_unchecked(set, p)).collect()))
}

/// Valuation vector over the `K_{n-1}` frame for any index set.
pub fn pi_complete(set: IndexSet, n: usize) -> LatticeVector {
    let frame = CoordinateFrame::complete(n);
    LatticeVector(frame.pairs().iter().map(|&p| ord_unchecked(set, p)).collect())
}

/// How to read the summation subscripts of the set-sum formula for sets
/// containing `{2,3}`: `-Σ e_ij` over pairs that are `NotContained` in `I`,
/// or over pairs with `BothOutside` I.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumReading {
    NotContained,
    BothOutside,
}

/// The valuation vector via the set-sum formula, under the given reading.
pub fn pi_gamma_by_sum(set: IndexSet, g: &StabilityGraph, reading: SumReading) -> LatticeVector {
    let frame = CoordinateFrame::for_graph(g);
    let has23 = set.contains(2) && set.contains(3);
    let coords = frame
        .pairs()
        .iter()
        .map(|&(i, j)| {
            let inside = set.contains(i) && set.contains(j);
            if !has23 {
                i64::from(inside)
            } else {
                let counted = match reading {
                    SumReading::NotContained => !inside,
                    SumReading::BothOutside => !set.contains(i) && !set.contains(j),
                };
                -i64::from(counted)
            }
        })
        .collect();
    LatticeVector(coords)
}

/// Whether `π_Γ(I)` equals the sum of `π_Γ({i,j})` over Γ-edges `{i,j} ⊆ I`.
pub fn decompose_check(set: IndexSet, g: &StabilityGraph) -> bool {
    let Ok(v) = pi_gamma(set, g) else {
        return false;
    };
    let dim = v.0.len();
    let sum = g
        .edges_within(set)
        .into_iter()
        .map(|(i, j)| pi_gamma(IndexSet::from_labels([i, j]), g).expect("an edge is a divisor"))
        .fold(LatticeVector::zero(dim), |acc, w| acc.add(&w));
    sum == v
}

/// Forgets the `K_{n-1}` coordinates whose pair is not an edge of `g`.
pub fn proj_gamma(v: &LatticeVector, g: &StabilityGraph) -> LatticeVector {
    let full = CoordinateFrame::complete(g.n());
    assert_eq!(v.0.len(), full.dim(), "vector is not in the K_(n-1) frame");
    LatticeVector(
        full.pairs()
            .iter()
            .zip(&v.0)
            .filter(|((i, j), _)| g.has_edge(*i, *j))
            .map(|(_, &c)| c)
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub vector: LatticeVector,
    pub divisors: Vec<IndexSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InjectivityReport {
    pub injective: bool,
    pub collisions: Vec<Collision>,
}

/// Groups divisors by their valuation vector; groups of size > 1 are collisions.
pub fn injectivity_report(g: &StabilityGraph) -> InjectivityReport {
    let mut groups: BTreeMap<LatticeVector, Vec<IndexSet>> = BTreeMap::new();
    let mut order = Vec::new();
    for d in enumerate_divisors(g) {
        let v = pi_gamma(d, g).expect("enumerated divisors are stable");
        let entry = groups.entry(v.clone()).or_default();
        if entry.is_empty() {
            order.push(v);
        }
        entry.push(d);
    }
    let collisions: Vec<Collision> = order
        .into_iter()
        .filter_map(|v| {
            let ds = groups.remove(&v).unwrap();
            (ds.len() > 1).then_some(Collision { vector: v, divisors: ds })
        })
        .collect();
    InjectivityReport { injective: collisions.is_empty(), collisions }
}

/// Divisor-by-coordinate valuation matrix.
pub struct ValuationMatrix {
    pub frame: CoordinateFrame,
    pub rows: Vec<(IndexSet, LatticeVector)>,
}

pub fn valuation_matrix(g: &StabilityGraph) -> ValuationMatrix {
    ValuationMatrix {
        frame: CoordinateFrame::for_graph(g),
        rows: enumerate_divisors(g)
            .into_iter()
            .map(|d| (d, pi_gamma(d, g).unwrap()))
            .collect(),
    }
}

impl ValuationMatrix {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("divisor");
        for l in self.frame.labels() {
            write!(s, "\t{l}").unwrap();
        }
        s.push('\n');
        for (d, v) in &self.rows {
            write!(s, "{d}").unwrap();
            for c in v.coords() {
                write!(s, "\t{c}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "columns": self.frame.labels(),
            "rows": self.rows.iter().map(|(d, v)| json!({"divisor": d, "vector": v})).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::validate_graph;

    fn set(s: &str) -> IndexSet {
        s.parse().unwrap()
    }

    fn gamma_tilde() -> StabilityGraph {
        validate_graph(5, &[(2, 3), (2, 4), (2, 5), (3, 4)]).unwrap()
    }

    fn k22() -> StabilityGraph {
        validate_graph(5, &[(2, 3), (2, 4), (3, 5), (4, 5)]).unwrap()
    }

    #[test]
    fn frames() {
        assert_eq!(CoordinateFrame::for_graph(&gamma_tilde()).labels(), ["x24", "x25", "x34"]);
        assert_eq!(CoordinateFrame::for_graph(&k22()).labels(), ["x24", "x35", "x45"]);
        // dim = C(n,2) - n - N
        let g = gamma_tilde();
        assert_eq!(CoordinateFrame::for_graph(&g).dim(), 10 - 5 - g.removed_edge_count());
    }

    #[test]
    fn ord_examples() {
        let g = gamma_tilde();
        assert_eq!(ord(set("{2,3}"), (2, 4), &g), Ok(-1));
        assert_eq!(ord(set("{2,3,4}"), (2, 5), &g), Ok(-1));
        assert_eq!(ord(set("{2,3,4}"), (2, 4), &g), Ok(0));
        assert_eq!(ord(set("{2,3,4}"), (3, 4), &g), Ok(0));
        assert_eq!(ord(set("{2,4,5}"), (4, 5), &k22()), Ok(1));
        assert_eq!(ord(set("{2,4}"), (4, 5), &g), Err(ValuationError::PairNotInFrame(4, 5)));
        assert_eq!(ord(set("{2,4}"), (2, 3), &g), Err(ValuationError::PairNotInFrame(2, 3)));
    }

    #[test]
    fn pi_gamma_examples() {
        assert_eq!(pi_gamma(set("{3,4,5}"), &gamma_tilde()).unwrap().0, [0, 0, 1]);
        assert_eq!(pi_gamma(set("{2,3,4}"), &k22()).unwrap().0, [0, -1, -1]);
        assert_eq!(pi_gamma(set("{3,4,5}"), &k22()).unwrap().0, [0, 1, 1]);
        assert_eq!(pi_gamma(set("{4,5}"), &gamma_tilde()), Err(ValuationError::UnstableDivisor(set("{4,5}"))));
        assert!(pi_gamma(set("{2,3,4,5}"), &gamma_tilde()).is_err());
    }

    #[test]
    fn only_not_contained_reading_matches_the_printed_vector() {
        let g = gamma_tilde();
        let printed = LatticeVector(vec![-1, -1, -1]);
        assert_eq!(pi_gamma_by_sum(set("{2,3}"), &g, SumReading::NotContained), printed);
        assert_ne!(pi_gamma_by_sum(set("{2,3}"), &g, SumReading::BothOutside), printed);
    }

    #[test]
    fn decomposition_examples() {
        assert!(decompose_check(set("{2,4,5}"), &gamma_tilde()));
        assert_eq!(pi_gamma(set("{2,4,5}"), &gamma_tilde()).unwrap().0, [1, 1, 0]);
        assert!(decompose_check(set("{2,3,5}"), &k22()));
        assert_eq!(pi_gamma(set("{2,3,5}"), &k22()).unwrap().0, [-1, 0, -1]);
    }

    #[test]
    fn projection_examples() {
        let g = gamma_tilde();
        let full = pi_complete(set("{2,4,5}"), 5);
        assert_eq!(full.0, [1, 1, 0, 0, 1]);
        assert_eq!(proj_gamma(&full, &g).0, [1, 1, 0]);
        let full = pi_complete(set("{3,4,5}"), 5);
        assert_eq!(full.0, [0, 0, 1, 1, 1]);
        assert_eq!(proj_gamma(&full, &g).0, [0, 0, 1]);
        let k = StabilityGraph::complete(6).unwrap();
        let v = pi_complete(set("{2,3,6}"), 6);
        assert_eq!(proj_gamma(&v, &k), v);
    }

    #[test]
    fn injectivity_examples() {
        let r = injectivity_report(&gamma_tilde());
        assert!(!r.injective);
        assert_eq!(r.collisions.len(), 1);
        assert_eq!(r.collisions[0].vector.0, [0, 0, 1]);
        assert_eq!(r.collisions[0].divisors, vec![set("{3,4}"), set("{3,4,5}")]);
        let r = injectivity_report(&k22());
        assert!(r.injective);
    }

    #[test]
    fn tsv_layout() {
        let tsv = valuation_matrix(&gamma_tilde()).to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], "divisor\tx24\tx25\tx34");
        assert_eq!(lines[1], "{2,3}\t-1\t-1\t-1");
        assert_eq!(lines.len(), 9);
    }
}
