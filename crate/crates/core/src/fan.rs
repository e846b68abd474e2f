//! The weighted fan `trop(M_{0,Γ})`, its balancing certificate, and the
//! comparison with the boundary complex.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::complex::{all_index_sets, enumerate_complex, BoundaryComplex};
use crate::cones::{extreme_generators, intersection_equals};
use crate::graphs::StabilityGraph;
use crate::lattice::{in_span, primitive, primitive_normal, rank, solve_in_basis, LatticeError};
use crate::trees::{MetricTree, NestedFamily};
use crate::valuation::{injectivity_report, pi_complete, pi_gamma, proj_gamma, CoordinateFrame};
use crate::Rational;
use num_traits::{Signed, Zero};

/// Largest `n` for which the face-compatibility check runs.
pub const FACE_CHECK_BOUND: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("fan is not pure-dimensional")]
    NotPure,
    #[error("n = {0} exceeds the face-compatibility bound {FACE_CHECK_BOUND}")]
    DimensionTooLarge(usize),
    #[error("metric tree is not stable for the stability graph")]
    UnstableTree,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Simplicial fan with weights on its maximal cones.
#[derive(Debug, Clone)]
pub struct WeightedFan {
    ambient_dim: usize,
    rays: Vec<Vec<i64>>,
    /// Sorted ray-index sets, ordered by size then lexicographically.
    cones: Vec<Vec<usize>>,
    weights: BTreeMap<usize, u64>,
    provenance: Vec<Vec<NestedFamily>>,
    /// Maximal cones that are the image of more than one maximal cell.
    merged: Vec<usize>,
    /// Cells whose image is not a cone of the fan.
    unplaced: Vec<NestedFamily>,
}

impl WeightedFan {
    /// Builds a fan from rays, maximal cones (as ray-index sets) and weights.
    /// All faces are added.
    pub fn from_maximal(ambient_dim: usize, rays: Vec<Vec<i64>>, maximal: Vec<(Vec<usize>, u64)>) -> Self {
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        for (c, _) in &maximal {
            let mut c = c.clone();
            c.sort_unstable();
            for mask in 1u64..(1 << c.len()) {
                all.insert(c.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &r)| r).collect());
            }
        }
        let mut cones: Vec<Vec<usize>> = all.into_iter().collect();
        cones.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut weights = BTreeMap::new();
        for (c, w) in maximal {
            let mut c = c;
            c.sort_unstable();
            let k = cones.iter().position(|x| *x == c).unwrap();
            weights.insert(k, w);
        }
        let provenance = vec![Vec::new(); cones.len()];
        WeightedFan { ambient_dim, rays, cones, weights, provenance, merged: Vec::new(), unplaced: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    /// Indices of cones carrying a weight.
    pub fn maximal_cones(&self) -> Vec<usize> {
        self.weights.keys().copied().collect()
    }

    pub fn weight(&self, cone: usize) -> Option<u64> {
        self.weights.get(&cone).copied()
    }

    pub fn set_weight(&mut self, cone: usize, w: u64) {
        assert!(self.weights.contains_key(&cone), "weights live on maximal cones");
        self.weights.insert(cone, w);
    }

    pub fn provenance(&self, cone: usize) -> &[NestedFamily] {
        &self.provenance[cone]
    }

    pub fn merged_cones(&self) -> &[usize] {
        &self.merged
    }

    pub fn unplaced_cells(&self) -> &[NestedFamily] {
        &self.unplaced
    }

    pub fn cone_rays(&self, cone: usize) -> Vec<Vec<i64>> {
        self.cones[cone].iter().map(|&r| self.rays[r].clone()).collect()
    }

    pub fn find_cone(&self, ray_set: &[usize]) -> Option<usize> {
        let mut s = ray_set.to_vec();
        s.sort_unstable();
        self.cones.iter().position(|c| *c == s)
    }

    pub fn ray_index(&self, v: &[i64]) -> Option<usize> {
        self.rays.iter().position(|r| r == v)
    }

    /// The cone whose relative interior contains `point`; `None` for the
    /// origin or a point outside the support.
    pub fn minimal_cone_containing(&self, point: &[Rational]) -> Option<usize> {
        if point.iter().all(Zero::is_zero) {
            return None;
        }
        (0..self.cones.len()).find(|&k| {
            solve_in_basis(point, &self.cone_rays(k)).is_some_and(|c| c.iter().all(Signed::is_positive))
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ambient_dim": self.ambient_dim,
            "rays": self.rays,
            "cones": self.cones,
            "maximal_cones": self.weights.iter().map(|(k, w)| json!({"cone": k, "weight": w})).collect::<Vec<_>>(),
            "provenance": self.provenance.iter().map(|p| p.iter().map(|f| f.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "merged_maximal_cones": self.merged,
            "unplaced_cells": self.unplaced.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        })
    }

    /// One ray per line, then one cone per line (weights on maximal cones).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rays {
            let e: Vec<String> = r.iter().map(i64::to_string).collect();
            writeln!(s, "ray {}", e.join(" ")).unwrap();
        }
        for (k, c) in self.cones.iter().enumerate() {
            let e: Vec<String> = c.iter().map(usize::to_string).collect();
            match self.weights.get(&k) {
                Some(w) => writeln!(s, "cone {} weight {w}", e.join(" ")).unwrap(),
                None => writeln!(s, "cone {}", e.join(" ")).unwrap(),
            }
        }
        s
    }
}

/// Rays are the distinct nonzero projections of the valuation vectors of all
/// divisors of the Deligne–Mumford space. Maximal cones are the
/// full-dimensional images of cells of the boundary complex, each of weight
/// one. A cell of the Deligne–Mumford complex has the same image as its
/// Γ-stable part, so cells of the Γ-complex suffice.
pub fn build_trop_fan(g: &StabilityGraph) -> WeightedFan {
    let complex = enumerate_complex(g);
    build_trop_fan_from(g, &complex)
}

pub fn build_trop_fan_from(g: &StabilityGraph, complex: &BoundaryComplex) -> WeightedFan {
    let n = g.n();
    let dim = CoordinateFrame::for_graph(g).dim();
    let mut rays: Vec<Vec<i64>> = Vec::new();
    for s in all_index_sets(n) {
        let v = proj_gamma(&pi_complete(s, n), g);
        if let Ok(p) = primitive(v.coords()) {
            if !rays.contains(&p) {
                rays.push(p);
            }
        }
    }
    let ray_of = |s| {
        let v = pi_gamma(s, g).expect("cells consist of divisors");
        let p = primitive(v.coords()).expect("divisor vectors are nonzero");
        rays.iter().position(|r| *r == p).unwrap()
    };

    let top = n - 3;
    let mut maximal: Vec<Vec<usize>> = Vec::new();
    let mut sources: Vec<usize> = Vec::new();
    for cell in complex.cells_of_size(top) {
        let mut idx: Vec<usize> = cell.sets().iter().map(|&s| ray_of(s)).collect();
        idx.sort_unstable();
        idx.dedup();
        let gens: Vec<Vec<i64>> = idx.iter().map(|&r| rays[r].clone()).collect();
        if idx.len() == top && rank(&gens) == top {
            match maximal.iter().position(|m| *m == idx) {
                Some(k) => sources[k] += 1,
                None => {
                    maximal.push(idx);
                    sources.push(1);
                }
            }
        }
    }
    let mut fan = WeightedFan::from_maximal(dim, rays, maximal.iter().map(|m| (m.clone(), 1)).collect());
    for (m, &count) in maximal.iter().zip(&sources) {
        if count > 1 {
            let k = fan.find_cone(m).unwrap();
            fan.merged.push(k);
        }
    }
    fan.merged.sort_unstable();

    for cell in complex.nonempty_cells() {
        let gens: Vec<Vec<i64>> = cell
            .sets()
            .iter()
            .map(|&s| pi_gamma(s, g).unwrap().0)
            .collect();
        let ext = extreme_generators(&gens, dim);
        let idx: Option<Vec<usize>> = ext
            .iter()
            .map(|v| primitive(v).ok().and_then(|p| fan.ray_index(&p)))
            .collect();
        match idx.and_then(|i| fan.find_cone(&i)) {
            Some(k) if rank(&ext) == ext.len() => fan.provenance[k].push(cell.clone()),
            _ => fan.unplaced.push(cell.clone()),
        }
    }
    fan
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalContribution {
    pub cone: usize,
    pub weight: u64,
    pub normal: Vec<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FacetBalance {
    /// Ray indices of the codimension-one cone (empty for the origin).
    pub tau: Vec<usize>,
    pub contributions: Vec<NormalContribution>,
    pub residual: Vec<i64>,
    pub balanced: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BalancingCertificate {
    pub balanced: bool,
    pub facets: Vec<FacetBalance>,
}

impl BalancingCertificate {
    pub fn failures(&self) -> impl Iterator<Item = &FacetBalance> {
        self.facets.iter().filter(|f| !f.balanced)
    }
}

/// Checks that around every codimension-one cone the weighted primitive
/// normals sum to a vector in the span of that cone.
pub fn check_balanced(fan: &WeightedFan) -> Result<BalancingCertificate, FanError> {
    let maximal = fan.maximal_cones();
    let Some(&first) = maximal.first() else {
        return Ok(BalancingCertificate { balanced: true, facets: Vec::new() });
    };
    let d = fan.cones[first].len();
    if maximal.iter().any(|&k| fan.cones[k].len() != d || rank(&fan.cone_rays(k)) != d) {
        return Err(FanError::NotPure);
    }
    let covered = |c: &Vec<usize>| maximal.iter().any(|&m| c.iter().all(|r| fan.cones[m].contains(r)));
    if !fan.cones.iter().all(covered) {
        return Err(FanError::NotPure);
    }
    let taus: Vec<Vec<usize>> = if d == 1 {
        vec![Vec::new()]
    } else {
        fan.cones.iter().filter(|c| c.len() == d - 1).cloned().collect()
    };
    let facets: Vec<FacetBalance> = taus
        .par_iter()
        .map(|tau| {
            let tau_rays: Vec<Vec<i64>> = tau.iter().map(|&r| fan.rays[r].clone()).collect();
            let mut residual = vec![0i64; fan.ambient_dim];
            let mut contributions = Vec::new();
            for &m in &maximal {
                if !tau.iter().all(|r| fan.cones[m].contains(r)) {
                    continue;
                }
                let normal = primitive_normal(&fan.cone_rays(m), &tau_rays).expect("tau is a facet");
                let w = fan.weights[&m];
                for (acc, x) in residual.iter_mut().zip(&normal) {
                    *acc += w as i64 * x;
                }
                contributions.push(NormalContribution { cone: m, weight: w, normal });
            }
            let balanced = in_span(&residual, &tau_rays);
            FacetBalance { tau: tau.clone(), contributions, residual, balanced }
        })
        .collect();
    Ok(BalancingCertificate { balanced: facets.iter().all(|f| f.balanced), facets })
}

/// Which cell pairs the face-compatibility check visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceCheck {
    Skip,
    /// Pairs of maximal cells; sufficient once dimensions are preserved.
    Maximal,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingReport {
    pub vertex_injective: bool,
    pub dim_preserving: bool,
    /// `None` when the check was skipped.
    pub face_compatible: Option<bool>,
    pub is_embedding: bool,
    pub face_check: FaceCheck,
    pub pairs_checked: usize,
    /// Cells whose image has lower dimension.
    pub dimension_drops: Vec<NestedFamily>,
    /// Cell pairs whose image cones meet in more than the image of the shared face.
    pub incompatible_pairs: Vec<(NestedFamily, NestedFamily)>,
}

/// Decides whether the valuation map embeds the boundary complex as a fan.
pub fn embedding_report(g: &StabilityGraph, check: FaceCheck) -> Result<EmbeddingReport, FanError> {
    if g.n() > FACE_CHECK_BOUND {
        return Err(FanError::DimensionTooLarge(g.n()));
    }
    let complex = enumerate_complex(g);
    Ok(embedding_report_from(g, &complex, check))
}

pub fn embedding_report_from(g: &StabilityGraph, complex: &BoundaryComplex, check: FaceCheck) -> EmbeddingReport {
    let dim = CoordinateFrame::for_graph(g).dim();
    let vertex_injective = injectivity_report(g).injective;
    let images = |f: &NestedFamily| -> Vec<Vec<i64>> { f.sets().iter().map(|&s| pi_gamma(s, g).unwrap().0).collect() };
    let dimension_drops: Vec<NestedFamily> = complex
        .nonempty_cells()
        .filter(|f| rank(&images(f)) != f.len())
        .cloned()
        .collect();
    let dim_preserving = dimension_drops.is_empty();

    let cells: Vec<NestedFamily> = match check {
        FaceCheck::Skip => Vec::new(),
        FaceCheck::Maximal => complex.maximal_cells(),
        FaceCheck::All => complex.nonempty_cells().cloned().collect(),
    };
    let mut pairs = Vec::new();
    for (a, f1) in cells.iter().enumerate() {
        for f2 in &cells[a + 1..] {
            if !f1.is_subfamily_of(f2) && !f2.is_subfamily_of(f1) {
                pairs.push((f1, f2));
            }
        }
    }
    let mut incompatible_pairs: Vec<(NestedFamily, NestedFamily)> = pairs
        .par_iter()
        .filter(|(f1, f2)| {
            let shared = f1.intersection(f2);
            !intersection_equals(&images(f1), &images(f2), &images(&shared), dim)
        })
        .map(|(f1, f2)| ((*f1).clone(), (*f2).clone()))
        .collect();
    incompatible_pairs.sort();
    let face_compatible = (check != FaceCheck::Skip).then_some(incompatible_pairs.is_empty());
    EmbeddingReport {
        vertex_injective,
        dim_preserving,
        face_compatible,
        is_embedding: vertex_injective && dim_preserving && face_compatible.unwrap_or(true),
        face_check: check,
        pairs_checked: pairs.len(),
        dimension_drops,
        incompatible_pairs,
    }
}

/// `Σ length(e) · π_Γ(I(e))` over the bounded edges of a Γ-stable metric tree.
pub fn trop_embed(m: &MetricTree, g: &StabilityGraph) -> Result<Vec<Rational>, FanError> {
    let dim = CoordinateFrame::for_graph(g).dim();
    let mut out = vec![Rational::zero(); dim];
    for (cut, len) in m.weighted_cuts() {
        let v = pi_gamma(cut, g).map_err(|_| FanError::UnstableTree)?;
        for (o, &c) in out.iter_mut().zip(v.coords()) {
            *o += &len * Rational::from_integer(c.into());
        }
    }
    Ok(out)
}
