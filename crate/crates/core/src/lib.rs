//! Tropical geometry of graphically stable compactifications of `M_{0,n}`.
//!
//! A stability graph on the labels `2..n` selects which boundary divisors of
//! `M̄_{0,n}` survive. This crate enumerates the resulting boundary complex,
//! computes the valuation of each divisor in the torus of Plücker
//! coordinates, builds the tropical fan with its balancing certificate, and
//! tropicalizes explicit one-parameter families of point configurations.

pub mod cli;
pub mod complex;
pub mod cones;
pub mod fan;
pub mod graphs;
pub mod lattice;
pub mod pluecker;
pub mod sets;
pub mod trees;
pub mod valuation;

/// Exact rationals used for tree lengths and tropical points.
pub type Rational = num_rational::BigRational;

pub use graphs::{validate_graph, StabilityGraph};
pub use sets::IndexSet;
pub use trees::{MarkedTree, MetricTree, NestedFamily};
