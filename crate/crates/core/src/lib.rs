//! Search-based, kinematically feasible path planning on costmaps.
//!
//! Three planners share one A* engine: an 8-connected cost-aware grid
//! planner, a Hybrid-A* planner over continuous poses and a state lattice
//! planner over a precomputed minimal control set.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod geometry;
pub mod gridmap;
pub mod heuristics;
pub mod lattice;
pub mod planners;
pub mod search;
