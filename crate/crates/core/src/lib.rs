//! Spherical Voronoi multi-bubble clusters on S^n and R^n.
//!
//! A cluster with `q` cells is described by quasi-centres `c_i ∈ R^{n+1}` and curvatures
//! `k_i`, both summing to zero. Cell `i` is where `⟨c_i, p⟩ + k_i` is smallest. The
//! crate provides the Lorentz-group action on such clusters, Monte Carlo measures,
//! constructors for standard bubbles, first and second variation formulas, and the
//! combinatorial tests on incidence complexes.

pub mod cluster;
pub mod combinatorics;
pub mod construct;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod minkowski;
pub mod projections;
pub mod sampling;
pub mod variation;

pub use cluster::{Cluster, Membership};
pub use error::{Error, Result};
