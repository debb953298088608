//! Incidence complexes, homology, weighted graph Laplacians, graph enumeration and the
//! angle test for bubble rings.

mod complex;
mod enumerate;
mod graph;
mod homology;
mod ring;

pub use complex::{extract_complex, IncidenceComplex};
pub use enumerate::{enumerate_graphs, GraphFilter, SimpleGraph};
pub use graph::{MaxPrincipleSolution, Potential, WeightedGraph};
pub use homology::{homology_h1, Field};
pub use ring::{
    ring_angle_bound, ring_feasibility, GeometryCheck, RingAngles, RingGeometry, RingReport, RingVerdict,
};
