//! Hand-built clusters used in tests, examples and the command line.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::cluster::Cluster;
use crate::error::{Error, Result};

/// Planar ring of `sides` unit discs around a hub cell, pulled back to S².
#[derive(Debug, Clone, PartialEq)]
pub struct RingFixture {
    pub cluster: Cluster,
    /// Index of the unbounded cell.
    pub hub: usize,
    /// Euclidean curvature of each ring cell's interface with the hub, in ring order.
    pub ring_curvatures: Vec<f64>,
}

/// Ring cells centred at the vertices of a regular polygon with unit sides, each bounded
/// by a unit circle against the hub.
///
/// Neighbouring circles meet at 120 degrees along the bisecting lines. With six sides all
/// ring cells meet at the centre; with seven a small part of the hub remains inside.
/// Only neighbouring ring pairs are well formed.
pub fn regular_ring(sides: usize) -> Result<RingFixture> {
    if sides < 3 {
        return Err(Error::CellCount { n: 2, q: sides + 1, reason: "a ring needs at least three cells" });
    }
    let kappa = 1.0f64;
    let rho = 1.0 / (2.0 * (PI / sides as f64).sin());
    // Offset making every ring-hub pair well formed.
    let offset = (kappa * kappa * rho * rho + kappa * kappa - 1.0) / (2.0 * kappa);
    let mut centers = Vec::with_capacity(sides + 1);
    let mut curvatures = Vec::with_capacity(sides + 1);
    for i in 0..sides {
        let angle = 2.0 * PI * i as f64 / sides as f64;
        let (s, c) = angle.sin_cos();
        centers.push(DVector::from_vec(vec![-kappa * rho * c, -kappa * rho * s, kappa - offset]));
        curvatures.push(offset);
    }
    centers.push(DVector::zeros(3));
    curvatures.push(0.0);
    Ok(RingFixture {
        cluster: Cluster::recentered(2, centers, curvatures, true)?,
        hub: sides,
        ring_curvatures: vec![kappa; sides],
    })
}

/// Four lunes of S² meeting along the poles; their complex is a bare 4-cycle.
pub fn four_lune_ring() -> Cluster {
    let centers = (0..4)
        .map(|i| {
            let a = PI / 2.0 * i as f64;
            DVector::from_vec(vec![-a.cos(), -a.sin(), 0.0]) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    Cluster::recentered(2, centers, vec![0.0; 4], false).expect("fixed data is valid")
}
