use serde::Serialize;

use super::{extract_complex, IncidenceComplex};
use nalgebra::DMatrix;

use crate::cluster::{Cluster, EPS_MEM, TIE_TOL};
use crate::error::{Error, Result};
use crate::linalg::null_space;

/// Tolerance on the angle excess, in degrees.
pub const EXCESS_TOL: f64 = 1e-9;
/// Largest normal sum accepted at sampled triple points of a supplied ring.
pub const RING_STATIONARITY_TOL: f64 = 1e-6;

/// Angle bookkeeping for a ring of `q - 1` cells around one hub cell, in degrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingAngles {
    /// Angles at each ring center toward its previous and next neighbour.
    pub vertex_angles: Vec<(f64, f64)>,
    pub lower_bound: f64,
    /// Interior angle sum of a planar polygon with `q - 1` vertices.
    pub ceiling: f64,
    /// `lower_bound - ceiling`; non-negative means no ring exists.
    pub excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RingVerdict {
    Infeasible,
    Feasible,
    Undetermined,
}

/// Result of checking a supplied cluster against the ring pattern.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryCheck {
    /// The incidence complex is the wheel around the hub with triangles `(i, i+1, hub)` only.
    pub is_wheel: bool,
    /// No point lies in the closure of four or more cells; only decided on S².
    pub non_degenerate: Option<bool>,
    pub max_normal_sum: f64,
    pub triple_points_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingReport {
    pub q: usize,
    pub angles: RingAngles,
    pub geometry: Option<GeometryCheck>,
    pub verdict: RingVerdict,
}

/// A cluster offered as an explicit ring, with the index of its hub cell.
#[derive(Debug, Clone, Copy)]
pub struct RingGeometry<'a> {
    pub cluster: &'a Cluster,
    pub hub: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Angle at the center of radius `1/ki` in the triangle formed with the center of radius
/// `1/kj` and a point where the two spheres meet at 60 degrees.
fn corner_angle(ki: f64, kj: f64) -> f64 {
    let (a, b) = (1.0 / ki, 1.0 / kj);
    let d2 = a * a + b * b - a * b;
    let cos = (a * a + d2 - b * b) / (2.0 * a * d2.sqrt());
    cos.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Lower bound on the polygon angle sum for ring curvatures listed in cyclic order.
pub fn ring_angle_bound(q: usize, curvatures: &[f64]) -> Result<RingAngles> {
    if q < 4 {
        return Err(Error::CellCount { n: 0, q, reason: "a ring needs q >= 4" });
    }
    if curvatures.len() != q - 1 {
        return Err(Error::DimensionMismatch { expected: q - 1, found: curvatures.len() });
    }
    if let Some(&k) = curvatures.iter().find(|k| !(**k > 0.0) || !k.is_finite()) {
        return Err(Error::NonPositiveCurvature { value: k });
    }
    let m = q - 1;
    let vertex_angles: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let (prev, next) = ((i + m - 1) % m, (i + 1) % m);
            (
                corner_angle(curvatures[i], curvatures[prev]),
                corner_angle(curvatures[i], curvatures[next]),
            )
        })
        .collect();
    let lower_bound: f64 = vertex_angles.iter().map(|(a, b)| a + b).sum();
    let ceiling = (q as f64 - 3.0) * 180.0;
    Ok(RingAngles { vertex_angles, lower_bound, ceiling, excess: lower_bound - ceiling })
}

fn wheel_pattern(complex: &IncidenceComplex, hub: usize) -> bool {
    let q = complex.q;
    let ring: Vec<usize> = (0..q).filter(|&v| v != hub).collect();
    if ring.iter().any(|&v| !complex.edges.contains(&(v.min(hub), v.max(hub)))) {
        return false;
    }
    let rim: Vec<(usize, usize)> = complex
        .edges
        .iter()
        .copied()
        .filter(|&(a, b)| a != hub && b != hub)
        .collect();
    if rim.len() != ring.len() {
        return false;
    }
    let rim_complex = IncidenceComplex::new(q, rim.iter().copied(), []);
    let degree_two = ring
        .iter()
        .all(|&v| rim.iter().filter(|&&(a, b)| a == v || b == v).count() == 2);
    let rim_connected = {
        let mut with_hub = rim_complex.clone();
        with_hub.edges.insert((hub.min(ring[0]), hub.max(ring[0])));
        with_hub.is_connected()
    };
    let triangles_ok = complex.triangles.len() == rim.len()
        && rim.iter().all(|&(a, b)| {
            let mut t = [a, b, hub];
            t.sort_unstable();
            complex.triangles.contains(&(t[0], t[1], t[2]))
        });
    degree_two && rim_connected && triangles_ok
}

/// Whether some triple point on S² is shared by a fourth cell.
///
/// Each triple carrier on S² is a pair of points, both of which are examined.
fn has_quadruple_point(cluster: &Cluster) -> Result<bool> {
    let q = cluster.q();
    for a in 0..q {
        for b in a + 1..q {
            for c in b + 1..q {
                let carrier = match cluster.carrier(&[a, b, c]) {
                    Ok(Some(carrier)) => carrier,
                    Ok(None) | Err(Error::DegenerateIntersection { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let (nb, nc) = (cluster.pair(a, b).0, cluster.pair(a, c).0);
                let rows = DMatrix::from_rows(&[nb.transpose(), nc.transpose()]);
                let axis = null_space(&rows);
                if axis.ncols() != 1 {
                    continue;
                }
                for sign in [1.0, -1.0] {
                    let p = &carrier.center + axis.column(0) * (sign * carrier.radius);
                    let f = cluster.functionals(&p);
                    let low = f.iter().copied().fold(f64::INFINITY, f64::min);
                    if [a, b, c].iter().any(|&i| f[i] - low > TIE_TOL) {
                        continue;
                    }
                    if f.iter().filter(|&&v| v - low <= EPS_MEM).count() > 3 {
                        return Ok(true);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// Angle test for bubble rings, followed for `q >= 8` by a check of a supplied cluster.
///
/// Ties in the angle test count as infeasible.
pub fn ring_feasibility(
    q: usize,
    curvatures: &[f64],
    geometry: Option<RingGeometry<'_>>,
) -> Result<RingReport> {
    let angles = ring_angle_bound(q, curvatures)?;
    if angles.excess >= -EXCESS_TOL {
        return Ok(RingReport { q, angles, geometry: None, verdict: RingVerdict::Infeasible });
    }
    let Some(geo) = geometry.filter(|_| q >= 8) else {
        return Ok(RingReport { q, angles, geometry: None, verdict: RingVerdict::Undetermined });
    };
    if geo.cluster.q() != q {
        return Err(Error::DimensionMismatch { expected: q, found: geo.cluster.q() });
    }
    if geo.hub >= q {
        return Err(Error::IndexOutOfRange { index: geo.hub, q });
    }
    let complex = extract_complex(geo.cluster, geo.samples, geo.seed)?;
    let report = geo.cluster.stationarity_report(geo.samples, geo.seed);
    let non_degenerate = if geo.cluster.n() == 2 {
        Some(!has_quadruple_point(geo.cluster)?)
    } else {
        None
    };
    let check = GeometryCheck {
        is_wheel: wheel_pattern(&complex, geo.hub),
        non_degenerate,
        max_normal_sum: report.max_normal_sum,
        triple_points_checked: report.triple_points_checked,
    };
    let verdict = if check.is_wheel
        && check.non_degenerate == Some(true)
        && check.triple_points_checked > 0
        && check.max_normal_sum < RING_STATIONARITY_TOL
    {
        RingVerdict::Feasible
    } else {
        RingVerdict::Undetermined
    };
    Ok(RingReport { q, angles, geometry: Some(check), verdict })
}
