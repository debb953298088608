use nalgebra::{DMatrix, DVector};

use super::{Cluster, Membership};
use crate::error::{Error, Result};
use crate::linalg::{min_norm_in_polyhedron, rank};

const UNIT_TOL: f64 = 1e-7;

/// Shape of a tangent cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConeKind {
    Hyperplane,
    Y,
    T,
    Simplicial,
    Other,
}

/// Tangent Voronoi cone of a cluster at a boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowUpCone {
    pub point: DVector<f64>,
    /// Cells whose closures contain the point, ascending.
    pub cells: Vec<usize>,
    /// Projected quasi-centres `n_i(p) = c_i − ⟨c_i, p⟩p`, one per entry of `cells`.
    pub normals: Vec<DVector<f64>>,
    /// Dimension of the span of the differences `n_i − n_j`.
    pub dim: usize,
    /// Pairs of `cells` whose interface survives in the cone.
    pub pairs_present: Vec<(usize, usize)>,
    pub kind: ConeKind,
}

impl BlowUpCone {
    /// Largest `|n_ij + n_jk + n_ki|` over triples of cells present at the point.
    pub fn max_cycle_sum(&self) -> f64 {
        let m = self.cells.len();
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    let nab = &self.normals[a] - &self.normals[b];
                    let nbc = &self.normals[b] - &self.normals[c];
                    let nca = &self.normals[c] - &self.normals[a];
                    worst = worst.max((nab + nbc + nca).norm());
                }
            }
        }
        worst
    }
}

impl Cluster {
    /// Blow-up cone at `p`, which must lie in the closure of at least two cells.
    pub fn blow_up(&self, p: &DVector<f64>, tol: f64) -> Result<BlowUpCone> {
        let cells = match self.cell_of(p, tol)? {
            Membership::Cell(cell) => return Err(Error::InteriorPoint { cell }),
            Membership::Tie(t) => t,
        };
        let normals: Vec<DVector<f64>> = cells
            .iter()
            .map(|&i| {
                let c = self.center(i);
                c - p * c.dot(p)
            })
            .collect();
        let m = cells.len();
        let diffs = DMatrix::from_fn(m - 1, p.len(), |r, col| normals[r + 1][col] - normals[0][col]);
        let dim = rank(&diffs);

        let mut pairs_present = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                if pair_in_cone(p, &normals, a, b) {
                    pairs_present.push((cells[a], cells[b]));
                }
            }
        }
        let all_pairs = pairs_present.len() == m * (m - 1) / 2;
        let unit_pairs = (0..m).all(|a| {
            (a + 1..m).all(|b| ((&normals[a] - &normals[b]).norm() - 1.0).abs() < UNIT_TOL)
        });
        let kind = if dim == 1 {
            ConeKind::Hyperplane
        } else if dim == 2 && m == 3 && unit_pairs {
            ConeKind::Y
        } else if dim == 3 && m == 4 && all_pairs && unit_pairs {
            ConeKind::T
        } else if all_pairs {
            ConeKind::Simplicial
        } else {
            ConeKind::Other
        };
        Ok(BlowUpCone {
            point: p.clone(),
            cells,
            normals,
            dim,
            pairs_present,
            kind,
        })
    }
}

/// Whether `{x ⟂ p : ⟨n_a − n_b, x⟩ = 0, ⟨n_a − n_l, x⟩ ≤ −1 for l ≠ a, b}` is non-empty.
fn pair_in_cone(p: &DVector<f64>, normals: &[DVector<f64>], a: usize, b: usize) -> bool {
    let eq_rows = vec![p.clone(), &normals[a] - &normals[b]];
    let ineq_rows: Vec<DVector<f64>> = (0..normals.len())
        .filter(|&l| l != a && l != b)
        .map(|l| &normals[a] - &normals[l])
        .collect();
    let ineq_rhs = vec![-1.0; ineq_rows.len()];
    min_norm_in_polyhedron(&eq_rows, &[0.0, 0.0], &ineq_rows, &ineq_rhs, 1e-9).is_some()
}
