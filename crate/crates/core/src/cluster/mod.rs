//! Spherical Voronoi clusters on S^n.
//!
//! Cell `i` is the set of `p ∈ S^n` where `⟨c_i, p⟩ + k_i` is strictly smallest. The
//! interface between cells `i` and `j` lies on the sphere cut out by the hyperplane
//! `⟨c_ij, p⟩ + k_ij = 0`, where `c_ij = c_i − c_j` and `k_ij = k_i − k_j`.

mod blowup;

pub use blowup::{BlowUpCone, ConeKind};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{min_norm_in_polyhedron, min_norm_solve, orthonormalize, zero_sum_projector};
use crate::minkowski::{gram, MinkowskiGram, EPS_GEO};
use crate::sampling::{map_chunks, on_sphere, sphere_area, stream_key};

/// Strict-dominance margin for deciding that a sampled point is in an open set.
pub const EPS_MEM: f64 = 1e-7;

/// Default tie tolerance for membership queries.
pub const TIE_TOL: f64 = 1e-9;

const TAG_DETECT: u64 = 0x6465_7465_6374;
const TAG_STATIONARY: u64 = 0x7374_6174;

/// Default sample budget for sampled non-emptiness tests.
pub fn default_detection_samples(n: usize) -> usize {
    4096 * n.max(1)
}

/// A spherical Voronoi cluster with `q` cells on S^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    n: usize,
    centers: Vec<DVector<f64>>,
    curvatures: Vec<f64>,
}

/// Result of a membership query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Cell(usize),
    /// Indices whose functionals are within tolerance of the minimum, ascending.
    Tie(Vec<usize>),
}

/// Outcome of a sampled or exact non-emptiness test.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub nonempty: bool,
    pub witness: Option<DVector<f64>>,
}

impl Detection {
    fn empty() -> Self {
        Self {
            nonempty: false,
            witness: None,
        }
    }
}

/// The round (n−1)-sphere carrying an interface.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceSphere {
    pub i: usize,
    pub j: usize,
    pub quasi_center: DVector<f64>,
    pub curvature: f64,
    pub euclid_center: DVector<f64>,
    pub euclid_radius: f64,
}

impl InterfaceSphere {
    /// Point `euclid_center + euclid_radius·u` for a unit `u ⟂ c_ij`.
    pub fn point(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.euclid_center + u * self.euclid_radius
    }
}

/// Intersection of S^n with the common zero set of the pair functionals of a cell set.
///
/// It is a round sphere of dimension `n + 1 − |cells|`, stored by its centre, radius and
/// an orthonormal basis of the normal directions of its affine span.
#[derive(Debug, Clone, PartialEq)]
pub struct Carrier {
    pub cells: Vec<usize>,
    pub center: DVector<f64>,
    pub radius: f64,
    normals: Vec<DVector<f64>>,
    pub sphere_dim: usize,
}

impl Carrier {
    /// Uniform sample on the carrier, built from a Gaussian draw projected off the normals.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        loop {
            let mut g = crate::sampling::gaussian_vector(rng, self.center.len());
            for v in &self.normals {
                let d = v.dot(&g);
                g.axpy(-d, v, 1.0);
            }
            let norm = g.norm();
            if norm > 1e-12 {
                return &self.center + g * (self.radius / norm);
            }
        }
    }

    /// Lebesgue measure of the carrier sphere.
    pub fn measure(&self) -> f64 {
        sphere_area(self.sphere_dim) * self.radius.powi(self.sphere_dim as i32)
    }
}

/// Result of the standard-bubble predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardCheck {
    pub is_standard: bool,
    /// `‖G − ½P‖_max`.
    pub deviation: f64,
}

/// A point `ξ` with `⟨c_i, ξ⟩ + k_i = 0` for every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessWitness {
    pub xi: DVector<f64>,
    pub conformally_flat: bool,
}

/// Summary of the stationarity identities.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    /// Largest `|k_ij + k_jk + k_ki|` over all triples.
    pub cocycle_residual: f64,
    /// Largest `|n_ij + n_jk + n_ki|` over the sampled triple points.
    pub max_normal_sum: f64,
    /// Largest deviation of `|n_ij|` from 1 over the sampled triple points.
    pub max_normal_defect: f64,
    pub triple_points_checked: usize,
    /// Lagrange multipliers `(n−1)k_i`.
    pub multipliers: Vec<f64>,
}

fn check_zero_sum(centers: &[DVector<f64>], curvatures: &[f64]) -> Result<()> {
    let scale = centers
        .iter()
        .map(|c| c.amax())
        .chain(curvatures.iter().map(|k| k.abs()))
        .fold(1.0, f64::max);
    let dim = centers[0].len();
    let csum = centers
        .iter()
        .fold(DVector::zeros(dim), |acc, c| acc + c)
        .amax();
    if csum > EPS_GEO * scale {
        return Err(Error::NotZeroSum {
            what: "centers",
            residual: csum,
        });
    }
    let ksum = curvatures.iter().sum::<f64>().abs();
    if ksum > EPS_GEO * scale {
        return Err(Error::NotZeroSum {
            what: "curvatures",
            residual: ksum,
        });
    }
    Ok(())
}

impl Cluster {
    /// Validated constructor for `2 ≤ q ≤ n + 2` with zero-sum parameters.
    pub fn new(n: usize, centers: Vec<DVector<f64>>, curvatures: Vec<f64>) -> Result<Self> {
        let q = centers.len();
        if q > n + 2 {
            return Err(Error::CellCount {
                n,
                q,
                reason: "at most n+2 cells are supported",
            });
        }
        Self::new_unrestricted(n, centers, curvatures)
    }

    /// Like [`Cluster::new`] but admits more than `n + 2` cells.
    ///
    /// Needed for ring configurations in the plane. Operations that rely on `q ≤ n + 2`
    /// check it themselves.
    pub fn new_unrestricted(
        n: usize,
        centers: Vec<DVector<f64>>,
        curvatures: Vec<f64>,
    ) -> Result<Self> {
        let q = centers.len();
        if q < 2 {
            return Err(Error::CellCount {
                n,
                q,
                reason: "at least two cells are required",
            });
        }
        if curvatures.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: curvatures.len(),
            });
        }
        if let Some(bad) = centers.iter().find(|c| c.len() != n + 1) {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: bad.len(),
            });
        }
        check_zero_sum(&centers, &curvatures)?;
        Ok(Self {
            n,
            centers,
            curvatures,
        })
    }

    /// Subtracts the mean parameter first, which leaves every cell unchanged.
    pub fn recentered(
        n: usize,
        mut centers: Vec<DVector<f64>>,
        mut curvatures: Vec<f64>,
        unrestricted: bool,
    ) -> Result<Self> {
        let q = centers.len().max(1) as f64;
        if let Some(first) = centers.first() {
            let mean = centers.iter().fold(DVector::zeros(first.len()), |a, c| a + c) / q;
            for c in &mut centers {
                *c -= &mean;
            }
        }
        let kmean = curvatures.iter().sum::<f64>() / q;
        for k in &mut curvatures {
            *k -= kmean;
        }
        if unrestricted {
            Self::new_unrestricted(n, centers, curvatures)
        } else {
            Self::new(n, centers, curvatures)
        }
    }

    /// Builds a cluster from homogeneous parameters `(c_i, −k_i)`, re-centering them.
    pub fn from_homogeneous(n: usize, ck: &[DVector<f64>]) -> Result<Self> {
        let centers = ck.iter().map(|v| v.rows(0, n + 1).into_owned()).collect();
        let curvatures = ck.iter().map(|v| -v[n + 1]).collect();
        Self::recentered(n, centers, curvatures, ck.len() > n + 2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[DVector<f64>] {
        &self.centers
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    pub fn center(&self, i: usize) -> &DVector<f64> {
        &self.centers[i]
    }

    pub fn curvature(&self, i: usize) -> f64 {
        self.curvatures[i]
    }

    /// Homogeneous parameters `ck_i = (c_i, −k_i)` in R^{n+2}.
    pub fn homogeneous(&self) -> Vec<DVector<f64>> {
        self.centers
            .iter()
            .zip(&self.curvatures)
            .map(|(c, &k)| c.clone().insert_row(self.n + 1, -k))
            .collect()
    }

    pub fn gram(&self) -> MinkowskiGram {
        gram(&self.homogeneous()).expect("cluster parameters are zero-sum")
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.q() {
            return Err(Error::IndexOutOfRange { index: i, q: self.q() });
        }
        Ok(())
    }

    fn check_point(&self, p: &DVector<f64>) -> Result<()> {
        if p.len() != self.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                found: p.len(),
            });
        }
        let deviation = p.norm() - 1.0;
        if deviation.abs() > EPS_GEO.sqrt() {
            return Err(Error::OffSphere { deviation });
        }
        Ok(())
    }

    /// Cell functional `⟨c_i, p⟩ + k_i`.
    pub fn functional(&self, i: usize, p: &DVector<f64>) -> f64 {
        self.centers[i].dot(p) + self.curvatures[i]
    }

    pub fn functionals(&self, p: &DVector<f64>) -> Vec<f64> {
        (0..self.q()).map(|i| self.functional(i, p)).collect()
    }

    /// Pair parameters `(c_ij, k_ij)`.
    pub fn pair(&self, i: usize, j: usize) -> (DVector<f64>, f64) {
        (
            &self.centers[i] - &self.centers[j],
            self.curvatures[i] - self.curvatures[j],
        )
    }

    /// `|c_ij|² − 1 − k_ij²`, which vanishes for every pair with a non-empty interface.
    pub fn pair_defect(&self, i: usize, j: usize) -> f64 {
        let (c, k) = self.pair(i, j);
        c.norm_squared() - 1.0 - k * k
    }

    /// Unit normal `n_ij = c_ij + k_ij p` pointing from cell `i` into cell `j`.
    pub fn normal(&self, i: usize, j: usize, p: &DVector<f64>) -> DVector<f64> {
        let (c, k) = self.pair(i, j);
        c + p * k
    }

    /// Lowest-index minimiser of the cell functionals, ignoring ties.
    pub fn argmin(&self, p: &DVector<f64>) -> usize {
        let mut best = 0;
        let mut value = self.functional(0, p);
        for i in 1..self.q() {
            let f = self.functional(i, p);
            if f < value {
                value = f;
                best = i;
            }
        }
        best
    }

    /// Cell containing `p`, or the tied cells when several functionals are within `tol`.
    pub fn cell_of(&self, p: &DVector<f64>, tol: f64) -> Result<Membership> {
        self.check_point(p)?;
        let f = self.functionals(p);
        let min = f.iter().copied().fold(f64::INFINITY, f64::min);
        let tied: Vec<usize> = (0..f.len()).filter(|&i| f[i] - min <= tol).collect();
        Ok(if tied.len() == 1 {
            Membership::Cell(tied[0])
        } else {
            Membership::Tie(tied)
        })
    }

    /// Explicit chart of the sphere carrying `Σ_ij`; fails for malformed pairs.
    pub fn interface_sphere(&self, i: usize, j: usize) -> Result<InterfaceSphere> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::RepeatedIndex);
        }
        let defect = self.pair_defect(i, j);
        if defect.abs() > EPS_GEO {
            return Err(Error::MalformedPair { i, j, defect });
        }
        let (c, k) = self.pair(i, j);
        let denom = 1.0 + k * k;
        Ok(InterfaceSphere {
            i,
            j,
            euclid_center: &c * (-k / denom),
            euclid_radius: 1.0 / denom.sqrt(),
            quasi_center: c,
            curvature: k,
        })
    }

    /// Carrier sphere of the meeting set of `cells`, or `None` if the planes miss S^n.
    pub fn carrier(&self, cells: &[usize]) -> Result<Option<Carrier>> {
        for &c in cells {
            self.check_index(c)?;
        }
        let mut sorted = cells.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != cells.len() || cells.len() < 2 {
            return Err(Error::RepeatedIndex);
        }
        if cells.len() > self.n + 1 {
            return Ok(None);
        }
        let base = sorted[0];
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for &l in &sorted[1..] {
            let (c, k) = self.pair(base, l);
            rows.push(c);
            rhs.push(-k);
        }
        let center = min_norm_solve(&rows, &rhs).ok_or_else(|| Error::DegenerateIntersection {
            indices: sorted.clone(),
        })?;
        let r2 = 1.0 - center.norm_squared();
        if r2 <= 0.0 {
            return Ok(None);
        }
        let normals = orthonormalize(&rows);
        Ok(Some(Carrier {
            sphere_dim: self.n + 1 - sorted.len(),
            cells: sorted,
            center,
            radius: r2.sqrt(),
            normals,
        }))
    }

    /// True when the cells in `set` attain the minimum together and every other
    /// functional exceeds it by more than `margin`.
    pub fn is_meeting_point(&self, set: &[usize], p: &DVector<f64>, margin: f64) -> bool {
        let f = self.functionals(p);
        let top = set.iter().map(|&s| f[s]).fold(f64::NEG_INFINITY, f64::max);
        let bottom = set.iter().map(|&s| f[s]).fold(f64::INFINITY, f64::min);
        if top - bottom > EPS_GEO {
            return false;
        }
        (0..self.q())
            .filter(|l| !set.contains(l))
            .all(|l| f[l] - top > margin)
    }

    /// Sampled test for the relative interior of the meeting set of `cells`.
    ///
    /// A negative answer is probabilistic.
    pub fn meeting_set_nonempty(
        &self,
        cells: &[usize],
        samples: usize,
        seed: u64,
    ) -> Result<Detection> {
        let Some(carrier) = self.carrier(cells)? else {
            return Ok(Detection::empty());
        };
        let key = stream_key(TAG_DETECT, cells);
        let hits = map_chunks(samples, seed, key, |rng, len| {
            let mut found = None;
            for _ in 0..len {
                let p = carrier.sample(rng);
                if found.is_none() && self.is_meeting_point(&carrier.cells, &p, EPS_MEM) {
                    found = Some(p);
                }
            }
            found
        });
        Ok(match hits.into_iter().flatten().next() {
            Some(p) => Detection {
                nonempty: true,
                witness: Some(p),
            },
            None => Detection::empty(),
        })
    }

    /// Sampled test whether `Σ_ij` is non-empty.
    ///
    /// A malformed pair whose carrying plane misses the sphere is reported empty; a
    /// malformed pair that is nevertheless detected is an error.
    pub fn interface_nonempty(
        &self,
        i: usize,
        j: usize,
        samples: usize,
        seed: u64,
    ) -> Result<Detection> {
        if i == j {
            return Err(Error::RepeatedIndex);
        }
        let det = self.meeting_set_nonempty(&[i, j], samples, seed)?;
        let defect = self.pair_defect(i, j);
        if det.nonempty && defect.abs() > EPS_GEO {
            return Err(Error::MalformedPair { i, j, defect });
        }
        Ok(det)
    }

    /// Sampled test whether the triple set `Σ_ijk` is non-empty.
    pub fn triple_set_nonempty(
        &self,
        i: usize,
        j: usize,
        k: usize,
        samples: usize,
        seed: u64,
    ) -> Result<Detection> {
        if i == j || j == k || i == k {
            return Err(Error::RepeatedIndex);
        }
        if self.n < 2 {
            return Ok(Detection::empty());
        }
        self.meeting_set_nonempty(&[i, j, k], samples, seed)
    }

    /// Exact test for the meeting set of `cells`, for `q ≤ n + 2`.
    ///
    /// The face `{F_s equal for s ∈ cells, F_l ≤ F_s − EPS_MEM otherwise}` is a polyhedron
    /// with at most as many inequalities as its dimension, hence unbounded when non-empty.
    /// It therefore meets S^n exactly when its point of least norm lies inside the unit
    /// ball. That point is found by active-set enumeration. The witness is the least-norm
    /// point itself, not a point of the sphere.
    pub fn meeting_set_nonempty_exact(&self, cells: &[usize]) -> Result<Detection> {
        if self.q() > self.n + 2 {
            return Err(Error::CellCount {
                n: self.n,
                q: self.q(),
                reason: "the exact test needs q <= n+2",
            });
        }
        if self.n > 8 {
            return Err(Error::CellCount {
                n: self.n,
                q: self.q(),
                reason: "the exact test is limited to n <= 8",
            });
        }
        for &c in cells {
            self.check_index(c)?;
        }
        let mut sorted = cells.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != cells.len() || cells.len() < 2 {
            return Err(Error::RepeatedIndex);
        }
        let base = sorted[0];
        let mut eq_rows = Vec::new();
        let mut eq_rhs = Vec::new();
        for &l in &sorted[1..] {
            let (c, k) = self.pair(base, l);
            eq_rows.push(c);
            eq_rhs.push(-k);
        }
        if min_norm_solve(&eq_rows, &eq_rhs).is_none() {
            return Err(Error::DegenerateIntersection { indices: sorted });
        }
        let mut ineq_rows = Vec::new();
        let mut ineq_rhs = Vec::new();
        for l in (0..self.q()).filter(|l| !sorted.contains(l)) {
            let (c, k) = self.pair(base, l);
            ineq_rows.push(c);
            ineq_rhs.push(-k - EPS_MEM);
        }
        let best = min_norm_in_polyhedron(&eq_rows, &eq_rhs, &ineq_rows, &ineq_rhs, 1e-12);
        Ok(match best {
            Some(x) if x.norm() < 1.0 - EPS_GEO => Detection {
                nonempty: true,
                witness: Some(x),
            },
            _ => Detection::empty(),
        })
    }

    /// Gram test against `½(I − (1/q)11ᵀ)`.
    pub fn is_standard_bubble(&self, tol: f64) -> StandardCheck {
        let target = zero_sum_projector(self.q()) * 0.5;
        let deviation = self.gram().deviation(&target);
        StandardCheck {
            is_standard: deviation < tol,
            deviation,
        }
    }

    /// Least-norm `ξ` with `⟨c_i, ξ⟩ = −k_i` for all `i`, if the system is consistent.
    pub fn pseudo_conformally_flat(&self, tol: f64) -> Option<FlatnessWitness> {
        let c = DMatrix::from_fn(self.q(), self.n + 1, |i, j| self.centers[i][j]);
        let rhs = -DVector::from_column_slice(&self.curvatures);
        let svd = c.clone().svd(true, true);
        let cutoff = crate::linalg::RANK_RTOL * svd.singular_values.max().max(1e-300);
        let xi = svd.solve(&rhs, cutoff).ok()?;
        let residual = (&c * &xi - &rhs).norm();
        (residual < tol).then(|| FlatnessWitness {
            conformally_flat: xi.norm() < 1.0,
            xi,
        })
    }

    /// Checks the cocycle identity and the vanishing normal sum at sampled triple points.
    pub fn stationarity_report(&self, samples: usize, seed: u64) -> StationarityReport {
        let q = self.q();
        let mut cocycle_residual: f64 = 0.0;
        let mut max_normal_sum: f64 = 0.0;
        let mut max_normal_defect: f64 = 0.0;
        let mut checked = 0;
        for i in 0..q {
            for j in i + 1..q {
                for k in j + 1..q {
                    let kij = self.curvatures[i] - self.curvatures[j];
                    let kjk = self.curvatures[j] - self.curvatures[k];
                    let kki = self.curvatures[k] - self.curvatures[i];
                    cocycle_residual = cocycle_residual.max((kij + kjk + kki).abs());
                    if self.n < 2 {
                        continue;
                    }
                    let Ok(Some(carrier)) = self.carrier(&[i, j, k]) else {
                        continue;
                    };
                    let key = stream_key(TAG_STATIONARY, &[i, j, k]);
                    let parts = map_chunks(samples, seed, key, |rng, len| {
                        let mut worst = (0.0f64, 0.0f64, 0usize);
                        for _ in 0..len {
                            let p = carrier.sample(rng);
                            if !self.is_meeting_point(&carrier.cells, &p, EPS_MEM) {
                                continue;
                            }
                            let nij = self.normal(i, j, &p);
                            let njk = self.normal(j, k, &p);
                            let nki = self.normal(k, i, &p);
                            let sum = (&nij + &njk + &nki).norm();
                            let defect = [nij.norm(), njk.norm(), nki.norm()]
                                .iter()
                                .map(|x| (x - 1.0).abs())
                                .fold(0.0, f64::max);
                            worst = (worst.0.max(sum), worst.1.max(defect), worst.2 + 1);
                        }
                        worst
                    });
                    for (s, d, c) in parts {
                        max_normal_sum = max_normal_sum.max(s);
                        max_normal_defect = max_normal_defect.max(d);
                        checked += c;
                    }
                }
            }
        }
        StationarityReport {
            cocycle_residual,
            max_normal_sum,
            max_normal_defect,
            triple_points_checked: checked,
            multipliers: self
                .curvatures
                .iter()
                .map(|k| (self.n as f64 - 1.0) * k)
                .collect(),
        }
    }

    /// Uniform random point on S^n, convenient for property tests.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        on_sphere(rng, self.n + 1)
    }
}
