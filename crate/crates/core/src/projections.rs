//! Stereographic and orthogonal charts of clusters.
//!
//! The Euclidean picture of a spherical cluster is always a view over its spherical
//! parent. When an interface becomes a hyperplane its Euclidean curvature vanishes and
//! the plane alone no longer determines the spherical data, so the spherical offsets
//! `k^S_i` are kept alongside the Euclidean parameters.

use nalgebra::{DMatrix, DVector};

use crate::cluster::{Cluster, Membership, EPS_MEM};
use crate::error::{Error, Result};
use crate::minkowski::EPS_GEO;

/// Below this magnitude a Euclidean pair curvature is treated as a hyperplane.
pub const FLAT_TOL: f64 = 1e-9;

/// Householder reflection taking `e_{n+1}` to `pole`; symmetric and orthogonal.
pub fn pole_frame(pole: &DVector<f64>) -> DMatrix<f64> {
    let d = pole.len();
    let mut e = DVector::zeros(d);
    e[d - 1] = 1.0;
    let v = &e - pole;
    let vv = v.norm_squared();
    let mut h = DMatrix::identity(d, d);
    if vv > 1e-30 {
        h -= &v * v.transpose() * (2.0 / vv);
    }
    h
}

/// Stereographic chart of S^n from a unit pole, in the pole-adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoChart {
    pole: DVector<f64>,
    frame: DMatrix<f64>,
}

impl StereoChart {
    pub fn new(pole: &DVector<f64>) -> Result<Self> {
        let norm = pole.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        if (norm - 1.0).abs() > EPS_GEO.sqrt() {
            return Err(Error::OffSphere {
                deviation: norm - 1.0,
            });
        }
        let pole = pole / norm;
        Ok(Self {
            frame: pole_frame(&pole),
            pole,
        })
    }

    pub fn pole(&self) -> &DVector<f64> {
        &self.pole
    }

    /// The orthogonal frame `H` with `H e_{n+1} = pole`.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Projection from the pole onto R^n.
    pub fn to_plane(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let y = &self.frame * p;
        let n = y.len() - 1;
        let denom = 1.0 - y[n];
        if denom <= 1e-15 {
            return Err(Error::AtPole);
        }
        Ok(y.rows(0, n) / denom)
    }

    /// Inverse projection `x ↦ (2x, |x|² − 1)/(|x|² + 1)` followed by the frame.
    pub fn to_sphere(&self, x: &DVector<f64>) -> DVector<f64> {
        let r2 = x.norm_squared();
        let n = x.len();
        let mut y = x * (2.0 / (r2 + 1.0));
        y = y.insert_row(n, (r2 - 1.0) / (r2 + 1.0));
        &self.frame * y
    }
}

/// Forward stereographic projection with respect to `pole`.
pub fn stereo_to_plane(p: &DVector<f64>, pole: &DVector<f64>) -> Result<DVector<f64>> {
    StereoChart::new(pole)?.to_plane(p)
}

/// Inverse stereographic projection with respect to `pole`.
pub fn stereo_to_sphere(x: &DVector<f64>, pole: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(StereoChart::new(pole)?.to_sphere(x))
}

/// Zero set of a Euclidean pair functional.
#[derive(Debug, Clone, PartialEq)]
pub enum EuclideanCarrier {
    Sphere { center: DVector<f64>, radius: f64 },
    /// `{x : ⟨normal, x⟩ = ⟨normal, foot⟩}` with unit `normal`.
    Plane { normal: DVector<f64>, foot: DVector<f64> },
    Empty,
}

/// Euclidean picture of a spherical cluster under stereographic projection.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanView {
    parent: Cluster,
    chart: StereoChart,
    pole_cell: usize,
    euclid_centers: Vec<DVector<f64>>,
    euclid_curvatures: Vec<f64>,
    spherical_offsets: Vec<f64>,
}

fn strict_cell(cluster: &Cluster, p: &DVector<f64>) -> Option<usize> {
    let f = cluster.functionals(p);
    let best = cluster.argmin(p);
    (0..f.len())
        .filter(|&l| l != best)
        .all(|l| f[l] - f[best] > EPS_MEM)
        .then_some(best)
}

/// Projects `cluster` from a pole in the interior of some cell.
///
/// Candidate poles are `−c_i/|c_i|` followed by `±e_l`; the first candidate strictly
/// inside a cell (inside `hint` when given) is used.
pub fn to_euclidean(cluster: &Cluster, pole_cell_hint: Option<usize>) -> Result<EuclideanView> {
    let dim = cluster.n() + 1;
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    let order: Vec<usize> = match pole_cell_hint {
        Some(h) if h < cluster.q() => std::iter::once(h)
            .chain((0..cluster.q()).filter(|&i| i != h))
            .collect(),
        Some(h) => return Err(Error::IndexOutOfRange { index: h, q: cluster.q() }),
        None => (0..cluster.q()).collect(),
    };
    for i in order {
        let c = cluster.center(i);
        if c.norm() > 1e-12 {
            candidates.push(-c.normalize());
        }
    }
    for l in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(dim);
            e[l] = s;
            candidates.push(e);
        }
    }
    for pole in candidates {
        if let Some(cell) = strict_cell(cluster, &pole) {
            if pole_cell_hint.is_none_or(|h| h == cell) {
                return view_with_pole(cluster, &pole);
            }
        }
    }
    Err(Error::NoPole)
}

/// Projects `cluster` from an explicit pole, which must be interior to a cell.
pub fn view_with_pole(cluster: &Cluster, pole: &DVector<f64>) -> Result<EuclideanView> {
    let chart = StereoChart::new(pole)?;
    let pole_cell = strict_cell(cluster, chart.pole()).ok_or(Error::NoPole)?;
    let n = cluster.n();
    let mut euclid_centers = Vec::with_capacity(cluster.q());
    let mut euclid_curvatures = Vec::with_capacity(cluster.q());
    for i in 0..cluster.q() {
        let adapted = chart.frame() * cluster.center(i);
        euclid_centers.push(adapted.rows(0, n).into_owned());
        euclid_curvatures.push(cluster.curvature(i) + adapted[n]);
    }
    Ok(EuclideanView {
        spherical_offsets: cluster.curvatures().to_vec(),
        parent: cluster.clone(),
        chart,
        pole_cell,
        euclid_centers,
        euclid_curvatures,
    })
}

impl EuclideanView {
    pub fn parent(&self) -> &Cluster {
        &self.parent
    }

    pub fn chart(&self) -> &StereoChart {
        &self.chart
    }

    pub fn pole(&self) -> &DVector<f64> {
        self.chart.pole()
    }

    /// The cell containing the pole, which becomes the unbounded cell.
    pub fn pole_cell(&self) -> usize {
        self.pole_cell
    }

    pub fn n(&self) -> usize {
        self.parent.n()
    }

    pub fn q(&self) -> usize {
        self.parent.q()
    }

    pub fn euclid_centers(&self) -> &[DVector<f64>] {
        &self.euclid_centers
    }

    pub fn euclid_curvatures(&self) -> &[f64] {
        &self.euclid_curvatures
    }

    pub fn spherical_offsets(&self) -> &[f64] {
        &self.spherical_offsets
    }

    /// `k^R_j|x|² + 2⟨c^R_j, x⟩ + 2k^S_j − k^R_j`, which is `(|x|² + 1)` times the
    /// spherical functional at the corresponding point.
    pub fn functional(&self, j: usize, x: &DVector<f64>) -> f64 {
        let kr = self.euclid_curvatures[j];
        kr * x.norm_squared() + 2.0 * self.euclid_centers[j].dot(x) + 2.0 * self.spherical_offsets[j]
            - kr
    }

    pub fn functionals(&self, x: &DVector<f64>) -> Vec<f64> {
        (0..self.q()).map(|j| self.functional(j, x)).collect()
    }

    /// Lowest-index minimiser of the Euclidean functionals.
    pub fn argmin(&self, x: &DVector<f64>) -> usize {
        let f = self.functionals(x);
        let mut best = 0;
        for j in 1..f.len() {
            if f[j] < f[best] {
                best = j;
            }
        }
        best
    }

    /// Membership with a tie tolerance measured on the spherical scale.
    pub fn cell_of(&self, x: &DVector<f64>, tol: f64) -> Membership {
        let f = self.functionals(x);
        let min = f.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = 1.0 + x.norm_squared();
        let tied: Vec<usize> = (0..f.len())
            .filter(|&j| f[j] - min <= tol * scale)
            .collect();
        if tied.len() == 1 {
            Membership::Cell(tied[0])
        } else {
            Membership::Tie(tied)
        }
    }

    /// Euclidean pair parameters `(c^R_ij, k^R_ij, k^S_ij)`.
    pub fn pair(&self, i: usize, j: usize) -> (DVector<f64>, f64, f64) {
        (
            &self.euclid_centers[i] - &self.euclid_centers[j],
            self.euclid_curvatures[i] - self.euclid_curvatures[j],
            self.spherical_offsets[i] - self.spherical_offsets[j],
        )
    }

    /// Unit normal `c^R_ij + k^R_ij x` of `Σ^R_ij`, pointing from cell `i` into cell `j`.
    pub fn normal(&self, i: usize, j: usize, x: &DVector<f64>) -> DVector<f64> {
        let (c, k, _) = self.pair(i, j);
        c + x * k
    }

    /// Sphere or hyperplane carrying the Euclidean interface `Σ^R_ij`.
    pub fn carrier(&self, i: usize, j: usize) -> EuclideanCarrier {
        let (c, k, ks) = self.pair(i, j);
        if k.abs() < FLAT_TOL {
            let norm = c.norm();
            if norm < 1e-12 {
                return EuclideanCarrier::Empty;
            }
            let normal = c / norm;
            let foot = &normal * (-ks / norm);
            return EuclideanCarrier::Plane { normal, foot };
        }
        let center = &c * (-1.0 / k);
        let r2 = (c.norm_squared() - k * (2.0 * ks - k)) / (k * k);
        if r2 <= 0.0 {
            return EuclideanCarrier::Empty;
        }
        EuclideanCarrier::Sphere {
            center,
            radius: r2.sqrt(),
        }
    }

    /// Radius of a ball containing the images of all cells other than the pole cell.
    ///
    /// `F_l − F_i` changes by at most `|c_l − c_i|` times the chordal distance, so the pole
    /// cell contains a chordal ball around the pole whose image is the outside of a ball.
    pub fn enclosing_radius(&self) -> f64 {
        let pole = self.chart.pole();
        let i = self.pole_cell;
        let f = self.parent.functionals(pole);
        let chord = (0..self.q())
            .filter(|&l| l != i)
            .map(|l| {
                let lip = (self.parent.center(l) - self.parent.center(i)).norm();
                if lip > 0.0 { (f[l] - f[i]) / lip } else { 2.0 }
            })
            .fold(2.0f64, f64::min)
            .max(1e-12);
        (4.0 - chord * chord).max(0.0).sqrt() / chord * (1.0 + 1e-9)
    }

    /// Reconstructs the spherical parameters `(c_i, k_i)` from the view.
    pub fn spherical_parameters(&self) -> (Vec<DVector<f64>>, Vec<f64>) {
        let n = self.n();
        let centers = (0..self.q())
            .map(|i| {
                let adapted = self.euclid_centers[i]
                    .clone()
                    .insert_row(n, self.euclid_curvatures[i] - self.spherical_offsets[i]);
                self.chart.frame() * adapted
            })
            .collect();
        (centers, self.spherical_offsets.clone())
    }
}

/// One open halfspace `⟨normal, x⟩ + offset < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: DVector<f64>,
    pub offset: f64,
    /// The neighbouring cell across this face.
    pub other: usize,
}

impl HalfSpace {
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.normal.dot(x) + self.offset < 0.0
    }
}

/// Orthogonal projection of a reflection-symmetric cluster onto the equatorial ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallView {
    pub north: DVector<f64>,
    /// Columns form an orthonormal basis of the equatorial hyperplane.
    pub basis: DMatrix<f64>,
    /// Halfspace description of each cell.
    pub cells: Vec<Vec<HalfSpace>>,
}

impl BallView {
    pub fn contains(&self, i: usize, x: &DVector<f64>) -> bool {
        self.cells[i].iter().all(|h| h.contains(x))
    }

    /// The unique cell whose polyhedron contains `x`, if any.
    pub fn cell_of(&self, x: &DVector<f64>) -> Option<usize> {
        let inside: Vec<usize> = (0..self.cells.len()).filter(|&i| self.contains(i, x)).collect();
        (inside.len() == 1).then(|| inside[0])
    }

    /// Point of the upper hemisphere lying over `x`.
    pub fn lift(&self, x: &DVector<f64>) -> DVector<f64> {
        let h = (1.0 - x.norm_squared()).max(0.0).sqrt();
        &self.basis * x + &self.north * h
    }
}

/// Polyhedral cells `{⟨c_ij, ·⟩ + k_ij < 0}` of a cluster whose centres are all orthogonal
/// to `north`, written in equatorial coordinates.
pub fn ball_projection(cluster: &Cluster, north: &DVector<f64>) -> Result<BallView> {
    let chart = StereoChart::new(north)?;
    let n = cluster.n();
    for i in 0..cluster.q() {
        let value = cluster.center(i).dot(chart.pole());
        if value.abs() > EPS_GEO {
            return Err(Error::SymmetryViolated { cell: i, value });
        }
    }
    let basis = chart.frame().columns(0, n).into_owned();
    let cells = (0..cluster.q())
        .map(|i| {
            (0..cluster.q())
                .filter(|&j| j != i)
                .map(|j| {
                    let (c, k) = cluster.pair(i, j);
                    HalfSpace {
                        normal: basis.transpose() * c,
                        offset: k,
                        other: j,
                    }
                })
                .collect()
        })
        .collect();
    Ok(BallView {
        north: chart.pole().clone(),
        basis,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn north(n: usize) -> DVector<f64> {
        let mut e = DVector::zeros(n + 1);
        e[n] = 1.0;
        e
    }

    #[test]
    fn origin_goes_to_the_antipode() {
        let pole = dvector![0.0, 0.6, 0.8];
        let p = stereo_to_sphere(&dvector![0.0, 0.0], &pole).unwrap();
        assert!((p + &pole).norm() < 1e-15);
    }

    #[test]
    fn unit_circle_goes_to_the_equator() {
        let p = stereo_to_sphere(&dvector![0.6, 0.8], &north(2)).unwrap();
        assert!(p[2].abs() < 1e-15);
        assert!((p.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pole_maps_to_infinity() {
        let pole = dvector![0.0, 0.0, 1.0];
        assert_eq!(stereo_to_plane(&pole, &pole), Err(Error::AtPole));
    }

    #[test]
    fn householder_frame_sends_last_axis_to_pole() {
        let pole = dvector![0.48, -0.6, 0.64];
        let h = pole_frame(&pole);
        assert!((&h * north(2) - &pole).norm() < 1e-15);
        assert!((&h * &h - DMatrix::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn round_trip_of_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pole = dvector![0.2, -0.4, 0.4, 0.8];
        let chart = StereoChart::new(&pole).unwrap();
        for _ in 0..10_000 {
            let p = crate::sampling::on_sphere(&mut rng, 4);
            let x = match chart.to_plane(&p) {
                Ok(x) => x,
                Err(_) => continue,
            };
            let back = chart.to_sphere(&x);
            let tol = 1e-12 * (1.0 + x.norm_squared());
            assert!((back - &p).norm() < tol);
        }
    }

    #[test]
    fn equator_becomes_unit_sphere() {
        let c = Cluster::new(
            3,
            vec![north(3) * 0.5, north(3) * -0.5],
            vec![0.0, 0.0],
        )
        .unwrap();
        let view = view_with_pole(&c, &north(3)).unwrap();
        assert_eq!(view.pole_cell(), 1);
        let (cr, kr, ks) = view.pair(0, 1);
        assert!(cr.norm() < 1e-15);
        assert!((kr - 1.0).abs() < 1e-15);
        assert_eq!(ks, 0.0);
        match view.carrier(0, 1) {
            EuclideanCarrier::Sphere { center, radius } => {
                assert!(center.norm() < 1e-15);
                assert!((radius - 1.0).abs() < 1e-15);
            }
            other => panic!("expected a sphere, got {other:?}"),
        }
    }

    #[test]
    fn ball_view_of_halves_is_one_cut() {
        let c = Cluster::new(
            2,
            vec![dvector![0.5, 0.0, 0.0], dvector![-0.5, 0.0, 0.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        let ball = ball_projection(&c, &north(2)).unwrap();
        assert_eq!(ball.cells[0].len(), 1);
        assert_eq!(ball.cell_of(&dvector![-0.5, 0.1]), Some(0));
        assert_eq!(ball.cell_of(&dvector![0.5, 0.1]), Some(1));
    }

    #[test]
    fn ball_view_requires_symmetry() {
        let c = Cluster::new(
            2,
            vec![dvector![0.0, 0.0, 0.5], dvector![0.0, 0.0, -0.5]],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            ball_projection(&c, &north(2)),
            Err(Error::SymmetryViolated { cell: 0, .. })
        ));
    }

    #[test]
    fn points_beyond_enclosing_radius_lie_in_pole_cell() {
        let c = crate::construct::bubble_from_curvatures(3, 4, &[0.5, -0.1, -0.15, -0.25]).unwrap();
        let view = to_euclidean(&c, None).unwrap();
        let r = view.enclosing_radius();
        assert!(r.is_finite() && r > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let dir = crate::sampling::on_sphere(&mut rng, 3);
            let x = dir * (r * (1.0 + 10.0 * rand::Rng::random::<f64>(&mut rng)));
            assert_eq!(view.argmin(&x), view.pole_cell());
        }
    }
}
