//! Monte Carlo volumes, perimeters and surface integrals.
//!
//! On S^n every measure is normalised by `|S^n|`, so the sphere has total mass 1 and an
//! interface has measure `μ^{n−1}(Σ)/|S^n|`. In R^n plain Lebesgue measure is used.
//! All weights are constant: the model spaces carry no density.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::minkowski::EPS_GEO;
use crate::projections::{EuclideanCarrier, EuclideanView};
use crate::sampling::{
    ball_volume, gaussian_vector, in_ball, map_chunks, on_sphere, sphere_area, stream_key,
    Accumulator,
};

/// Default sample count for volume estimates.
pub const DEFAULT_VOLUME_SAMPLES: usize = 1_000_000;

/// Default sample count per interface for surface estimates.
pub const DEFAULT_SURFACE_SAMPLES: usize = 200_000;

const TAG_VOLUME: u64 = 0x766f_6c75_6d65;
const TAG_SURFACE: u64 = 0x7375_7266;
const TAG_EUCLID_VOLUME: u64 = 0x6576_6f6c;
const TAG_EUCLID_SURFACE: u64 = 0x6573_7572;

/// Which measure a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Normalization {
    /// Haar measure on S^n with total mass 1.
    Sphere,
    /// Lebesgue measure on R^n.
    Lebesgue,
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureReport {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    pub normalization: Normalization,
}

impl MeasureReport {
    pub(crate) fn from_acc(acc: &Accumulator, k: usize, scale: f64, seed: u64, norm: Normalization) -> Self {
        let (value, std_error) = acc.estimate(k, scale);
        Self {
            value,
            std_error,
            samples: acc.count,
            seed,
            normalization: norm,
        }
    }

    pub(crate) fn zero(samples: usize, seed: u64, normalization: Normalization) -> Self {
        Self {
            value: 0.0,
            std_error: 0.0,
            samples,
            seed,
            normalization,
        }
    }

    /// True when `|value − target| ≤ k·σ + slack`.
    pub fn within(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + slack
    }
}

/// Estimate attached to one interface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub report: MeasureReport,
}

/// Per-interface and total perimeter on S^n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerimeterReport {
    pub pairs: Vec<PairReport>,
    pub total: MeasureReport,
    /// Malformed pairs whose sampled interface was non-empty; they are left out.
    pub skipped: Vec<(usize, usize)>,
}

fn total_of(pairs: &[PairReport], samples: usize, seed: u64, norm: Normalization) -> MeasureReport {
    MeasureReport {
        value: pairs.iter().map(|p| p.report.value).sum(),
        std_error: pairs
            .iter()
            .map(|p| p.report.std_error.powi(2))
            .sum::<f64>()
            .sqrt(),
        samples,
        seed,
        normalization: norm,
    }
}

/// Cell volumes on S^n from uniform samples; ties go to the lower index.
pub fn cell_volumes(cluster: &Cluster, samples: usize, seed: u64) -> Vec<MeasureReport> {
    let q = cluster.q();
    let dim = cluster.n() + 1;
    let parts = map_chunks(samples, seed, stream_key(TAG_VOLUME, &[]), |rng, len| {
        let mut counts = vec![0usize; q];
        for _ in 0..len {
            let p = on_sphere(rng, dim);
            counts[cluster.argmin(&p)] += 1;
        }
        counts
    });
    let mut counts = vec![0usize; q];
    for part in parts {
        for (c, v) in counts.iter_mut().zip(part) {
            *c += v;
        }
    }
    binomial_reports(&counts, samples, seed, 1.0, Normalization::Sphere)
}

fn binomial_reports(
    counts: &[usize],
    samples: usize,
    seed: u64,
    scale: f64,
    norm: Normalization,
) -> Vec<MeasureReport> {
    let n = samples.max(1) as f64;
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            MeasureReport {
                value: p * scale,
                std_error: (p * (1.0 - p) / n).sqrt() * scale,
                samples,
                seed,
                normalization: norm,
            }
        })
        .collect()
}

/// Estimates of `V(a)_i − V(b)_i` from one shared set of points.
///
/// The standard error comes from the per-point differences, so it reflects the pairing.
pub fn volume_difference(a: &Cluster, b: &Cluster, samples: usize, seed: u64) -> Result<Vec<MeasureReport>> {
    if a.q() != b.q() || a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.q(), found: b.q() });
    }
    let q = a.q();
    let dim = a.n() + 1;
    let parts = map_chunks(samples, seed, stream_key(TAG_VOLUME, &[]), |rng, len| {
        let mut acc = Accumulator::new(q);
        let mut buf = vec![0.0; q];
        for _ in 0..len {
            let p = on_sphere(rng, dim);
            let (ia, ib) = (a.argmin(&p), b.argmin(&p));
            if ia == ib {
                acc.push_zero();
            } else {
                buf.iter_mut().for_each(|x| *x = 0.0);
                buf[ia] = 1.0;
                buf[ib] = -1.0;
                acc.push(&buf);
            }
        }
        acc
    });
    let acc = Accumulator::merge_all(q, &parts);
    Ok((0..q)
        .map(|i| MeasureReport::from_acc(&acc, i, 1.0, seed, Normalization::Sphere))
        .collect())
}

/// Estimate of `perimeter(a) − perimeter(b)` with common random numbers.
///
/// Interfaces of `a` and `b` with the same indices are sampled from the same Gaussian
/// draws, so nearby clusters give strongly correlated estimates. Malformed pairs are
/// left out on both sides.
pub fn perimeter_difference(a: &Cluster, b: &Cluster, samples: usize, seed: u64) -> Result<MeasureReport> {
    if a.q() != b.q() || a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.q(), found: b.q() });
    }
    let q = a.q();
    let area = sphere_area(a.n());
    let mut value = 0.0;
    let mut var = 0.0;
    for i in 0..q {
        for j in i + 1..q {
            if a.pair_defect(i, j).abs() > EPS_GEO || b.pair_defect(i, j).abs() > EPS_GEO {
                continue;
            }
            let (ca, cb) = (a.carrier(&[i, j])?, b.carrier(&[i, j])?);
            if ca.is_none() && cb.is_none() {
                continue;
            }
            let wa = ca.as_ref().map_or(0.0, |c| c.measure() / area);
            let wb = cb.as_ref().map_or(0.0, |c| c.measure() / area);
            let key = stream_key(TAG_SURFACE, &[i, j]);
            let parts = map_chunks(samples, seed, key, |rng, len| {
                let mut acc = Accumulator::new(1);
                for _ in 0..len {
                    let mut twin = rng.clone();
                    let mut d = 0.0;
                    if let Some(c) = &ca {
                        let p = c.sample(rng);
                        if a.is_meeting_point(&c.cells, &p, 0.0) {
                            d += wa;
                        }
                    }
                    if let Some(c) = &cb {
                        let p = c.sample(&mut twin);
                        if b.is_meeting_point(&c.cells, &p, 0.0) {
                            d -= wb;
                        }
                        if ca.is_none() {
                            *rng = twin;
                        }
                    }
                    acc.push(&[d]);
                }
                acc
            });
            let (v, s) = Accumulator::merge_all(1, &parts).estimate(0, 1.0);
            value += v;
            var += s * s;
        }
    }
    Ok(MeasureReport { value, std_error: var.sqrt(), samples, seed, normalization: Normalization::Sphere })
}

/// A fixed set of uniform points on S^n, reused across evaluations.
#[derive(Debug, Clone)]
pub struct SphereSamples {
    dim: usize,
    points: Vec<f64>,
}

impl SphereSamples {
    pub fn draw(n: usize, samples: usize, seed: u64) -> Self {
        let dim = n + 1;
        let chunks = map_chunks(samples, seed, stream_key(TAG_VOLUME, &[]), |rng, len| {
            let mut buf = Vec::with_capacity(len * dim);
            for _ in 0..len {
                buf.extend(on_sphere(rng, dim).iter());
            }
            buf
        });
        Self {
            dim,
            points: chunks.concat(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of the stored points in each cell.
    pub fn cell_fractions(&self, cluster: &Cluster) -> Vec<f64> {
        let q = cluster.q();
        let dim = self.dim;
        let per_chunk = crate::sampling::CHUNK * dim;
        let slices: Vec<&[f64]> = self.points.chunks(per_chunk).collect();
        let parts = crate::sampling::par_map(&slices, |slice| {
            let mut counts = vec![0usize; q];
            for p in slice.chunks(dim) {
                let mut best = 0;
                let mut value = f64::INFINITY;
                for (i, (c, k)) in cluster.centers().iter().zip(cluster.curvatures()).enumerate() {
                    let f = c.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + k;
                    if f < value {
                        value = f;
                        best = i;
                    }
                }
                counts[best] += 1;
            }
            counts
        });
        let mut counts = vec![0usize; q];
        for part in parts {
            for (c, v) in counts.iter_mut().zip(part) {
                *c += v;
            }
        }
        let n = self.len().max(1) as f64;
        counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Integrates `f` over the part of the carrier of `{i, j}` lying in the interface closure.
///
/// `f(p, out)` writes `width` integrand values. Points off the interface contribute zero.
/// Returns the accumulator and the factor turning sample means into normalised integrals,
/// or `None` when the carrier misses the sphere.
pub(crate) fn integrate_interface<F>(
    cluster: &Cluster,
    i: usize,
    j: usize,
    samples: usize,
    seed: u64,
    width: usize,
    f: F,
) -> Result<Option<(Accumulator, f64)>>
where
    F: Fn(&DVector<f64>, &mut [f64]) + Sync,
{
    integrate_meeting_set(cluster, &[i, j], samples, seed, width, f)
}

/// Like [`integrate_interface`] for an arbitrary set of meeting cells.
pub(crate) fn integrate_meeting_set<F>(
    cluster: &Cluster,
    cells: &[usize],
    samples: usize,
    seed: u64,
    width: usize,
    f: F,
) -> Result<Option<(Accumulator, f64)>>
where
    F: Fn(&DVector<f64>, &mut [f64]) + Sync,
{
    let Some(carrier) = cluster.carrier(cells)? else {
        return Ok(None);
    };
    let key = stream_key(TAG_SURFACE, cells);
    let parts = map_chunks(samples, seed, key, |rng, len| {
        let mut acc = Accumulator::new(width);
        let mut buf = vec![0.0; width];
        for _ in 0..len {
            let p = carrier.sample(rng);
            if cluster.is_meeting_point(&carrier.cells, &p, 0.0) {
                buf.iter_mut().for_each(|x| *x = 0.0);
                f(&p, &mut buf);
                acc.push(&buf);
            } else {
                acc.push_zero();
            }
        }
        acc
    });
    let acc = Accumulator::merge_all(width, &parts);
    let scale = carrier.measure() / sphere_area(cluster.n());
    Ok(Some((acc, scale)))
}

/// Normalised measure of `Σ_ij`; symmetric in `i` and `j` for a fixed seed.
pub fn interface_area(
    cluster: &Cluster,
    i: usize,
    j: usize,
    samples: usize,
    seed: u64,
) -> Result<MeasureReport> {
    Ok(
        match integrate_interface(cluster, i, j, samples, seed, 1, |_, out| out[0] = 1.0)? {
            Some((acc, scale)) => MeasureReport::from_acc(&acc, 0, scale, seed, Normalization::Sphere),
            None => MeasureReport::zero(samples, seed, Normalization::Sphere),
        },
    )
}

/// Perimeter `Σ_{i<j} μ^{n−1}(Σ_ij)` on S^n.
pub fn perimeter(cluster: &Cluster, samples: usize, seed: u64) -> Result<PerimeterReport> {
    let q = cluster.q();
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for i in 0..q {
        for j in i + 1..q {
            let report = interface_area(cluster, i, j, samples, seed)?;
            if report.value > 0.0 && cluster.pair_defect(i, j).abs() > EPS_GEO {
                skipped.push((i, j));
                continue;
            }
            pairs.push(PairReport { i, j, report });
        }
    }
    let total = total_of(&pairs, samples, seed, Normalization::Sphere);
    Ok(PerimeterReport {
        pairs,
        total,
        skipped,
    })
}

/// Sampler for one Euclidean interface carrier.
struct EuclidSampler {
    carrier: EuclideanCarrier,
    measure: f64,
    disk_radius: f64,
}

impl EuclidSampler {
    fn new(view: &EuclideanView, i: usize, j: usize, bound: f64) -> Option<Self> {
        let n = view.n();
        let carrier = view.carrier(i, j);
        let (measure, disk_radius) = match &carrier {
            EuclideanCarrier::Empty => return None,
            EuclideanCarrier::Sphere { radius, .. } => {
                (sphere_area(n - 1) * radius.powi(n as i32 - 1), 0.0)
            }
            EuclideanCarrier::Plane { .. } => {
                let r = 2.0 * bound;
                (ball_volume(n - 1) * r.powi(n as i32 - 1), r)
            }
        };
        Some(Self {
            carrier,
            measure,
            disk_radius,
        })
    }

    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match &self.carrier {
            EuclideanCarrier::Sphere { center, radius } => {
                center + on_sphere(rng, center.len()) * *radius
            }
            EuclideanCarrier::Plane { normal, foot } => {
                let d = normal.len();
                if d == 1 {
                    return foot.clone();
                }
                // Uniform in the (d−1)-disk orthogonal to `normal`.
                let mut g = gaussian_vector(rng, d);
                let s = normal.dot(&g);
                g.axpy(-s, normal, 1.0);
                let g = g.normalize();
                let u: f64 = rng.random();
                foot + g * (self.disk_radius * u.powf(1.0 / (d - 1) as f64))
            }
            EuclideanCarrier::Empty => unreachable!("empty carriers are not sampled"),
        }
    }
}

fn euclid_on_interface(view: &EuclideanView, i: usize, j: usize, x: &DVector<f64>) -> bool {
    let f = view.functionals(x);
    let top = f[i].max(f[j]);
    (0..f.len())
        .filter(|&l| l != i && l != j)
        .all(|l| f[l] > top)
}

/// Integrates `f` over the Euclidean interface `Σ^R_ij` inside the ball of radius `bound`.
///
/// Fails with [`Error::Unbounded`] if a sampled interface point lies outside the ball.
pub(crate) fn integrate_euclidean_interface<F>(
    view: &EuclideanView,
    i: usize,
    j: usize,
    bound: f64,
    samples: usize,
    seed: u64,
    width: usize,
    f: F,
) -> Result<Option<(Accumulator, f64)>>
where
    F: Fn(&DVector<f64>, &mut [f64]) + Sync,
{
    let Some(sampler) = EuclidSampler::new(view, i, j, bound) else {
        return Ok(None);
    };
    let key = stream_key(TAG_EUCLID_SURFACE, &[i, j]);
    let parts = map_chunks(samples, seed, key, |rng, len| {
        let mut acc = Accumulator::new(width);
        let mut buf = vec![0.0; width];
        let mut escaped = false;
        for _ in 0..len {
            let x = sampler.sample(rng);
            if euclid_on_interface(view, i, j, &x) {
                if x.norm() > bound {
                    escaped = true;
                }
                buf.iter_mut().for_each(|v| *v = 0.0);
                f(&x, &mut buf);
                acc.push(&buf);
            } else {
                acc.push_zero();
            }
        }
        (acc, escaped)
    });
    if parts.iter().any(|(_, e)| *e) {
        return Err(Error::Unbounded {
            i: i.min(j),
            j: i.max(j),
        });
    }
    let accs: Vec<Accumulator> = parts.into_iter().map(|(a, _)| a).collect();
    Ok(Some((Accumulator::merge_all(width, &accs), sampler.measure)))
}

/// Lebesgue volumes of bounded cells and interface areas of a Euclidean view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EuclideanReport {
    /// `None` for the unbounded cell.
    pub volumes: Vec<Option<MeasureReport>>,
    pub unbounded_cell: usize,
    pub pairs: Vec<PairReport>,
    pub total_perimeter: MeasureReport,
}

/// Volumes and perimeter of the Euclidean picture inside the ball of radius `bound`.
///
/// Every interface is sampled first; if any of them leaves the ball the estimate is
/// refused, which also guarantees that the bounded cells lie inside the ball.
pub fn euclidean_volumes_perimeter(
    view: &EuclideanView,
    bound: f64,
    samples: usize,
    seed: u64,
) -> Result<EuclideanReport> {
    let q = view.q();
    let n = view.n();
    let mut pairs = Vec::new();
    for i in 0..q {
        for j in i + 1..q {
            let report = match integrate_euclidean_interface(
                view,
                i,
                j,
                bound,
                samples,
                seed,
                1,
                |_, out| out[0] = 1.0,
            )? {
                Some((acc, m)) => MeasureReport::from_acc(&acc, 0, m, seed, Normalization::Lebesgue),
                None => MeasureReport::zero(samples, seed, Normalization::Lebesgue),
            };
            pairs.push(PairReport { i, j, report });
        }
    }
    let key = stream_key(TAG_EUCLID_VOLUME, &[]);
    let parts = map_chunks(samples, seed, key, |rng, len| {
        let mut counts = vec![0usize; q];
        for _ in 0..len {
            let x = in_ball(rng, n, bound);
            counts[view.argmin(&x)] += 1;
        }
        counts
    });
    let mut counts = vec![0usize; q];
    for part in parts {
        for (c, v) in counts.iter_mut().zip(part) {
            *c += v;
        }
    }
    let ball = ball_volume(n) * bound.powi(n as i32);
    let unbounded = view.pole_cell();
    let volumes = binomial_reports(&counts, samples, seed, ball, Normalization::Lebesgue)
        .into_iter()
        .enumerate()
        .map(|(i, r)| (i != unbounded).then_some(r))
        .collect();
    Ok(EuclideanReport {
        volumes,
        unbounded_cell: unbounded,
        total_perimeter: total_of(&pairs, samples, seed, Normalization::Lebesgue),
        pairs,
    })
}

/// Tensor field integrated by [`surface_moment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceTensor {
    /// `n ⊗ n`.
    NormalNormal,
    /// `n ⊗ c` with `c` the quasi-centre of the interface.
    NormalCenter,
    /// The identity, i.e. the area times `Id`.
    Identity,
    /// `n ⊗ n − (1/d) Id` where `d` is the dimension of the normal's space.
    TracelessNormal,
}

/// Where a surface integral is taken.
#[derive(Debug, Clone, Copy)]
pub enum Surface<'a> {
    Sphere(&'a Cluster),
    /// Euclidean picture restricted to the ball of radius `bound`.
    Euclidean { view: &'a EuclideanView, bound: f64 },
}

fn tensor_entries(which: SurfaceTensor, normal: &DVector<f64>, center: &DVector<f64>, out: &mut [f64]) {
    let d = normal.len();
    for a in 0..d {
        for b in 0..d {
            let delta = if a == b { 1.0 } else { 0.0 };
            out[a * d + b] = match which {
                SurfaceTensor::NormalNormal => normal[a] * normal[b],
                SurfaceTensor::NormalCenter => normal[a] * center[b],
                SurfaceTensor::Identity => delta,
                SurfaceTensor::TracelessNormal => normal[a] * normal[b] - delta / d as f64,
            };
        }
    }
}

/// Matrix of integrals of `which` over the union of all interfaces.
///
/// Entry `(a, b)` of the result is an estimate with its own standard error; the errors
/// of different interfaces are combined in quadrature.
pub fn surface_moment(
    surface: Surface<'_>,
    which: SurfaceTensor,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<MeasureReport>>> {
    let (q, d, norm) = match surface {
        Surface::Sphere(c) => (c.q(), c.n() + 1, Normalization::Sphere),
        Surface::Euclidean { view, .. } => (view.q(), view.n(), Normalization::Lebesgue),
    };
    let width = d * d;
    let mut value = DMatrix::<f64>::zeros(d, d);
    let mut var = DMatrix::<f64>::zeros(d, d);
    for i in 0..q {
        for j in i + 1..q {
            let result = match surface {
                Surface::Sphere(c) => {
                    let (cij, _) = c.pair(i, j);
                    integrate_interface(c, i, j, samples, seed, width, |p, out| {
                        tensor_entries(which, &c.normal(i, j, p), &cij, out)
                    })?
                }
                Surface::Euclidean { view, bound } => {
                    let (cij, _, _) = view.pair(i, j);
                    integrate_euclidean_interface(view, i, j, bound, samples, seed, width, |x, out| {
                        tensor_entries(which, &view.normal(i, j, x), &cij, out)
                    })?
                }
            };
            let Some((acc, scale)) = result else { continue };
            for a in 0..d {
                for b in 0..d {
                    let (v, s) = acc.estimate(a * d + b, scale);
                    value[(a, b)] += v;
                    var[(a, b)] += s * s;
                }
            }
        }
    }
    Ok((0..d)
        .map(|a| {
            (0..d)
                .map(|b| MeasureReport {
                    value: value[(a, b)],
                    std_error: var[(a, b)].sqrt(),
                    samples,
                    seed,
                    normalization: norm,
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projections::view_with_pole;
    use nalgebra::dvector;
    use std::f64::consts::PI;

    fn halves(n: usize, axis: usize) -> Cluster {
        let mut c = DVector::zeros(n + 1);
        c[axis] = 0.5;
        Cluster::new(n, vec![c.clone(), -c], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn halves_have_equal_volume() {
        let v = cell_volumes(&halves(2, 0), 200_000, 1);
        assert!(v[0].within(0.5, 3.0, 0.0) && v[1].within(0.5, 3.0, 0.0));
        assert!((v[0].value + v[1].value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn great_circle_has_half_the_mass() {
        // Length 2π on a sphere of area 4π, and the whole carrier is the interface.
        let p = perimeter(&halves(2, 1), 10_000, 3).unwrap();
        assert!((p.total.value - 0.5).abs() < 1e-12);
        assert_eq!(p.total.std_error, 0.0);
    }

    #[test]
    fn interface_estimate_is_symmetric() {
        let c = Cluster::new(
            2,
            vec![
                dvector![0.5, 0.2, -0.1],
                dvector![-0.4, 0.3, 0.0],
                dvector![-0.1, -0.5, 0.1],
            ],
            vec![0.1, -0.3, 0.2],
        )
        .unwrap();
        let a = interface_area(&c, 0, 2, 5000, 17).unwrap();
        let b = interface_area(&c, 2, 0, 5000, 17).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_samples_agree_with_fresh_volumes() {
        let c = halves(3, 2);
        let set = SphereSamples::draw(3, 50_000, 5);
        let fresh = cell_volumes(&c, 50_000, 5);
        let frac = set.cell_fractions(&c);
        for (f, r) in frac.iter().zip(&fresh) {
            assert_eq!(*f, r.value);
        }
    }

    #[test]
    fn unit_ball_volume_and_area() {
        let mut e = DVector::zeros(4);
        e[3] = 0.5;
        let c = Cluster::new(3, vec![e.clone(), -e.clone()], vec![0.0, 0.0]).unwrap();
        let view = view_with_pole(&c, &(e * 2.0)).unwrap();
        let r = euclidean_volumes_perimeter(&view, 1.5, 200_000, 8).unwrap();
        assert_eq!(r.unbounded_cell, 1);
        assert!(r.volumes[1].is_none());
        assert!(r.volumes[0].unwrap().within(4.0 * PI / 3.0, 3.0, 0.0));
        assert!((r.total_perimeter.value - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn unit_sphere_second_moment() {
        // ∫_{S²} u uᵀ dA = (4π/3) Id by symmetry.
        let mut e = DVector::zeros(4);
        e[3] = 0.5;
        let c = Cluster::new(3, vec![e.clone(), -e.clone()], vec![0.0, 0.0]).unwrap();
        let view = view_with_pole(&c, &(e * 2.0)).unwrap();
        let m = surface_moment(
            Surface::Euclidean { view: &view, bound: 1.5 },
            SurfaceTensor::NormalNormal,
            200_000,
            4,
        )
        .unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let target = if a == b { 4.0 * PI / 3.0 } else { 0.0 };
                assert!(m[a][b].within(target, 4.0, 1e-12), "{a}{b}: {:?}", m[a][b]);
            }
        }
    }

    #[test]
    fn hyperplane_reaching_the_bound_is_reported() {
        // Halves split by a plane through the pole: its image is an unbounded line.
        let c = halves(2, 0);
        let view = view_with_pole(&c, &dvector![0.0, 0.6, 0.8]);
        // The pole lies on the interface, so no view exists from there.
        assert!(view.is_err());
        let c = Cluster::new(
            2,
            vec![dvector![0.5, 0.0, -0.1], dvector![-0.5, 0.0, 0.1]],
            vec![0.1, -0.1],
        )
        .unwrap();
        let view = crate::projections::to_euclidean(&c, None).unwrap();
        let r = euclidean_volumes_perimeter(&view, 1.0, 4096, 1);
        assert!(matches!(r, Err(Error::Unbounded { i: 0, j: 1 })), "{r:?}");
    }
}
