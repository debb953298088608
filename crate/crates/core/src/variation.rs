//! Vector and scalar fields on clusters, first variations, Jacobi operator closed forms and
//! the scalar index form on S^n.
//!
//! Interfaces are pieces of round spheres, so their second fundamental form is `k_ij·Id`,
//! `‖II‖² = (n−1)k_ij²`, and `Ric(n, n) = n − 1`. Integrals are normalised by `|S^n|` as
//! in [`crate::measure`].

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cluster::{Cluster, Membership};
use crate::construct::transform;
use crate::error::{Error, Result};
use crate::linalg::null_space;
use crate::measure::{
    integrate_interface, integrate_meeting_set, perimeter_difference, volume_difference,
    MeasureReport, Normalization,
};
use crate::minkowski::{LorentzMatrix, EPS_GEO};

/// Default step for flow derivatives of Monte Carlo quantities.
pub const MC_STEP: f64 = 1e-3;
/// Default step for flow derivatives of closed-form quantities.
pub const CURVATURE_STEP: f64 = 1e-4;
/// Membership tolerance used to accept a point as lying on an interface.
pub const ON_INTERFACE_TOL: f64 = 1e-7;

/// A field on S^n or on the interfaces of a cluster.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    /// Conformal field `θ − ⟨θ,p⟩p` generating the boosts.
    Mobius { theta: DVector<f64> },
    /// Killing field rotating coordinate `from` toward coordinate `to`.
    Rotation { from: usize, to: usize },
    /// Scalar field `(a_i − a_j)⟨N,p⟩` on `Σ_ij`.
    Skew { weights: DVector<f64>, north: DVector<f64> },
    /// Scalar field `⟨θ,p⟩`, oriented by the lower index of each interface.
    Coordinate { theta: DVector<f64> },
}

/// A tangent vector or a scalar, depending on the kind of field.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Tangent(DVector<f64>),
    Scalar(f64),
}

fn check_ambient(v: &DVector<f64>, dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
    }
    Ok(())
}

impl FieldSpec {
    /// Checks dimensions against a cluster and the zero-sum condition on skew weights.
    pub fn validate(&self, cluster: &Cluster) -> Result<()> {
        let dim = cluster.n() + 1;
        match self {
            FieldSpec::Mobius { theta } | FieldSpec::Coordinate { theta } => check_ambient(theta, dim),
            FieldSpec::Rotation { from, to } => {
                for &c in [from, to] {
                    if c >= dim {
                        return Err(Error::IndexOutOfRange { index: c, q: dim });
                    }
                }
                if from == to {
                    return Err(Error::RepeatedIndex);
                }
                Ok(())
            }
            FieldSpec::Skew { weights, north } => {
                check_ambient(north, dim)?;
                if weights.len() != cluster.q() {
                    return Err(Error::DimensionMismatch { expected: cluster.q(), found: weights.len() });
                }
                let residual = weights.sum().abs();
                if residual > EPS_GEO * weights.amax().max(1.0) {
                    return Err(Error::NotZeroSum { what: "skew weights", residual });
                }
                Ok(())
            }
        }
    }

    /// True for fields whose flow is an isometry.
    pub fn is_killing(&self) -> bool {
        matches!(self, FieldSpec::Rotation { .. })
    }
}

/// Value of a field at `p`; scalar fields need the interface `(i, j)` they are read on.
pub fn field_value(spec: &FieldSpec, p: &DVector<f64>, pair: Option<(usize, usize)>) -> Result<FieldValue> {
    if ((p.norm_squared() - 1.0).abs()) > 1e-9 {
        return Err(Error::OffSphere { deviation: (p.norm() - 1.0).abs() });
    }
    Ok(match spec {
        FieldSpec::Mobius { theta } => {
            check_ambient(theta, p.len())?;
            FieldValue::Tangent(theta - p * theta.dot(p))
        }
        FieldSpec::Rotation { from, to } => {
            let mut v = DVector::zeros(p.len());
            v[*to] += p[*from];
            v[*from] -= p[*to];
            FieldValue::Tangent(v)
        }
        FieldSpec::Skew { weights, north } => {
            let (i, j) = pair.ok_or_else(|| Error::Invalid("skew fields live on interfaces".into()))?;
            FieldValue::Scalar((weights[i] - weights[j]) * north.dot(p))
        }
        FieldSpec::Coordinate { theta } => {
            let sign = match pair {
                Some((i, j)) if i > j => -1.0,
                _ => 1.0,
            };
            FieldValue::Scalar(sign * theta.dot(p))
        }
    })
}

/// Normal speed of a field on `Σ_ij`, measured along `n_ij`.
fn normal_speed(cluster: &Cluster, spec: &FieldSpec, i: usize, j: usize, p: &DVector<f64>) -> f64 {
    match field_value(spec, p, Some((i, j))) {
        Ok(FieldValue::Tangent(x)) => x.dot(&cluster.normal(i, j, p)),
        Ok(FieldValue::Scalar(s)) => s,
        Err(_) => f64::NAN,
    }
}

/// `∫_{Σ_ij} X^{n_ij}` for every pair `i < j` whose interface is well formed.
fn interface_fluxes(
    cluster: &Cluster,
    spec: &FieldSpec,
    samples: usize,
    seed: u64,
) -> Result<Vec<(usize, usize, MeasureReport)>> {
    spec.validate(cluster)?;
    let q = cluster.q();
    let mut out = Vec::new();
    for i in 0..q {
        for j in i + 1..q {
            if cluster.pair_defect(i, j).abs() > EPS_GEO {
                continue;
            }
            let est = integrate_interface(cluster, i, j, samples, seed, 1, |p, o| {
                o[0] = normal_speed(cluster, spec, i, j, p)
            })?;
            let report = match est {
                Some((acc, scale)) => MeasureReport::from_acc(&acc, 0, scale, seed, Normalization::Sphere),
                None => MeasureReport::zero(samples, seed, Normalization::Sphere),
            };
            out.push((i, j, report));
        }
    }
    Ok(out)
}

/// `δV_i = Σ_{j≠i} ∫_{Σ_ij} X^{n_ij}` for every cell.
pub fn first_variation_volume(
    cluster: &Cluster,
    spec: &FieldSpec,
    samples: usize,
    seed: u64,
) -> Result<Vec<MeasureReport>> {
    let fluxes = interface_fluxes(cluster, spec, samples, seed)?;
    Ok(volume_from_fluxes(cluster.q(), &fluxes, samples, seed))
}

fn volume_from_fluxes(
    q: usize,
    fluxes: &[(usize, usize, MeasureReport)],
    samples: usize,
    seed: u64,
) -> Vec<MeasureReport> {
    let mut value = vec![0.0; q];
    let mut var = vec![0.0; q];
    for &(i, j, r) in fluxes {
        value[i] += r.value;
        value[j] -= r.value;
        var[i] += r.std_error.powi(2);
        var[j] += r.std_error.powi(2);
    }
    value
        .into_iter()
        .zip(var)
        .map(|(v, s)| MeasureReport { value: v, std_error: s.sqrt(), samples, seed, normalization: Normalization::Sphere })
        .collect()
}

/// First variation of perimeter, with the Lagrange rearrangement computed alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaVariation {
    /// `Σ_{i<j} (n−1)k_ij ∫_{Σ_ij} X^{n_ij}`.
    pub area: MeasureReport,
    /// `⟨λ, δV⟩` with `λ_i = (n−1)k_i`.
    pub lagrange: f64,
    pub volume: Vec<MeasureReport>,
}

impl AreaVariation {
    pub fn lagrange_gap(&self) -> f64 {
        (self.area.value - self.lagrange).abs()
    }
}

pub fn first_variation_area(
    cluster: &Cluster,
    spec: &FieldSpec,
    samples: usize,
    seed: u64,
) -> Result<AreaVariation> {
    let fluxes = interface_fluxes(cluster, spec, samples, seed)?;
    let m = cluster.n() as f64 - 1.0;
    let k = cluster.curvatures();
    let mut value = 0.0;
    let mut var = 0.0;
    for &(i, j, r) in &fluxes {
        let h = m * (k[i] - k[j]);
        value += h * r.value;
        var += (h * r.std_error).powi(2);
    }
    let volume = volume_from_fluxes(cluster.q(), &fluxes, samples, seed);
    let lagrange = volume.iter().zip(k).map(|(v, ki)| m * ki * v.value).sum();
    Ok(AreaVariation {
        area: MeasureReport { value, std_error: var.sqrt(), samples, seed, normalization: Normalization::Sphere },
        lagrange,
        volume,
    })
}

fn boosted(cluster: &Cluster, theta: &DVector<f64>, t: f64) -> Result<Cluster> {
    transform(cluster, &LorentzMatrix::boost(theta, t)?)
}

fn halve_difference(mut r: MeasureReport, h: f64) -> MeasureReport {
    r.value /= 2.0 * h;
    r.std_error /= 2.0 * h;
    r
}

/// Central difference of cell volumes along the boost flow `exp(tB_θ)`.
pub fn volume_flow_derivative(
    cluster: &Cluster,
    theta: &DVector<f64>,
    h: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<MeasureReport>> {
    let plus = boosted(cluster, theta, h)?;
    let minus = boosted(cluster, theta, -h)?;
    Ok(volume_difference(&plus, &minus, samples, seed)?
        .into_iter()
        .map(|r| halve_difference(r, h))
        .collect())
}

/// Central difference of the perimeter along the boost flow `exp(tB_θ)`.
pub fn perimeter_flow_derivative(
    cluster: &Cluster,
    theta: &DVector<f64>,
    h: f64,
    samples: usize,
    seed: u64,
) -> Result<MeasureReport> {
    let plus = boosted(cluster, theta, h)?;
    let minus = boosted(cluster, theta, -h)?;
    Ok(halve_difference(perimeter_difference(&plus, &minus, samples, seed)?, h))
}

fn require_interface(cluster: &Cluster, i: usize, j: usize, p: &DVector<f64>) -> Result<()> {
    match cluster.cell_of(p, ON_INTERFACE_TOL)? {
        Membership::Tie(cells) if cells.contains(&i) && cells.contains(&j) => Ok(()),
        _ => Err(Error::NotOnInterface { i, j }),
    }
}

/// `L_Jac` applied to the normal component of `spec` on `Σ_ij` at `p`.
pub fn jacobi_closed_form(
    cluster: &Cluster,
    i: usize,
    j: usize,
    spec: &FieldSpec,
    p: &DVector<f64>,
) -> Result<f64> {
    spec.validate(cluster)?;
    require_interface(cluster, i, j, p)?;
    let m = cluster.n() as f64 - 1.0;
    let (c, k) = cluster.pair(i, j);
    let normal = &c + p * k;
    // L_Jac⟨v,p⟩ = ‖II‖²⟨v,p⟩ − (n−1)k⟨v,n⟩ on a sphere of curvature k.
    let height = |v: &DVector<f64>| m * k * k * v.dot(p) - m * k * v.dot(&normal);
    Ok(match spec {
        FieldSpec::Mobius { theta } => m * theta.dot(&c),
        FieldSpec::Rotation { .. } => 0.0,
        FieldSpec::Coordinate { theta } => height(theta) * if i < j { 1.0 } else { -1.0 },
        FieldSpec::Skew { weights, north } => (weights[i] - weights[j]) * height(north),
    })
}

/// Signed curvature of the sphere `{⟨m,x⟩ = d}`, `|m| = 1`, oriented so that `inside`
/// lies on its negative side.
fn fitted_curvature(points: &[DVector<f64>], inside: &DVector<f64>) -> Result<f64> {
    let dim = inside.len();
    let mut a = DMatrix::zeros(points.len(), dim + 1);
    for (r, x) in points.iter().enumerate() {
        for c in 0..dim {
            a[(r, c)] = x[c];
        }
        a[(r, dim)] = -1.0;
    }
    let ns = null_space(&a);
    if ns.ncols() != 1 {
        return Err(Error::RankDeficient { which: "image points", rank: dim + 1 - ns.ncols(), expected: dim });
    }
    let v = ns.column(0);
    let norm = v.rows(0, dim).norm();
    let (m, mut d) = (v.rows(0, dim) / norm, v[dim] / norm);
    if m.dot(inside) - d > 0.0 {
        d = -d;
    }
    Ok(-d / (1.0 - d * d).sqrt())
}

/// Curvature of the image of the carrier of `Σ_ij` under a Lorentz matrix, measured from
/// mapped points.
fn image_curvature(cluster: &Cluster, i: usize, j: usize, u: &LorentzMatrix) -> Result<f64> {
    let sphere = cluster.interface_sphere(i, j)?;
    let c = &sphere.quasi_center;
    let tangent = null_space(&DMatrix::from_row_slice(1, c.len(), c.as_slice()));
    let r = sphere.euclid_radius;
    let mut points: Vec<DVector<f64>> = (0..tangent.ncols())
        .map(|a| &sphere.euclid_center + tangent.column(a) * r)
        .collect();
    points.push(&sphere.euclid_center - tangent.column(0) * r);
    let mapped: Vec<_> = points.iter().map(|p| u.act_on_sphere(p)).collect();
    let inside = u.act_on_sphere(&(-c / c.norm()));
    fitted_curvature(&mapped, &inside)
}

/// Closed form against a flow finite difference for a boost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiCheck {
    /// `(n−1)⟨θ, c_ij⟩`.
    pub closed_form: f64,
    /// `−d/dt[(n−1)k_ij(t)]` at `t = 0` by central differences of fitted image spheres.
    pub finite_difference: f64,
    pub error: f64,
}

pub fn jacobi_flow_check(cluster: &Cluster, i: usize, j: usize, theta: &DVector<f64>, h: f64) -> Result<JacobiCheck> {
    let spec = FieldSpec::Mobius { theta: theta.clone() };
    spec.validate(cluster)?;
    let m = cluster.n() as f64 - 1.0;
    let (c, _) = cluster.pair(i, j);
    let closed_form = m * theta.dot(&c);
    let kp = image_curvature(cluster, i, j, &LorentzMatrix::boost(theta, h)?)?;
    let km = image_curvature(cluster, i, j, &LorentzMatrix::boost(theta, -h)?)?;
    let finite_difference = -m * (kp - km) / (2.0 * h);
    Ok(JacobiCheck { closed_form, finite_difference, error: (closed_form - finite_difference).abs() })
}

/// Largest deviation of the symmetrised covariant derivative of `W_θ` at `p` from
/// `−⟨p,θ⟩·Id`, with derivatives taken by central differences along geodesics.
pub fn conformal_factor_residual(theta: &DVector<f64>, p: &DVector<f64>, h: f64) -> Result<f64> {
    check_ambient(theta, p.len())?;
    let spec = FieldSpec::Mobius { theta: theta.clone() };
    let frame = null_space(&DMatrix::from_row_slice(1, p.len(), p.as_slice()));
    let d = frame.ncols();
    let w = |x: &DVector<f64>| match field_value(&spec, x, None) {
        Ok(FieldValue::Tangent(v)) => Ok(v),
        Ok(FieldValue::Scalar(_)) => unreachable!("Möbius fields are tangent"),
        Err(e) => Err(e),
    };
    let mut grad = DMatrix::zeros(d, d);
    for a in 0..d {
        let e = frame.column(a).into_owned();
        let fwd = w(&(p * h.cos() + &e * h.sin()))?;
        let back = w(&(p * h.cos() - &e * h.sin()))?;
        let deriv = (fwd - back) / (2.0 * h);
        for b in 0..d {
            grad[(a, b)] = deriv.dot(&frame.column(b));
        }
    }
    let sym = (&grad + grad.transpose()) * 0.5;
    let target = -p.dot(theta);
    Ok((0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .map(|(a, b)| (sym[(a, b)] - if a == b { target } else { 0.0 }).abs())
        .fold(0.0, f64::max))
}

/// A scalar field `f = {f_ij}` on the interfaces with an analytic ambient gradient.
///
/// Values are oriented: `f_ji = −f_ij`.
pub trait InterfaceField: Sync {
    fn value(&self, i: usize, j: usize, p: &DVector<f64>) -> f64;
    fn gradient(&self, i: usize, j: usize, p: &DVector<f64>) -> DVector<f64>;
}

/// `f_ij = (a_i − a_j)⟨N, p⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewField {
    pub weights: DVector<f64>,
    pub north: DVector<f64>,
}

impl SkewField {
    pub fn new(cluster: &Cluster, weights: DVector<f64>, north: DVector<f64>) -> Result<Self> {
        FieldSpec::Skew { weights: weights.clone(), north: north.clone() }.validate(cluster)?;
        Ok(Self { weights, north })
    }

    /// True when every quasi-centre is orthogonal to `north`.
    pub fn is_perpendicular(&self, cluster: &Cluster, tol: f64) -> bool {
        cluster.centers().iter().all(|c| c.dot(&self.north).abs() <= tol)
    }
}

impl InterfaceField for SkewField {
    fn value(&self, i: usize, j: usize, p: &DVector<f64>) -> f64 {
        (self.weights[i] - self.weights[j]) * self.north.dot(p)
    }

    fn gradient(&self, i: usize, j: usize, _p: &DVector<f64>) -> DVector<f64> {
        &self.north * (self.weights[i] - self.weights[j])
    }
}

/// `f_ij = ⟨θ, p⟩` for `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    pub direction: DVector<f64>,
}

impl InterfaceField for HeightField {
    fn value(&self, i: usize, j: usize, p: &DVector<f64>) -> f64 {
        let s = if i < j { 1.0 } else { -1.0 };
        s * self.direction.dot(p)
    }

    fn gradient(&self, i: usize, j: usize, _p: &DVector<f64>) -> DVector<f64> {
        let s = if i < j { 1.0 } else { -1.0 };
        &self.direction * s
    }
}

/// Which index form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexFormMode {
    /// Interface and triple-junction terms.
    #[default]
    Full,
    /// Interface term only.
    Traced,
}

/// Index form estimate split into its parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexFormReport {
    pub interface: MeasureReport,
    pub boundary: MeasureReport,
    pub total: MeasureReport,
    pub mode: IndexFormMode,
    /// Triples whose junction could not be sampled.
    pub failed_triples: Vec<(usize, usize, usize)>,
}

/// Scalar index form of `field` on a cluster in S^n.
///
/// The interface term integrates `|∇ᵗf_ij|² − (n−1)(1 + k_ij²) f_ij²`. The junction term
/// is `−Σ_{i<j} Σ_k ∫_{Σ_ijk} f_ij² (k_ik + k_jk)/√3`.
pub fn index_form_q0(
    cluster: &Cluster,
    field: &dyn InterfaceField,
    mode: IndexFormMode,
    samples: usize,
    seed: u64,
) -> Result<IndexFormReport> {
    let q = cluster.q();
    let m = cluster.n() as f64 - 1.0;
    let k = cluster.curvatures();
    let mut inner = (0.0, 0.0);
    for i in 0..q {
        for j in i + 1..q {
            if cluster.pair_defect(i, j).abs() > EPS_GEO {
                continue;
            }
            let kij = k[i] - k[j];
            let est = integrate_interface(cluster, i, j, samples, seed, 1, |p, o| {
                let n = cluster.normal(i, j, p);
                let mut g = field.gradient(i, j, p);
                let gp = g.dot(p);
                g.axpy(-gp, p, 1.0);
                let gn = g.dot(&n);
                g.axpy(-gn, &n, 1.0);
                let f = field.value(i, j, p);
                o[0] = g.norm_squared() - m * (1.0 + kij * kij) * f * f;
            })?;
            if let Some((acc, scale)) = est {
                let (v, s) = acc.estimate(0, scale);
                inner.0 += v;
                inner.1 += s * s;
            }
        }
    }
    let mut edge = (0.0, 0.0);
    let mut failed_triples = Vec::new();
    if mode == IndexFormMode::Full && cluster.n() >= 2 {
        for a in 0..q {
            for b in a + 1..q {
                for c in b + 1..q {
                    let cells = [a, b, c];
                    let est = integrate_meeting_set(cluster, &cells, samples, seed, 1, |p, o| {
                        let mut total = 0.0;
                        for (x, y, z) in [(a, b, c), (a, c, b), (b, c, a)] {
                            let f = field.value(x, y, p);
                            total += f * f * ((k[x] - k[z]) + (k[y] - k[z]));
                        }
                        o[0] = -total / 3f64.sqrt();
                    });
                    match est {
                        Ok(Some((acc, scale))) => {
                            let (v, s) = acc.estimate(0, scale);
                            edge.0 += v;
                            edge.1 += s * s;
                        }
                        Ok(None) => {}
                        Err(Error::DegenerateIntersection { .. }) => failed_triples.push((a, b, c)),
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    let report = |(v, var): (f64, f64)| MeasureReport {
        value: v,
        std_error: f64::sqrt(var),
        samples,
        seed,
        normalization: Normalization::Sphere,
    };
    Ok(IndexFormReport {
        interface: report(inner),
        boundary: report(edge),
        total: report((inner.0 + edge.0, inner.1 + edge.1)),
        mode,
        failed_triples,
    })
}
