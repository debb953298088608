//! Constructors for standard bubbles and the Lorentz action on clusters.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::linalg::{zero_sum_basis, zero_sum_projector};
use crate::measure::SphereSamples;
use crate::minkowski::{is_lorentz, LorentzMatrix, EPS_GEO, EPS_LORENTZ};

fn check_cells(n: usize, q: usize) -> Result<()> {
    if q < 2 || q > n + 2 {
        return Err(Error::CellCount {
            n,
            q,
            reason: "standard bubbles need 2 <= q <= n+2",
        });
    }
    Ok(())
}

fn pad_rows(rows: &DMatrix<f64>, n: usize) -> Vec<DVector<f64>> {
    (0..rows.nrows())
        .map(|i| {
            let mut v = DVector::zeros(n + 1);
            for c in 0..rows.ncols() {
                v[c] = rows[(i, c)];
            }
            v
        })
        .collect()
}

/// Equal-volume standard bubble: a regular simplex with unit edges, centred at the
/// origin in the first `q − 1` coordinates, and all curvatures zero.
pub fn equal_volume_bubble(n: usize, q: usize) -> Result<Cluster> {
    check_cells(n, q)?;
    // Rows of the zero-sum basis are the vertices e_i/√2 projected to the hyperplane.
    let rows = zero_sum_basis(q) * std::f64::consts::FRAC_1_SQRT_2;
    Cluster::new(n, pad_rows(&rows, n), vec![0.0; q])
}

fn check_curvatures(q: usize, k: &[f64]) -> Result<()> {
    if k.len() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: k.len(),
        });
    }
    let residual = k.iter().sum::<f64>().abs();
    if residual > EPS_GEO * k.iter().fold(1.0f64, |a, x| a.max(x.abs())) {
        return Err(Error::NotZeroSum {
            what: "curvatures",
            residual,
        });
    }
    Ok(())
}

/// Standard bubble with prescribed curvatures.
///
/// The centre matrix `C` is a factor of `G = ½P + kkᵀ` from its eigendecomposition.
/// Eigenpairs are sorted by decreasing eigenvalue and each eigenvector is signed so
/// that its first non-negligible entry is positive.
pub fn bubble_from_curvatures(n: usize, q: usize, k: &[f64]) -> Result<Cluster> {
    check_cells(n, q)?;
    check_curvatures(q, k)?;
    let kv = DVector::from_column_slice(k);
    let g = zero_sum_projector(q) * 0.5 + &kv * kv.transpose();
    let eig = g.symmetric_eigen();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut c = DMatrix::zeros(q, q - 1);
    for (col, &e) in order.iter().take(q - 1).enumerate() {
        let mut v = eig.eigenvectors.column(e).into_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-9).copied() {
            if first < 0.0 {
                v = -v;
            }
        }
        c.set_column(col, &(v * eig.eigenvalues[e].max(0.0).sqrt()));
    }
    Cluster::new(n, pad_rows(&c, n), k.to_vec())
}

/// Standard bubble with prescribed curvatures, depending smoothly on `k`.
///
/// Uses the symmetric square root `G^{1/2} = P/√2 + α kkᵀ` with
/// `√2·α + α²|k|² = 1`, written in the fixed zero-sum basis. Eigenvector ordering makes
/// [`bubble_from_curvatures`] jump when eigenvalues cross, which this chart avoids.
pub fn curvature_chart(n: usize, q: usize, k: &[f64]) -> Result<Cluster> {
    check_cells(n, q)?;
    check_curvatures(q, k)?;
    let kv = DVector::from_column_slice(k);
    let k2 = kv.norm_squared();
    let s2 = std::f64::consts::SQRT_2;
    let alpha = if k2 < 1e-12 {
        1.0 / s2 - k2 / 4.0
    } else {
        2.0 / (s2 + (2.0 + 4.0 * k2).sqrt())
    };
    let root = zero_sum_projector(q) / s2 + &kv * kv.transpose() * alpha;
    let c = root * zero_sum_basis(q);
    Cluster::new(n, pad_rows(&c, n), k.to_vec())
}

/// Options for [`bubble_from_volumes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeSolverOptions {
    pub samples: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when every volume residual is below this.
    pub tol: f64,
    /// Central-difference step for the Jacobian.
    pub step: f64,
}

impl Default for VolumeSolverOptions {
    fn default() -> Self {
        Self {
            samples: crate::measure::DEFAULT_VOLUME_SAMPLES,
            seed: crate::sampling::DEFAULT_SEED,
            max_iter: 30,
            tol: 2e-4,
            step: 1e-3,
        }
    }
}

/// One Newton iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverStep {
    pub curvatures: Vec<f64>,
    pub residual: f64,
    pub damping: f64,
}

/// Result of the volume solver.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeSolution {
    pub cluster: Cluster,
    pub converged: bool,
    /// Number of Newton steps taken.
    pub iterations: usize,
    pub trace: Vec<SolverStep>,
}

/// Standard bubble whose cells have the prescribed volumes.
///
/// Damped Newton in the zero-sum curvature coordinates. The volume map is evaluated on
/// one fixed sample set, so successive residuals share their noise. The Jacobian uses
/// central differences, and a step is halved while it increases the residual. When the
/// iteration budget runs out, the best iterate is returned with `converged = false`.
pub fn bubble_from_volumes(
    n: usize,
    q: usize,
    volumes: &[f64],
    opts: &VolumeSolverOptions,
) -> Result<VolumeSolution> {
    check_cells(n, q)?;
    if volumes.len() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: volumes.len(),
        });
    }
    if volumes.iter().any(|&v| v <= 0.0 || v >= 1.0) || (volumes.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::VolumeTarget);
    }
    let basis = zero_sum_basis(q);
    let target = DVector::from_column_slice(volumes);
    let points = SphereSamples::draw(n, opts.samples, opts.seed);
    let residual = |y: &DVector<f64>| -> Result<DVector<f64>> {
        let k = &basis * y;
        let cluster = curvature_chart(n, q, k.as_slice())?;
        Ok(DVector::from_vec(points.cell_fractions(&cluster)) - &target)
    };

    let mut y = DVector::zeros(q - 1);
    let mut r = residual(&y)?;
    let mut trace = vec![SolverStep {
        curvatures: (&basis * &y).iter().copied().collect(),
        residual: r.amax(),
        damping: 0.0,
    }];
    let mut iterations = 0;
    while r.amax() >= opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let mut jac = DMatrix::zeros(q - 1, q - 1);
        for a in 0..q - 1 {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[a] += opts.step;
            ym[a] -= opts.step;
            let col = basis.transpose() * (residual(&yp)? - residual(&ym)?) / (2.0 * opts.step);
            jac.set_column(a, &col);
        }
        let Some(delta) = jac.lu().solve(&(-(basis.transpose() * &r))) else {
            break;
        };
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let cand = &y + &delta * damping;
            let rc = residual(&cand)?;
            if rc.amax() < r.amax() {
                accepted = Some((cand, rc));
                break;
            }
            damping *= 0.5;
        }
        let Some((ny, nr)) = accepted else {
            break;
        };
        y = ny;
        r = nr;
        trace.push(SolverStep {
            curvatures: (&basis * &y).iter().copied().collect(),
            residual: r.amax(),
            damping,
        });
    }
    let k = &basis * &y;
    Ok(VolumeSolution {
        cluster: curvature_chart(n, q, k.as_slice())?,
        converged: r.amax() < opts.tol,
        iterations,
        trace,
    })
}

/// Image of a cluster under an orthochronous Lorentz matrix, re-centred.
pub fn apply_mobius(cluster: &Cluster, u: &DMatrix<f64>) -> Result<Cluster> {
    let check = is_lorentz(u, EPS_LORENTZ * u.amax().max(1.0).powi(2));
    if !check.is_lorentz {
        return Err(Error::NotLorentz {
            residual: check.residual,
            time_entry: u[(u.nrows() - 1, u.ncols() - 1)],
        });
    }
    if u.nrows() != cluster.n() + 2 {
        return Err(Error::DimensionMismatch {
            expected: cluster.n() + 2,
            found: u.nrows(),
        });
    }
    let ck: Vec<DVector<f64>> = cluster.homogeneous().iter().map(|v| u * v).collect();
    Cluster::from_homogeneous(cluster.n(), &ck)
}

/// [`apply_mobius`] for an already validated matrix.
pub fn transform(cluster: &Cluster, u: &LorentzMatrix) -> Result<Cluster> {
    apply_mobius(cluster, u.matrix())
}
