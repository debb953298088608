//! Minkowski space R^{n+2} with signature (n+1, 1) and the orthochronous Lorentz group.
//!
//! A cluster on S^n is encoded by homogeneous parameters `ck_i = (c_i, −k_i)`, chosen so
//! that `⟨(p, 1), ck_i⟩₁ = ⟨c_i, p⟩ + k_i` is the cell functional at `p`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{null_space, rank, RANK_RTOL};

/// Default tolerance for Lorentz membership.
pub const EPS_LORENTZ: f64 = 1e-9;

/// Default tolerance for geometric identities.
pub const EPS_GEO: f64 = 1e-9;

/// Minkowski scalar product `Σ_{i≤n+1} x_i y_i − x_{n+2} y_{n+2}`.
pub fn minkowski_dot(x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let t = x.len() - 1;
    Ok(x.rows(0, t).dot(&y.rows(0, t)) - x[t] * y[t])
}

/// The metric `J = diag(1, …, 1, −1)` of size `dim`.
pub fn metric(dim: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(dim, dim);
    if dim > 0 {
        j[(dim - 1, dim - 1)] = -1.0;
    }
    j
}

/// Outcome of a Lorentz-membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzCheck {
    pub is_lorentz: bool,
    /// `‖UᵀJU − J‖_max`.
    pub residual: f64,
}

/// Tests `UᵀJU = J` and orthochronicity `U_{n+2,n+2} ≥ 1` within `tol`.
pub fn is_lorentz(u: &DMatrix<f64>, tol: f64) -> LorentzCheck {
    if !u.is_square() || u.nrows() == 0 {
        return LorentzCheck {
            is_lorentz: false,
            residual: f64::INFINITY,
        };
    }
    let d = u.nrows();
    let j = metric(d);
    let residual = (u.transpose() * &j * u - &j).amax();
    LorentzCheck {
        is_lorentz: residual < tol && u[(d - 1, d - 1)] >= 1.0 - tol,
        residual,
    }
}

/// A validated element of the orthochronous Lorentz group.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzMatrix(DMatrix<f64>);

impl LorentzMatrix {
    /// Wraps `u` after checking membership with tolerance `tol`.
    pub fn new(u: DMatrix<f64>, tol: f64) -> Result<Self> {
        let check = is_lorentz(&u, tol);
        if !check.is_lorentz {
            let time_entry = if u.nrows() > 0 && u.is_square() {
                u[(u.nrows() - 1, u.ncols() - 1)]
            } else {
                f64::NAN
            };
            return Err(Error::NotLorentz {
                residual: check.residual,
                time_entry,
            });
        }
        Ok(Self(u))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Spatial rotation `R ⊕ 1` for an orthogonal `R` of size n+1.
    pub fn from_rotation(r: &DMatrix<f64>) -> Result<Self> {
        let s = r.nrows();
        let mut u = DMatrix::identity(s + 1, s + 1);
        u.view_mut((0, 0), (s, s)).copy_from(r);
        Self::new(u, EPS_LORENTZ)
    }

    /// Boost `exp(tB)` along `theta` using the closed hyperbolic form.
    pub fn boost(theta: &DVector<f64>, t: f64) -> Result<Self> {
        Ok(Self(boost_closed_form(theta, t)?))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inverse(&self) -> Self {
        let j = metric(self.dim());
        Self(&j * self.0.transpose() * &j)
    }

    pub fn compose(&self, other: &LorentzMatrix) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.0 * x
    }

    /// The induced conformal map of S^n: `p ↦ x[..n+1] / x_{n+2}` with `x = U(p, 1)`.
    pub fn act_on_sphere(&self, p: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let mut lifted = p.clone().insert_row(d - 1, 1.0);
        lifted = &self.0 * lifted;
        let w = lifted[d - 1];
        lifted.rows(0, d - 1) / w
    }
}

/// Generator `B` with `B_{i,n+2} = B_{n+2,i} = θ_i`.
pub fn boost_generator(theta: &DVector<f64>) -> Result<DMatrix<f64>> {
    if theta.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector);
    }
    let d = theta.len() + 1;
    let mut b = DMatrix::zeros(d, d);
    for i in 0..theta.len() {
        b[(i, d - 1)] = theta[i];
        b[(d - 1, i)] = theta[i];
    }
    Ok(b)
}

/// `exp(tB)` in closed form: a cosh/sinh rotation of the (θ̂, e_{n+2}) plane.
pub fn boost_closed_form(theta: &DVector<f64>, t: f64) -> Result<DMatrix<f64>> {
    let s = theta.norm();
    if s == 0.0 {
        return Err(Error::ZeroVector);
    }
    let d = theta.len() + 1;
    let axis = theta.clone().insert_row(d - 1, 0.0) / s;
    let mut time = DVector::zeros(d);
    time[d - 1] = 1.0;
    let (sh, ch) = ((t * s).sinh(), (t * s).cosh());
    let mut u = DMatrix::identity(d, d);
    u += (&axis * time.transpose() + &time * axis.transpose()) * sh;
    u += (&axis * axis.transpose() + &time * time.transpose()) * (ch - 1.0);
    Ok(u)
}

/// Matrix exponential by scaling and squaring with a degree-6 Padé approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    const P: usize = 6;
    let dim = a.nrows();
    let norm1 = (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = a / 2f64.powi(squarings);

    let mut coeff = 1.0;
    let mut num = DMatrix::identity(dim, dim);
    let mut den = DMatrix::identity(dim, dim);
    let mut power = DMatrix::identity(dim, dim);
    for k in 1..=P {
        coeff *= (P - k + 1) as f64 / ((2 * P - k + 1) * k) as f64;
        power = &power * &x;
        num += &power * coeff;
        den += &power * if k % 2 == 0 { coeff } else { -coeff };
    }
    let mut r = den.lu().solve(&num).expect("Padé denominator is invertible");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Symmetric matrix of Minkowski products of zero-sum homogeneous parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiGram(DMatrix<f64>);

impl MinkowskiGram {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `max |G_ij − H_ij|`.
    pub fn deviation(&self, other: &DMatrix<f64>) -> f64 {
        (&self.0 - other).amax()
    }
}

fn params_matrix(ck: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let d = ck.first().map(|v| v.len()).unwrap_or(0);
    if let Some(bad) = ck.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(ck.len(), d, |i, j| ck[i][j]))
}

/// Gram matrix `G_ij = ⟨ck_i, ck_j⟩₁`, i.e. `CCᵀ − kkᵀ`.
pub fn gram(ck: &[DVector<f64>]) -> Result<MinkowskiGram> {
    let a = params_matrix(ck)?;
    let scale = a.amax().max(1.0);
    let residual = (0..a.ncols())
        .map(|j| a.column(j).sum().abs())
        .fold(0.0, f64::max);
    if residual > EPS_GEO * scale {
        return Err(Error::NotZeroSum {
            what: "homogeneous parameters",
            residual,
        });
    }
    let j = metric(a.ncols());
    Ok(MinkowskiGram(&a * j * a.transpose()))
}

/// Minkowski-orthonormal basis of the complement of the row space of `rows`.
///
/// Returned as columns, spacelike vectors first and the timelike one (if any) last.
fn complement_basis(rows: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let d = rows.ncols();
    let j = metric(d);
    let w = null_space(&(rows * &j));
    let form = w.transpose() * &j * &w;
    let eig = form.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut basis = DMatrix::zeros(d, order.len());
    let mut signs = Vec::with_capacity(order.len());
    for (c, &k) in order.iter().enumerate() {
        let lam = eig.eigenvalues[k];
        let mut v = &w * eig.eigenvectors.column(k) / lam.abs().sqrt();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12).copied() {
            if first < 0.0 {
                v = -v;
            }
        }
        basis.set_column(c, &v);
        signs.push(lam.signum());
    }
    (basis, signs)
}

fn independent_rows(a: &DMatrix<f64>) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..a.nrows() {
        let mut trial = chosen.clone();
        trial.push(i);
        let sub = a.select_rows(trial.iter());
        if rank(&sub) == trial.len() {
            chosen = trial;
        }
    }
    chosen
}

/// Constructs an orthochronous Lorentz matrix taking each `ck1[i]` to `ck2[i]`.
///
/// Requires equal Gram matrices of full rank `q − 1` on the zero-sum subspace.
pub fn align(ck1: &[DVector<f64>], ck2: &[DVector<f64>], tol: f64) -> Result<LorentzMatrix> {
    if ck1.len() != ck2.len() {
        return Err(Error::DimensionMismatch {
            expected: ck1.len(),
            found: ck2.len(),
        });
    }
    let g1 = gram(ck1)?;
    let g2 = gram(ck2)?;
    let deviation = g1.deviation(g2.matrix());
    if deviation > tol {
        return Err(Error::GramMismatch { deviation });
    }
    let a = params_matrix(ck1)?;
    let b = params_matrix(ck2)?;
    let q = a.nrows();
    let d = a.ncols();
    if q > d {
        return Err(Error::CellCount {
            n: d.saturating_sub(2),
            q,
            reason: "alignment needs q <= n+2",
        });
    }
    let expected = q.saturating_sub(1);
    let rows = independent_rows(&a);
    if rows.len() != expected {
        return Err(Error::RankDeficient {
            which: "source",
            rank: rows.len(),
            expected,
        });
    }
    let b_sel = b.select_rows(rows.iter());
    let rank_b = rank(&b_sel);
    if rank_b != expected {
        return Err(Error::RankDeficient {
            which: "target",
            rank: rank_b,
            expected,
        });
    }
    let a_sel = a.select_rows(rows.iter());
    let (va, sa) = complement_basis(&a_sel);
    let (mut vb, sb) = complement_basis(&b_sel);
    if sa != sb {
        return Err(Error::RankDeficient {
            which: "complement signature",
            rank: sb.iter().filter(|&&s| s > 0.0).count(),
            expected: sa.iter().filter(|&&s| s > 0.0).count(),
        });
    }

    let build = |vb: &DMatrix<f64>| -> Option<DMatrix<f64>> {
        let mut xa = DMatrix::zeros(d, d);
        let mut xb = DMatrix::zeros(d, d);
        for (c, _) in rows.iter().enumerate() {
            xa.set_column(c, &a_sel.row(c).transpose());
            xb.set_column(c, &b_sel.row(c).transpose());
        }
        for c in 0..va.ncols() {
            xa.set_column(expected + c, &va.column(c));
            xb.set_column(expected + c, &vb.column(c));
        }
        xa.transpose()
            .lu()
            .solve(&xb.transpose())
            .map(|m| m.transpose())
    };

    let mut u = build(&vb).ok_or(Error::RankDeficient {
        which: "frame",
        rank: 0,
        expected: d,
    })?;
    if u[(d - 1, d - 1)] < 0.0 {
        match sb.last() {
            Some(&s) if s < 0.0 => {
                let last = vb.ncols() - 1;
                let flipped = -vb.column(last);
                vb.set_column(last, &flipped);
                u = build(&vb).expect("frame stays invertible under a sign flip");
            }
            _ => return Err(Error::TimeOrientation),
        }
    }
    let scale = a.amax().max(b.amax()).max(1.0);
    LorentzMatrix::new(u, (tol * scale).max(RANK_RTOL.sqrt()))
}
