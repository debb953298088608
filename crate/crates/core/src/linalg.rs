//! Small dense linear-algebra helpers shared by the geometric modules.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold used for every rank decision.
pub const RANK_RTOL: f64 = 1e-10;

/// Numerical rank of `m` from its singular values.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RTOL * top).count()
}

/// Orthonormal basis (as columns) of the right null space of `m`.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = m.ncols();
    let mut square = DMatrix::zeros(cols.max(m.nrows()), cols);
    square.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let top = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| top == 0.0 || svd.singular_values[i] <= RANK_RTOL * top)
        .collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &v_t.row(i).transpose());
    }
    out
}

/// Orthonormal basis of the zero-sum subspace of R^q, one vector per column.
///
/// Column `k` is `(1, …, 1, −k, 0, …, 0)/√(k(k+1))` with `k` leading ones.
pub fn zero_sum_basis(q: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(q, q.saturating_sub(1));
    for k in 1..q {
        let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            h[(i, k - 1)] = s;
        }
        h[(k, k - 1)] = -(k as f64) * s;
    }
    h
}

/// Projector `I − (1/q)11ᵀ` onto the zero-sum subspace.
pub fn zero_sum_projector(q: usize) -> DMatrix<f64> {
    DMatrix::from_fn(q, q, |i, j| if i == j { 1.0 } else { 0.0 } - 1.0 / q as f64)
}

/// Gram–Schmidt on `rows`, dropping vectors that are dependent on earlier ones.
pub fn orthonormalize(rows: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(rows.len());
    for r in rows {
        let scale = r.norm();
        let mut v = r.clone();
        for _ in 0..2 {
            for b in &out {
                let d = b.dot(&v);
                v.axpy(-d, b, 1.0);
            }
        }
        let nv = v.norm();
        if scale > 0.0 && nv > RANK_RTOL.sqrt() * scale {
            out.push(v / nv);
        }
    }
    out
}

/// Minimum-norm solution of `rows · x = rhs`, or `None` when the rows are dependent.
pub fn min_norm_solve(rows: &[DVector<f64>], rhs: &[f64]) -> Option<DVector<f64>> {
    let dim = rows.first().map(|r| r.len())?;
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    if rank(&m) < rows.len() {
        return None;
    }
    let gram = &m * m.transpose();
    let lambda = gram.lu().solve(&DVector::from_column_slice(rhs))?;
    Some(m.transpose() * lambda)
}

/// Point of least Euclidean norm in `{x : E x = f, A x ≤ b}`.
///
/// Solved exactly by enumerating candidate active sets, which is cheap for the
/// handful of inequalities that arise from cell adjacency. Returns `None` when
/// the polyhedron is empty. An empty equality list is allowed.
pub fn min_norm_in_polyhedron(
    eq_rows: &[DVector<f64>],
    eq_rhs: &[f64],
    ineq_rows: &[DVector<f64>],
    ineq_rhs: &[f64],
    feas_tol: f64,
) -> Option<DVector<f64>> {
    let dim = eq_rows
        .first()
        .or(ineq_rows.first())
        .map(|r| r.len())?;
    let m = ineq_rows.len();
    let mut best: Option<DVector<f64>> = None;
    for mask in 0u64..(1u64 << m) {
        let active = mask.count_ones() as usize;
        if eq_rows.len() + active > dim {
            continue;
        }
        let mut rows: Vec<DVector<f64>> = eq_rows.to_vec();
        let mut rhs: Vec<f64> = eq_rhs.to_vec();
        for l in 0..m {
            if mask >> l & 1 == 1 {
                rows.push(ineq_rows[l].clone());
                rhs.push(ineq_rhs[l]);
            }
        }
        let x = if rows.is_empty() {
            DVector::zeros(dim)
        } else {
            match min_norm_solve(&rows, &rhs) {
                Some(x) => x,
                None => continue,
            }
        };
        let feasible = ineq_rows
            .iter()
            .zip(ineq_rhs)
            .all(|(a, &b)| a.dot(&x) <= b + feas_tol * (1.0 + b.abs()));
        if feasible && best.as_ref().is_none_or(|bx| x.norm() < bx.norm()) {
            best = Some(x);
        }
    }
    best
}
