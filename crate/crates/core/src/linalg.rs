//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative rank tolerance applied to the largest singular value.
pub const TAU_RANK: f64 = 1e-10;
const ABS_RANK_FLOOR: f64 = 1e-13;

fn rank_tol(sigma_max: f64) -> f64 {
    (TAU_RANK * sigma_max).max(ABS_RANK_FLOOR)
}

fn padded_square(a: &Matrix) -> Matrix {
    let (r, n) = a.shape();
    if r >= n {
        return a.clone();
    }
    let mut p = Matrix::zeros(n, n);
    p.view_mut((0, 0), (r, n)).copy_from(a);
    p
}

/// Numerical rank with tolerance `TAU_RANK · σ_max`.
pub fn rank(a: &Matrix) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.singular_values();
    let tol = rank_tol(sv.max());
    sv.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis (as columns) of `{x : a x = 0}`.
pub fn null_space(a: &Matrix) -> Matrix {
    let n = a.ncols();
    if a.nrows() == 0 {
        return Matrix::identity(n, n);
    }
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    let svd = padded_square(a).svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let tol = rank_tol(svd.singular_values.max());
    let cols: Vec<Vector> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= tol).map(|i| v_t.row(i).transpose()).collect();
    columns_to_matrix(n, &cols)
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn range_space(a: &Matrix) -> Matrix {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return Matrix::zeros(m, 0);
    }
    let t = padded_square(&a.transpose());
    let svd = t.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let tol = rank_tol(svd.singular_values.max());
    let cols: Vec<Vector> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).map(|i| v_t.row(i).transpose()).collect();
    columns_to_matrix(m, &cols)
}

pub fn columns_to_matrix(nrows: usize, cols: &[Vector]) -> Matrix {
    let mut out = Matrix::zeros(nrows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

pub fn rows_to_matrix(ncols: usize, rows: &[Vector]) -> Matrix {
    let mut out = Matrix::zeros(rows.len(), ncols);
    for (i, r) in rows.iter().enumerate() {
        out.set_row(i, &r.transpose());
    }
    out
}

/// Stacks `top` over `bottom`; both must have the same column count.
pub fn vstack(top: &Matrix, bottom: &Matrix) -> Matrix {
    let n = top.ncols().max(bottom.ncols());
    let mut out = Matrix::zeros(top.nrows() + bottom.nrows(), n);
    if top.nrows() > 0 {
        out.view_mut((0, 0), top.shape()).copy_from(top);
    }
    if bottom.nrows() > 0 {
        out.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    }
    out
}

/// Distance from `v` to the column space of `a`.
pub fn dist_to_range(a: &Matrix, v: &Vector) -> f64 {
    let basis = range_space(a);
    if basis.ncols() == 0 {
        return v.norm();
    }
    let proj = &basis * (basis.transpose() * v);
    (v - proj).norm()
}

/// Smallest eigenvalue of a symmetric matrix; `None` for a 0×0 matrix.
pub fn min_sym_eigenvalue(a: &Matrix) -> Option<f64> {
    if a.nrows() == 0 {
        return None;
    }
    let sym = (a + a.transpose()) * 0.5;
    Some(sym.symmetric_eigenvalues().min())
}

/// LU nonsingularity with pivot threshold `1e-12 · max|a_ij|`.
pub fn lu_nonsingular(a: &Matrix) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    if a.nrows() == 0 {
        return true;
    }
    let scale = a.amax();
    if scale == 0.0 {
        return false;
    }
    let u = a.clone().lu().u();
    (0..u.nrows()).all(|i| u[(i, i)].abs() > 1e-12 * scale)
}

/// Solves the square system `a x = b` after the LU pivot check.
pub fn solve_square(a: &Matrix, b: &Vector) -> Option<Vector> {
    if !lu_nonsingular(a) {
        return None;
    }
    a.clone().lu().solve(b)
}

/// Minimum-norm least-squares solution via SVD.
pub fn lstsq(a: &Matrix, b: &Vector) -> Vector {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vector::zeros(a.ncols());
    }
    let svd = padded_square(a).svd(true, true);
    let tol = rank_tol(svd.singular_values.max());
    let mut rhs = Vector::zeros(svd.u.as_ref().map_or(0, |u| u.nrows()));
    rhs.rows_mut(0, b.len()).copy_from(b);
    svd.solve(&rhs, tol).expect("singular vectors requested")
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).amax()
}
