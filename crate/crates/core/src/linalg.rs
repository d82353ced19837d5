//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Pivot threshold for certifying positive-definiteness.
pub const PIVOT_TOL: f64 = 1e-12;

/// Relative singular-value threshold used for numerical ranks.
pub const RANK_REL_TOL: f64 = 1e-7;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Lower-triangular `L` with positive real diagonal and `L L^H = a`.
///
/// Returns `Err(min_pivot)` as soon as a pivot drops to `PIVOT_TOL` or below;
/// on success also returns the smallest pivot seen.
pub fn cholesky(a: &CMatrix) -> Result<(CMatrix, f64), f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "cholesky needs a square matrix");
    let mut l = CMatrix::zeros(n, n);
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        min_pivot = min_pivot.min(d);
        if d <= PIVOT_TOL || !d.is_finite() {
            return Err(d);
        }
        let djj = d.sqrt();
        l[(j, j)] = real(djj);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    if n == 0 {
        min_pivot = 1.0;
    }
    Ok((l, min_pivot))
}

/// Inverse of a lower-triangular matrix with nonzero diagonal (forward substitution).
pub fn lower_triangular_inverse(l: &CMatrix) -> CMatrix {
    let n = l.nrows();
    let id = CMatrix::identity(n, n);
    l.solve_lower_triangular(&id)
        .expect("triangular factor has a nonzero diagonal")
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = SVD::new(m.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Numerical rank: singular values above `rel_tol * sigma_max`.
pub fn rank_with(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

pub fn rank(m: &CMatrix) -> usize {
    rank_with(m, RANK_REL_TOL)
}

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues (ascending) and
/// the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // symmetrize to damp round-off before the Hermitian solver
    let h = (m + m.adjoint()) * real(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

/// Orthogonal projection onto the column span of `b` (columns need not be independent).
pub fn column_span_projection(b: &CMatrix) -> CMatrix {
    let n = b.nrows();
    if b.ncols() == 0 {
        return CMatrix::zeros(n, n);
    }
    let svd = SVD::new(b.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut p = CMatrix::zeros(n, n);
    for (k, s) in svd.singular_values.iter().enumerate() {
        if top > 0.0 && *s > RANK_REL_TOL * top {
            let col = u.column(k);
            p += col * col.adjoint();
        }
    }
    p
}

/// Largest singular value by power iteration on `A^H A`.
///
/// `apply` and `apply_adjoint` act on flat coordinate vectors of length `dim`.
/// Iterates until the relative change of the estimate is below `tol`.
pub fn power_norm<F, G>(dim: usize, apply: F, apply_adjoint: G, tol: f64) -> f64
where
    F: Fn(&CVector) -> CVector,
    G: Fn(&CVector) -> CVector,
{
    if dim == 0 {
        return 0.0;
    }
    // deterministic start vector with no special alignment
    let mut x = CVector::from_fn(dim, |i, _| c(1.0 + 0.37 * i as f64, 0.11 * (i % 7) as f64));
    x /= real(x.norm());
    let mut est = 0.0;
    for _ in 0..10_000 {
        let y = apply(&x);
        let z = apply_adjoint(&y);
        let zn = z.norm();
        if zn == 0.0 {
            return 0.0;
        }
        let next = zn.sqrt();
        x = z / real(zn);
        if (next - est).abs() <= tol * next.max(f64::MIN_POSITIVE) {
            return next;
        }
        est = next;
    }
    est
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    power_norm(m.ncols(), |x| m * x, |y| m.adjoint() * y, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let q = c(0.3, -0.6);
        let g = CMatrix::from_row_slice(2, 2, &[real(1.0), q.conj(), q, real(1.0)]);
        let (l, min_pivot) = cholesky(&g).unwrap();
        assert!((&l * l.adjoint() - &g).norm() < 1e-14);
        assert!((min_pivot - (1.0 - q.norm_sqr())).abs() < 1e-14);
        assert!(l[(0, 1)] == real(0.0));
    }

    #[test]
    fn cholesky_rejects_singular() {
        let g = CMatrix::from_row_slice(2, 2, &[real(1.0), real(1.0), real(1.0), real(1.0)]);
        let e = cholesky(&g).unwrap_err();
        assert!(e.abs() < 1e-15);
    }

    #[test]
    fn ranks_and_projections() {
        let b = CMatrix::from_row_slice(3, 2, &[real(1.0), real(2.0), c(0.0, 1.0), c(0.0, 2.0), real(0.0), real(0.0)]);
        assert_eq!(rank(&b), 1);
        let p = column_span_projection(&b);
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!((&p - p.adjoint()).norm() < 1e-12);
        assert_eq!(rank(&p), 1);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let m = CMatrix::from_fn(4, 3, |i, j| c((i * 3 + j) as f64 * 0.1 - 0.4, (i as f64 - j as f64) * 0.2));
        let s = singular_values(&m)[0];
        assert!((spectral_norm(&m) - s).abs() < 1e-8);
        assert_eq!(spectral_norm(&CMatrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn eigen_sorted() {
        let m = CMatrix::from_row_slice(2, 2, &[real(2.0), c(0.0, 1.0), c(0.0, -1.0), real(2.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        assert!((vecs.adjoint() * &vecs - CMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
