//! Small dense helpers shared by the analysis modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            out.view_mut((i * br, j * bc), (br, bc)).copy_from(&(b * s));
        }
    }
    out
}

/// `1_n ⊗ y`: the consensus vector with every node block equal to `y`.
pub fn replicate(y: &DVector<f64>, n: usize) -> DVector<f64> {
    let m = y.len();
    DVector::from_fn(n * m, |k, _| y[k % m])
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Induced infinity norm (max absolute row sum).
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs_entry(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with threshold `σ_max · max(rows, cols) · rel`.
pub fn numerical_rank(a: &DMatrix<f64>, rel: f64) -> usize {
    let s = singular_values(a);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let tol = smax * a.nrows().max(a.ncols()) as f64 * rel;
    s.iter().filter(|&&x| x > tol).count()
}

/// Unit vector `η` minimising `‖a η‖`, i.e. the right singular vector of the
/// smallest singular value. Works for wide matrices too (it goes through the
/// Gram matrix, whose eigenvectors span all of `R^cols`).
pub fn smallest_right_singular_vector(a: &DMatrix<f64>) -> (DVector<f64>, f64) {
    let gram = a.transpose() * a;
    let eig = SymmetricEigen::new(gram);
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, v)| (i, *v))
        .expect("non-empty matrix");
    let mut eta = eig.eigenvectors.column(idx).into_owned();
    // sign convention: largest-magnitude entry positive
    let (imax, _) = eta
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .unwrap();
    if eta[imax] < 0.0 {
        eta = -eta;
    }
    (eta, val.max(0.0).sqrt())
}

/// Minimum-norm least-squares solution of `a x = b` through the SVD
/// pseudo-inverse. Singular values at or below `σ_max · rel` are dropped.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = smax * rel;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut x = DVector::zeros(a.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            let coeff = u.column(k).dot(b) / s;
            x += vt.row(k).transpose() * coeff;
        }
    }
    x
}

/// Orthonormal basis (columns) of the null space of `a`, using the threshold
/// `σ ≤ σ_max · rel`.
pub fn null_space(a: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let cols = a.ncols();
    let gram = a.transpose() * a;
    let eig = SymmetricEigen::new(gram);
    let smax = eig.eigenvalues.iter().copied().fold(0.0, f64::max).max(0.0).sqrt();
    let tol = (smax * rel).max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..cols)
        .filter(|&k| eig.eigenvalues[k].max(0.0).sqrt() <= tol)
        .collect();
    let mut basis = DMatrix::zeros(cols, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        basis.set_column(j, &eig.eigenvectors.column(k));
    }
    basis
}
