//! Factorization helpers backed by nalgebra. Internal only; the public
//! surface of the crate speaks [`DenseMatrix`].

use crate::matrix::DenseMatrix;

/// Splits R^n into the numerical kernel of `m` and its orthogonal
/// complement via SVD of `m`. A singular value belongs to the kernel when it
/// is below `rel_tol` times the largest one. Returns `(kernel, complement)`
/// as matrices whose columns are orthonormal bases.
pub(crate) fn kernel_complement_split(m: &DenseMatrix, rel_tol: f64) -> (DenseMatrix, DenseMatrix) {
    let n = m.cols();
    // Pad with zero rows so the full right singular basis is produced even
    // for short matrices.
    let padded = if m.rows() < n {
        let mut p = DenseMatrix::zeros(n, n);
        for i in 0..m.rows() {
            for j in 0..n {
                p[(i, j)] = m[(i, j)];
            }
        }
        p
    } else {
        m.clone()
    };

    let svd = padded.to_na().svd(false, true);
    let v_t = svd.v_t.expect("SVD with compute_v");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().fold(0.0f64, |a, &s| a.max(s));

    let mut kernel_cols = Vec::new();
    let mut complement_cols = Vec::new();
    for (i, &s) in sigma.iter().enumerate() {
        if sigma_max == 0.0 || s < rel_tol * sigma_max {
            kernel_cols.push(i);
        } else {
            complement_cols.push(i);
        }
    }

    let collect = |cols: &[usize]| {
        let mut out = DenseMatrix::zeros(n, cols.len());
        for (k, &i) in cols.iter().enumerate() {
            for j in 0..n {
                out[(j, k)] = v_t[(i, j)];
            }
        }
        out
    };
    (collect(&kernel_cols), collect(&complement_cols))
}

/// Largest eigenvalue modulus of a square matrix (Schur-based).
pub(crate) fn spectral_radius(m: &DenseMatrix) -> f64 {
    if m.rows() == 0 {
        return 0.0;
    }
    m.to_na().complex_eigenvalues().iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn symmetric_min_eigenvalue(m: &DenseMatrix) -> f64 {
    if m.rows() == 0 {
        return 0.0;
    }
    m.to_na()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &v| a.min(v))
}

/// Symmetric PSD square root via eigendecomposition, clamping negative
/// eigenvalues (rounding noise) to zero.
pub(crate) fn psd_sqrt(m: &DenseMatrix) -> DenseMatrix {
    let eig = m.to_na().symmetric_eigen();
    let n = m.rows();
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..n {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    DenseMatrix::from_na(&(scaled * eig.eigenvectors.transpose()))
}
