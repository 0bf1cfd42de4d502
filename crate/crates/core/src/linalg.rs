//! Symmetric-matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
pub struct SortedEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DMatrix<f64>,
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn sorted_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    SortedEigen { values, vectors }
}

/// Rebuilds `V f(Λ) Vᵀ`.
pub fn spectral_map(eig: &SortedEigen, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = eig.vectors.nrows();
    let d = DVector::from_iterator(eig.values.len(), eig.values.iter().map(|&v| f(v)));
    let scaled = DMatrix::from_fn(n, d.len(), |r, c| eig.vectors[(r, c)] * d[c]);
    symmetrize(&(scaled * eig.vectors.transpose()))
}

/// Principal square root with negative eigenvalues clipped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(&sorted_eigen(m), |v| v.max(0.0).sqrt())
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues set to zero).
pub fn clip_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(&sorted_eigen(m), |v| v.max(0.0))
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
