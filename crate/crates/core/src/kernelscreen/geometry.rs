use nalgebra::DMatrix;

use super::KernelMatrix;
use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, psd_sqrt, sorted_eigen, spectral_map, symmetrize};

/// Largest condition number of `K_C + λI` accepted before inversion.
pub const MAX_CONDITION: f64 = 1e14;

/// Default regularizer `1e-6 · trace(K_C) / N`.
pub fn default_lambda(k_c: &KernelMatrix) -> f64 {
    1e-6 * k_c.trace() / k_c.n() as f64
}

/// Everything derived from `√K_Q (K_C + λI)⁻¹ √K_Q`.
#[derive(Debug, Clone)]
pub struct GeometricAnalysis {
    /// `g(K_C ‖ K_Q)`.
    pub g: f64,
    /// Top eigenvalue of the product (`g²` before clipping at zero).
    pub top_eigenvalue: f64,
    /// Unit eigenvector of the top eigenvalue, sign-normalized.
    pub top_vector: Vec<f64>,
    /// Set when the top eigenvalue is (numerically) repeated.
    pub degenerate: bool,
    pub sqrt_kq: DMatrix<f64>,
}

fn check_pair(k_c: &KernelMatrix, k_q: &KernelMatrix) -> Result<()> {
    if k_c.n() != k_q.n() {
        return Err(Error::DimensionMismatch {
            expected: k_c.n(),
            actual: k_q.n(),
        });
    }
    if k_c.n() == 0 {
        return Err(Error::EmptyInput("kernel"));
    }
    Ok(())
}

pub fn analyze(k_c: &KernelMatrix, k_q: &KernelMatrix, lambda: f64) -> Result<GeometricAnalysis> {
    check_pair(k_c, k_q)?;
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    let n = k_c.n();
    let regularized = &k_c.values + DMatrix::identity(n, n) * lambda;
    let eig = sorted_eigen(&regularized);
    let (hi, lo) = (eig.values[0], eig.values[n - 1]);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let inv = spectral_map(&eig, |v| 1.0 / v);
    let sqrt_kq = psd_sqrt(&k_q.values);
    let product = symmetrize(&(&sqrt_kq * inv * &sqrt_kq));
    let pe = sorted_eigen(&product);
    let top = pe.values[0];
    let degenerate = n > 1 && (top - pe.values[1]).abs() <= 1e-9 * top.abs().max(1.0);
    let mut top_vector: Vec<f64> = pe.vectors.column(0).iter().copied().collect();
    canonical_sign(&mut top_vector);
    Ok(GeometricAnalysis {
        g: top.max(0.0).sqrt(),
        top_eigenvalue: top,
        top_vector,
        degenerate,
        sqrt_kq,
    })
}

/// `g(K_C ‖ K_Q) = √‖√K_Q (K_C + λI)⁻¹ √K_Q‖₂`.
pub fn geometric_difference(k_c: &KernelMatrix, k_q: &KernelMatrix, lambda: f64) -> Result<f64> {
    analyze(k_c, k_q, lambda).map(|a| a.g)
}

/// Labels that the quantum kernel fits easily but the classical one does not.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialLabels {
    pub labels: Vec<f64>,
    /// The top eigenspace was repeated; `labels` is one of several maximizers.
    pub degenerate: bool,
}

/// `y = sign(√K_Q v)` for the top eigenvector `v` of the geometric-difference
/// product; zeros map to `+1`.
pub fn adversarial_labels(k_c: &KernelMatrix, k_q: &KernelMatrix, lambda: f64) -> Result<AdversarialLabels> {
    let a = analyze(k_c, k_q, lambda)?;
    Ok(labels_from_analysis(&a))
}

pub fn labels_from_analysis(a: &GeometricAnalysis) -> AdversarialLabels {
    let v = nalgebra::DVector::from_column_slice(&a.top_vector);
    let w = &a.sqrt_kq * v;
    let scale = w.amax();
    let labels = w
        .iter()
        .map(|&x| if x.abs() <= 1e-12 * scale || x > 0.0 { 1.0 } else { -1.0 })
        .collect();
    AdversarialLabels {
        labels,
        degenerate: a.degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernelscreen::{KernelSource, normalize_kernel};

    fn km(values: DMatrix<f64>) -> KernelMatrix {
        KernelMatrix::from_values(values, KernelSource::Classical).unwrap()
    }

    #[test]
    fn identity_pair_gives_one() {
        let i = km(DMatrix::identity(4, 4));
        assert!((geometric_difference(&i, &i, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_example() {
        let kc = km(DMatrix::identity(2, 2));
        let kq = km(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.0])));
        let g = geometric_difference(&kc, &kq, 0.0).unwrap();
        assert!((g - 2f64.sqrt()).abs() < 1e-12);
        let adv = adversarial_labels(&kc, &kq, 0.0).unwrap();
        assert_eq!(adv.labels, vec![1.0, 1.0]);
        assert!(!adv.degenerate);
    }

    #[test]
    fn self_difference_is_one() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0]);
        let k = normalize_kernel(&km(&a * a.transpose())).unwrap();
        assert!((geometric_difference(&k, &k, 0.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn singular_classical_kernel_is_rejected_without_lambda() {
        let kc = km(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        let kq = km(DMatrix::identity(2, 2));
        assert!(matches!(geometric_difference(&kc, &kq, 0.0), Err(Error::Singular { .. })));
        assert!(geometric_difference(&kc, &kq, 1e-3).is_ok());
        assert!(geometric_difference(&kc, &kq, -1.0).is_err());
    }

    #[test]
    fn degenerate_top_space_is_flagged() {
        let i = km(DMatrix::identity(3, 3));
        let adv = adversarial_labels(&i, &i, 0.0).unwrap();
        assert!(adv.degenerate);
        assert_eq!(adv.labels.len(), 3);
    }
}
