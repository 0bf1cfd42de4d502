//! Quantum-advantage screening.
//!
//! For each number of principal components `M` and each encoding the data is
//! reduced, a classical Gram kernel `K_C = DDᵀ` and a fidelity kernel `K_Q`
//! are built and trace-normalized, and the geometric difference
//! `g = √‖√K_Q (K_C + λI)⁻¹ √K_Q‖₂` is compared against `√N`. The label
//! specific test then trains an SVM on each kernel and compares the norms of
//! the dual coefficients.

mod geometry;
mod kernel;
mod pca;
mod report;
mod svm;

pub use geometry::{
    adversarial_labels, analyze, default_lambda, geometric_difference, labels_from_analysis,
    AdversarialLabels, GeometricAnalysis, MAX_CONDITION,
};
pub use kernel::{
    classical_kernel, normalize_kernel, quantum_kernel, quantum_kernel_scaled, KernelMatrix,
    KernelMeta, KernelMode, KernelSource,
};
pub use pca::{pca_reduce, ColumnMeaning, DataMatrix};
pub use report::{
    binarize_labels, screen, verdict, LabelSource, ScreenConfig, ScreenReport, ScreenRow, Verdict,
    DEFAULT_VERDICT_TOLERANCE,
};
pub use svm::{model_complexity, train_svm, train_svm_with, SvmConfig, SvmModel};
