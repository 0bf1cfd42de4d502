//! Precomputed-kernel SVM: dual coefficients, decision values and the model
//! complexity s = ‖α‖₂ for growing C.

use nalgebra::DMatrix;
use qkscreen::kernelscreen::{model_complexity, train_svm_with, SvmConfig};

fn main() -> qkscreen::Result<()> {
    let x: [f64; 8] = [-2.0, -1.2, -0.4, 0.3, 0.9, 1.8, -0.1, 0.2];
    let y = [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0, -1.0];
    // Gaussian kernel
    let k = DMatrix::from_fn(x.len(), x.len(), |i, j| (-(x[i] - x[j]).powi(2)).exp());
    for c in [0.1, 1.0, 10.0, 100.0] {
        let m = train_svm_with(&k, &y, &SvmConfig { c, ..SvmConfig::default() })?;
        let correct = m
            .decision_values(&k)
            .iter()
            .zip(&y)
            .filter(|(f, t)| f.signum() == **t)
            .count();
        println!(
            "C = {c:>5}: s = {:.4}, support {:?}, dual objective {:.4}, train accuracy {correct}/{}",
            model_complexity(&m),
            m.support_indices,
            m.dual_objective(&k),
            y.len()
        );
    }
    Ok(())
}
