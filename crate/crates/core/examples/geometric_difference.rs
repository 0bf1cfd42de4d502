//! Geometric difference between a linear kernel and a quantum kernel, and
//! the labelling that separates them.

use qkscreen::featuremaps::EncodingSpec;
use qkscreen::kernelscreen::{
    adversarial_labels, classical_kernel, default_lambda, geometric_difference, model_complexity,
    normalize_kernel, pca_reduce, quantum_kernel, train_svm, DataMatrix, KernelMode,
};
use rand::Rng;

fn main() -> qkscreen::Result<()> {
    let mut rng = qkscreen::rng::rng_from_seed(3);
    let rows: Vec<Vec<f64>> = (0..30)
        .map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let d = pca_reduce(&DataMatrix::from_rows(&rows)?, 4)?;
    let k_c = normalize_kernel(&classical_kernel(&d))?;
    let sqrt_n = (d.n_rows() as f64).sqrt();
    for spec in [EncodingSpec::angle(4), EncodingSpec::iqp(4)] {
        let k_q = normalize_kernel(&quantum_kernel(&d, &spec, KernelMode::Exact)?)?;
        let lambda = default_lambda(&k_c);
        let g = geometric_difference(&k_c, &k_q, lambda)?;
        let adv = adversarial_labels(&k_c, &k_q, lambda)?;
        let positives = adv.labels.iter().filter(|&&y| y > 0.0).count();
        println!("{}: g = {g:.3} (sqrt N = {sqrt_n:.3}), adversarial labels {positives}+/{}-", spec.kind, adv.labels.len() - positives);
        if positives > 0 && positives < adv.labels.len() {
            let c = 100.0;
            let s_c = model_complexity(&train_svm(&k_c, &adv.labels, c)?);
            let s_q = model_complexity(&train_svm(&k_q, &adv.labels, c)?);
            println!("  with C = {c}: s_C = {s_c:.3}, s_Q = {s_q:.3}");
        }
    }
    Ok(())
}
