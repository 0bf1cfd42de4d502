//! Angle and IQP fidelity kernels on a handful of points, exact and
//! shot-sampled.

use qkscreen::featuremaps::{fidelity_circuit, EncodingSpec};
use qkscreen::kernelscreen::{quantum_kernel_scaled, KernelMode};
use qkscreen::qsim::run_circuit;

fn print(name: &str, k: &nalgebra::DMatrix<f64>) {
    println!("{name}");
    for i in 0..k.nrows() {
        let row: Vec<String> = (0..k.ncols()).map(|j| format!("{:.3}", k[(i, j)])).collect();
        println!("  {}", row.join(" "));
    }
}

fn main() -> qkscreen::Result<()> {
    let points = vec![
        vec![0.1, 0.4, 2.0],
        vec![0.2, 0.5, 1.9],
        vec![3.0, 1.0, 0.3],
        vec![1.5, 1.5, 1.5],
    ];
    for spec in [EncodingSpec::angle(3), EncodingSpec::iqp(3)] {
        let exact = quantum_kernel_scaled(&points, &spec, KernelMode::Exact)?;
        print(&format!("{} exact", spec.kind), &exact.values);
        let sampled = quantum_kernel_scaled(&points, &spec, KernelMode::Sampled { shots: 2000, seed: 1 })?;
        print(&format!("{} sampled, 2000 shots", spec.kind), &sampled.values);
    }
    // one entry by hand: the all-zero probability of E(x_i)E†(x_j)|0⟩
    let c = fidelity_circuit(&points[0], &points[2], &EncodingSpec::iqp(3))?;
    println!("fidelity circuit of {} gates, P(000) = {:.6}", c.len(), run_circuit(&c)?.prob_all_zero());
    Ok(())
}
