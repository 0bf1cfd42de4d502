//! Builds a Bell pair and a small rotation circuit, prints amplitudes,
//! expectation values and seeded shot counts.

use qkscreen::qsim::{index_to_bitstring, run_circuit, Circuit, Gate};

fn main() -> qkscreen::Result<()> {
    let mut bell = Circuit::new(2)?;
    bell.push(Gate::H(0))?.push(Gate::Cnot(0, 1))?;
    let state = run_circuit(&bell)?;
    for (i, a) in state.amplitudes().iter().enumerate() {
        println!("|{}⟩  {:+.4} {:+.4}i", index_to_bitstring(i, 2), a.re, a.im);
    }
    let shots = state.sample(1000, 7)?;
    println!("1000 shots (seed 7): {:?}", shots.counts);

    // ⟨Z⟩ after RY(θ) is cos θ
    for theta in [0.0, 0.5, 1.0, std::f64::consts::FRAC_PI_2] {
        let mut c = Circuit::new(1)?;
        c.push(Gate::Ry(0, theta))?;
        let z = run_circuit(&c)?.expectation_z(0)?;
        println!("RY({theta:.3}): <Z> = {z:+.6}  cos θ = {:+.6}", f64::cos(theta));
    }
    Ok(())
}
