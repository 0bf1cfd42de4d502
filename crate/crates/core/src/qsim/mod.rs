//! Exact statevector simulation.
//!
//! Gates are applied in place with bit-masked strided updates; no `2^n × 2^n`
//! matrix is ever formed. Registers up to [`MAX_QUBITS`] qubits are supported.

mod gate;
mod state;

pub use gate::{Gate, GateKind};
pub use state::{bitstring_to_index, index_to_bitstring, ShotResult, Statevector};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Largest register the simulator accepts (16 MiB of amplitudes).
pub const MAX_QUBITS: usize = 20;

/// Ordered gate list; the first gate acts on the state first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        state::check_size(n_qubits)?;
        Ok(Circuit {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        state::validate_gate(&gate, self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends every gate of `other` (same width) after this circuit's gates.
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n_qubits != self.n_qubits {
            return Err(crate::Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(self)
    }

    /// Applies the circuit to an existing state.
    pub fn apply_to(&self, state: &mut Statevector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(crate::Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: state.n_qubits(),
            });
        }
        for g in &self.gates {
            state.apply_unchecked(g);
        }
        Ok(())
    }
}

/// Runs `circuit` on `|0…0⟩`.
pub fn run_circuit(circuit: &Circuit) -> Result<Statevector> {
    let mut state = Statevector::zero(circuit.n_qubits)?;
    for g in &circuit.gates {
        state.apply(g)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a - Complex64::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn empty_circuit_is_ground_state() {
        let s = run_circuit(&Circuit::new(2).unwrap()).unwrap();
        let a = s.amplitudes();
        assert!(close(a[0], 1.0, 0.0));
        assert!(a[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn hadamard_and_rx_pi() {
        let mut c = Circuit::new(1).unwrap();
        c.push(Gate::H(0)).unwrap();
        let s = run_circuit(&c).unwrap();
        assert!(close(s.amplitudes()[0], FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitudes()[1], FRAC_1_SQRT_2, 0.0));
        assert!((s.prob_all_zero() - 0.5).abs() < 1e-12);
        assert!(s.expectation_z(0).unwrap().abs() < 1e-12);

        let mut c = Circuit::new(1).unwrap();
        c.push(Gate::Rx(0, PI)).unwrap();
        let s = run_circuit(&c).unwrap();
        assert!(close(s.amplitudes()[0], 0.0, 0.0));
        assert!(close(s.amplitudes()[1], 0.0, -1.0));
    }

    #[test]
    fn rx_closed_forms() {
        let mut c = Circuit::new(1).unwrap();
        c.push(Gate::Rx(0, PI / 2.0)).unwrap();
        assert!((run_circuit(&c).unwrap().prob_all_zero() - 0.5).abs() < 1e-12);

        let mut c = Circuit::new(1).unwrap();
        c.push(Gate::Rx(0, PI / 3.0)).unwrap();
        let z = run_circuit(&c).unwrap().expectation_z(0).unwrap();
        assert!((z - 0.5).abs() < 1e-12);
        assert_eq!(Statevector::zero(3).unwrap().expectation_z(2).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_targets_and_sizes() {
        let mut c = Circuit::new(2).unwrap();
        assert!(matches!(
            c.push(Gate::H(2)),
            Err(crate::Error::QubitOutOfRange { index: 2, .. })
        ));
        assert!(matches!(
            c.push(Gate::Cz(1, 1)),
            Err(crate::Error::DuplicateTargets(_))
        ));
        assert!(Circuit::new(0).is_err());
        assert!(Circuit::new(MAX_QUBITS + 1).is_err());
        let s = Statevector::zero(2).unwrap();
        assert!(s.expectation_z(5).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_validated() {
        let s = Statevector::zero(2).unwrap();
        let r = s.sample(100, 3).unwrap();
        assert_eq!(r.counts.len(), 1);
        assert_eq!(r.counts["00"], 100);
        assert!(matches!(s.sample(0, 1), Err(crate::Error::ZeroShots)));

        let mut c = Circuit::new(3).unwrap();
        for q in 0..3 {
            c.push(Gate::H(q)).unwrap();
        }
        let s = run_circuit(&c).unwrap();
        assert_eq!(s.sample(500, 9).unwrap(), s.sample(500, 9).unwrap());
        assert_ne!(s.sample(500, 9).unwrap(), s.sample(500, 10).unwrap());
    }

    #[test]
    fn bitstring_layout_is_little_endian() {
        // X on qubit 0 only (RX(π) up to phase)
        let mut c = Circuit::new(3).unwrap();
        c.push(Gate::Rx(0, PI)).unwrap();
        let r = run_circuit(&c).unwrap().sample(10, 0).unwrap();
        assert_eq!(r.counts["100"], 10);
        assert_eq!(index_to_bitstring(0b110, 3), "011");
        assert_eq!(bitstring_to_index("011"), Some(0b110));
        assert_eq!(bitstring_to_index("0x1"), None);
    }

    #[test]
    fn parallel_path_matches_serial_path() {
        // 15 qubits crosses PAR_THRESHOLD; compare with per-gate 1-qubit algebra
        let n = 15;
        let mut c = Circuit::new(n).unwrap();
        for q in 0..n {
            c.push(Gate::Ry(q, 0.1 * (q as f64 + 1.0))).unwrap();
        }
        let s = run_circuit(&c).unwrap();
        for q in [0, 7, 14] {
            let expect = (0.1 * (q as f64 + 1.0)).cos();
            assert!((s.expectation_z(q).unwrap() - expect).abs() < 1e-10);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }
}
