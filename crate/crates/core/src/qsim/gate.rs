use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Gate families understood by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    RX,
    RY,
    RZ,
    CZ,
    CNOT,
    RZZ,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::RX | GateKind::RY | GateKind::RZ => 1,
            GateKind::CZ | GateKind::CNOT | GateKind::RZZ => 2,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::RZZ
        )
    }
}

/// A gate bound to concrete qubits.
///
/// Rotation conventions: `RX(θ) = exp(-iθX/2)`, `RY(θ) = exp(-iθY/2)`,
/// `RZ(θ) = exp(-iθZ/2)` and `RZZ(θ) = exp(-iθ Z⊗Z/2)`. For `Cnot` the first
/// qubit is the control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cz(usize, usize),
    Cnot(usize, usize),
    Rzz(usize, usize, f64),
}

impl Gate {
    pub fn rotation(kind: GateKind, qubit: usize, angle: f64) -> Option<Gate> {
        match kind {
            GateKind::RX => Some(Gate::Rx(qubit, angle)),
            GateKind::RY => Some(Gate::Ry(qubit, angle)),
            GateKind::RZ => Some(Gate::Rz(qubit, angle)),
            _ => None,
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::Rx(..) => GateKind::RX,
            Gate::Ry(..) => GateKind::RY,
            Gate::Rz(..) => GateKind::RZ,
            Gate::Cz(..) => GateKind::CZ,
            Gate::Cnot(..) => GateKind::CNOT,
            Gate::Rzz(..) => GateKind::RZZ,
        }
    }

    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cz(a, b) | Gate::Cnot(a, b) | Gate::Rzz(a, b, _) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, t) | Gate::Ry(_, t) | Gate::Rz(_, t) | Gate::Rzz(_, _, t) => Some(t),
            _ => None,
        }
    }

    /// The inverse gate: rotations negate their angle, the rest are involutions.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Rzz(a, b, t) => Gate::Rzz(a, b, -t),
            g => g,
        }
    }

    /// Dense matrix on the gate's own qubits, row-major.
    ///
    /// Local basis index bit `k` corresponds to `targets()[k]`, matching the
    /// little-endian layout of [`Statevector`](super::Statevector).
    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match *self {
            Gate::H(_) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]
            }
            Gate::Rx(_, t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![vec![c(co, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(co, 0.0)]]
            }
            Gate::Ry(_, t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
            }
            Gate::Rz(_, t) => {
                let z = c(0.0, 0.0);
                vec![
                    vec![Complex64::from_polar(1.0, -t / 2.0), z],
                    vec![z, Complex64::from_polar(1.0, t / 2.0)],
                ]
            }
            Gate::Cz(..) => diag4([1.0, 1.0, 1.0, -1.0].map(|v| c(v, 0.0))),
            Gate::Rzz(_, _, t) => {
                let even = Complex64::from_polar(1.0, -t / 2.0);
                let odd = Complex64::from_polar(1.0, t / 2.0);
                diag4([even, odd, odd, even])
            }
            Gate::Cnot(..) => {
                // control = local bit 0, target = local bit 1
                let mut m = vec![vec![c(0.0, 0.0); 4]; 4];
                m[0][0] = c(1.0, 0.0);
                m[2][2] = c(1.0, 0.0);
                m[3][1] = c(1.0, 0.0);
                m[1][3] = c(1.0, 0.0);
                m
            }
        }
    }
}

fn diag4(d: [Complex64; 4]) -> Vec<Vec<Complex64>> {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); 4]; 4];
    for (i, v) in d.into_iter().enumerate() {
        m[i][i] = v;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_gates() -> Vec<Gate> {
        vec![
            Gate::H(0),
            Gate::Rx(0, 0.7),
            Gate::Ry(0, -1.3),
            Gate::Rz(0, 2.9),
            Gate::Cz(0, 1),
            Gate::Cnot(0, 1),
            Gate::Rzz(0, 1, 0.4),
        ]
    }

    #[test]
    fn every_gate_is_unitary() {
        for g in all_gates() {
            let m = g.matrix();
            let d = m.len();
            for i in 0..d {
                for j in 0..d {
                    let dot: Complex64 = (0..d).map(|k| m[k][i].conj() * m[k][j]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - Complex64::new(expect, 0.0)).norm() < 1e-12, "{g:?}");
                }
            }
        }
    }

    #[test]
    fn inverse_matrix_is_adjoint() {
        for g in all_gates() {
            let m = g.matrix();
            let inv = g.inverse().matrix();
            for i in 0..m.len() {
                for j in 0..m.len() {
                    assert!((inv[i][j] - m[j][i].conj()).norm() < 1e-12);
                }
            }
            assert_eq!(g.inverse().inverse(), g);
        }
    }
}
