//! Data-encoding circuits.
//!
//! Features are min-max scaled to `[0, π]` by a [`FeatureScaler`] and then
//! loaded either as one `RX` rotation per qubit (angle encoding) or through an
//! IQP-style block of Hadamards and diagonal `RZ`/`RZZ` phases. Kernel
//! entries are read off [`fidelity_circuit`]s; the quanvolutional front end
//! uses [`random_quanv_circuit`].

use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Circuit, Gate, GateKind};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EncodingKind {
    Angle,
    #[serde(rename = "IQP")]
    Iqp,
}

impl std::fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EncodingKind::Angle => "angle",
            EncodingKind::Iqp => "iqp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Connectivity {
    AllPairs,
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub kind: EncodingKind,
    pub n_qubits: usize,
    pub iqp_repetitions: usize,
    pub iqp_connectivity: Connectivity,
}

impl EncodingSpec {
    pub fn angle(n_qubits: usize) -> Self {
        EncodingSpec {
            kind: EncodingKind::Angle,
            n_qubits,
            iqp_repetitions: 2,
            iqp_connectivity: Connectivity::AllPairs,
        }
    }

    /// IQP encoding with two repetitions; all-pairs phases up to 8 qubits,
    /// nearest-neighbour ring above.
    pub fn iqp(n_qubits: usize) -> Self {
        EncodingSpec {
            kind: EncodingKind::Iqp,
            n_qubits,
            iqp_repetitions: 2,
            iqp_connectivity: if n_qubits <= 8 {
                Connectivity::AllPairs
            } else {
                Connectivity::Ring
            },
        }
    }

    pub fn of_kind(kind: EncodingKind, n_qubits: usize) -> Self {
        match kind {
            EncodingKind::Angle => Self::angle(n_qubits),
            EncodingKind::Iqp => Self::iqp(n_qubits),
        }
    }

    pub fn with_repetitions(mut self, r: usize) -> Self {
        self.iqp_repetitions = r;
        self
    }

    pub fn with_connectivity(mut self, c: Connectivity) -> Self {
        self.iqp_connectivity = c;
        self
    }

    /// Builds `E(x)` for this spec.
    pub fn encode(&self, x: &[f64]) -> Result<Circuit> {
        match self.kind {
            EncodingKind::Angle => angle_encoding(x, self),
            EncodingKind::Iqp => iqp_encoding(x, self),
        }
    }
}

/// Per-feature min-max map onto `[0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureScaler {
    /// Records column minima and maxima of `rows`.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput("scaler data"))?;
        let m = first.as_ref().len();
        if m == 0 {
            return Err(Error::EmptyInput("scaler data has no columns"));
        }
        let mut min = vec![f64::INFINITY; m];
        let mut max = vec![f64::NEG_INFINITY; m];
        for row in rows {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: row.len(),
                });
            }
            for (i, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite("scaler data"));
                }
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        Ok(FeatureScaler { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn is_constant(&self, feature: usize) -> bool {
        self.max[feature] <= self.min[feature]
    }

    /// Maps `x` into `[0, π]`; values outside the fit range are clamped and
    /// constant features map to 0.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.is_constant(i) {
                    0.0
                } else {
                    let t = (v - self.min[i]) / (self.max[i] - self.min[i]);
                    t.clamp(0.0, 1.0) * PI
                }
            })
            .collect())
    }
}

pub fn fit_scaler<R: AsRef<[f64]>>(rows: &[R]) -> Result<FeatureScaler> {
    FeatureScaler::fit(rows)
}

fn check_dim(x: &[f64], spec: &EncodingSpec) -> Result<()> {
    if x.len() != spec.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: spec.n_qubits,
            actual: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("encoded features"));
    }
    Ok(())
}

/// `RX(x[i])` on qubit `i`.
pub fn angle_encoding(x: &[f64], spec: &EncodingSpec) -> Result<Circuit> {
    check_dim(x, spec)?;
    let mut c = Circuit::new(spec.n_qubits)?;
    for (q, &theta) in x.iter().enumerate() {
        c.push(Gate::Rx(q, theta))?;
    }
    Ok(c)
}

/// Distinct nearest-neighbour pairs `(i, i+1 mod n)`; a 2-qubit ring has one
/// pair and a single qubit none.
pub fn ring_pairs(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    }
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

/// Repeats `[H on all; RZ(x_i); RZZ(x_i·x_j) on connected pairs]`
/// `iqp_repetitions` times.
pub fn iqp_encoding(x: &[f64], spec: &EncodingSpec) -> Result<Circuit> {
    if spec.kind != EncodingKind::Iqp {
        return Err(Error::invalid("iqp_encoding needs an IQP spec"));
    }
    if spec.iqp_repetitions == 0 {
        return Err(Error::invalid("iqp_repetitions must be >= 1"));
    }
    check_dim(x, spec)?;
    let n = spec.n_qubits;
    let pairs = match spec.iqp_connectivity {
        Connectivity::AllPairs => all_pairs(n),
        Connectivity::Ring => ring_pairs(n),
    };
    let mut c = Circuit::new(n)?;
    for _ in 0..spec.iqp_repetitions {
        for q in 0..n {
            c.push(Gate::H(q))?;
        }
        for (q, &v) in x.iter().enumerate() {
            c.push(Gate::Rz(q, v))?;
        }
        for &(i, j) in &pairs {
            c.push(Gate::Rzz(i, j, x[i] * x[j]))?;
        }
    }
    Ok(c)
}

/// Reversed gate order with every gate inverted.
pub fn adjoint(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.n_qubits()).expect("source circuit width is valid");
    for g in circuit.gates().iter().rev() {
        out.push(g.inverse()).expect("inverse keeps targets");
    }
    out
}

/// `E(x_i) E†(x_j)`: the gates of `adjoint(E(x_j))` followed by those of `E(x_i)`.
pub fn fidelity_circuit(x_i: &[f64], x_j: &[f64], spec: &EncodingSpec) -> Result<Circuit> {
    let mut c = adjoint(&spec.encode(x_j)?);
    c.extend(&spec.encode(x_i)?)?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomCircuitSpec {
    pub n_qubits: usize,
    pub depth: usize,
    pub seed: u64,
}

/// Each layer: one rotation per qubit with kind drawn from {RX, RY, RZ} and
/// angle from `[0, 2π)`, then CZ around the ring.
pub fn random_quanv_circuit(spec: &RandomCircuitSpec) -> Result<Circuit> {
    const KINDS: [GateKind; 3] = [GateKind::RX, GateKind::RY, GateKind::RZ];
    let mut rng = rng_from_seed(spec.seed);
    let mut c = Circuit::new(spec.n_qubits)?;
    let ring = ring_pairs(spec.n_qubits);
    for _ in 0..spec.depth {
        for q in 0..spec.n_qubits {
            let kind = KINDS[rng.random_range(0..KINDS.len())];
            let angle = rng.random::<f64>() * 2.0 * PI;
            c.push(Gate::rotation(kind, q, angle).expect("rotation kind"))?;
        }
        for &(a, b) in &ring {
            c.push(Gate::Cz(a, b))?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::run_circuit;

    fn p0(c: &Circuit) -> f64 {
        run_circuit(c).unwrap().prob_all_zero()
    }

    #[test]
    fn scaler_maps_linearly_and_handles_constant_columns() {
        let rows = vec![vec![0.0, 5.0], vec![2.0, 5.0], vec![4.0, 5.0]];
        let s = fit_scaler(&rows).unwrap();
        assert_eq!((s.min[0], s.max[0]), (0.0, 4.0));
        let t = s.transform(&[2.0, 5.0]).unwrap();
        assert!((t[0] - PI / 2.0).abs() < 1e-15);
        assert_eq!(t[1], 0.0);
        assert_eq!(s.transform(&[4.0, 7.0]).unwrap()[0], PI);
        assert_eq!(s.transform(&[9.0, 7.0]).unwrap()[0], PI);
        assert!(fit_scaler::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn angle_encoding_closed_forms() {
        let spec = EncodingSpec::angle(3);
        assert!((p0(&angle_encoding(&[0.0; 3], &spec).unwrap()) - 1.0).abs() < 1e-12);
        let one = EncodingSpec::angle(1);
        assert!((p0(&angle_encoding(&[PI / 2.0], &one).unwrap()) - 0.5).abs() < 1e-12);

        let two = EncodingSpec::angle(2);
        let s = run_circuit(&angle_encoding(&[PI, 0.0], &two).unwrap()).unwrap();
        assert!((s.expectation_z(0).unwrap() + 1.0).abs() < 1e-12);
        assert!((s.expectation_z(1).unwrap() - 1.0).abs() < 1e-12);
        assert!(angle_encoding(&[0.0; 2], &spec).is_err());
    }

    #[test]
    fn iqp_zero_vector_is_identity_for_even_repetitions() {
        for m in 1..=4 {
            let spec = EncodingSpec::iqp(m);
            assert!((p0(&iqp_encoding(&vec![0.0; m], &spec).unwrap()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn iqp_single_qubit_closed_form() {
        // RZ·H·RZ·H|0⟩ keeps |amp₀|² = cos²(θ/2)
        for &theta in &[0.0, 0.4, 1.3, PI] {
            let spec = EncodingSpec::iqp(1);
            let p = p0(&iqp_encoding(&[theta], &spec).unwrap());
            assert!((p - (theta / 2.0).cos().powi(2)).abs() < 1e-12);
            // a single repetition leaves the uniform superposition
            let p1 = p0(&iqp_encoding(&[theta], &spec.with_repetitions(1)).unwrap());
            assert!((p1 - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_and_all_pairs_coincide_at_two_qubits() {
        let x = [0.3, 1.1];
        let a = iqp_encoding(&x, &EncodingSpec::iqp(2).with_connectivity(Connectivity::AllPairs));
        let b = iqp_encoding(&x, &EncodingSpec::iqp(2).with_connectivity(Connectivity::Ring));
        assert_eq!(a.unwrap(), b.unwrap());
        assert_eq!(EncodingSpec::iqp(8).iqp_connectivity, Connectivity::AllPairs);
        assert_eq!(EncodingSpec::iqp(9).iqp_connectivity, Connectivity::Ring);
    }

    #[test]
    fn adjoint_properties() {
        let spec = EncodingSpec::iqp(3);
        let c = iqp_encoding(&[0.2, 1.0, 2.5], &spec).unwrap();
        assert_eq!(adjoint(&adjoint(&c)), c);
        let mut round = c.clone();
        round.extend(&adjoint(&c)).unwrap();
        assert!((p0(&round) - 1.0).abs() < 1e-10);

        let mut single = Circuit::new(1).unwrap();
        single.push(Gate::Rx(0, 0.3)).unwrap();
        assert_eq!(adjoint(&single).gates(), &[Gate::Rx(0, -0.3)]);
    }

    #[test]
    fn fidelity_circuit_values() {
        let one = EncodingSpec::angle(1);
        let f = fidelity_circuit(&[PI / 2.0], &[0.0], &one).unwrap();
        assert!((p0(&f) - 0.5).abs() < 1e-12);

        let spec = EncodingSpec::iqp(3);
        let x = [0.5, 2.0, 1.0];
        let y = [1.5, 0.1, 2.9];
        assert!((p0(&fidelity_circuit(&x, &x, &spec).unwrap()) - 1.0).abs() < 1e-10);
        let a = p0(&fidelity_circuit(&x, &y, &spec).unwrap());
        let b = p0(&fidelity_circuit(&y, &x, &spec).unwrap());
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn random_circuit_is_seeded_and_sized() {
        let spec = RandomCircuitSpec {
            n_qubits: 4,
            depth: 3,
            seed: 17,
        };
        let a = random_quanv_circuit(&spec).unwrap();
        assert_eq!(a, random_quanv_circuit(&spec).unwrap());
        assert_eq!(a.len(), 3 * (4 + 4));
        let single = random_quanv_circuit(&RandomCircuitSpec {
            n_qubits: 1,
            depth: 5,
            seed: 1,
        })
        .unwrap();
        assert_eq!(single.len(), 5);
    }

    #[test]
    fn random_circuits_differ_across_seeds() {
        let angles = |seed| {
            let c = random_quanv_circuit(&RandomCircuitSpec {
                n_qubits: 4,
                depth: 2,
                seed,
            })
            .unwrap();
            let mut v: Vec<u64> = c
                .gates()
                .iter()
                .filter_map(|g| g.angle())
                .map(f64::to_bits)
                .collect();
            v.sort_unstable();
            v
        };
        let all: Vec<Vec<u64>> = (0..100).map(angles).collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                assert_ne!(all[i], all[j]);
            }
        }
    }
}
