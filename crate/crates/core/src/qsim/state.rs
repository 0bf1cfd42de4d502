use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Gate, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Arrays at least this long are updated in parallel.
const PAR_THRESHOLD: usize = 1 << 14;
/// Minimum amount of amplitudes handed to one parallel task.
const PAR_BLOCK: usize = 1 << 12;

/// Dense pure state of an `n`-qubit register.
///
/// Bit `k` of an amplitude index is the value of qubit `k` (little-endian).
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_size(n_qubits)?;
        let sv = Statevector { n_qubits, amps };
        let norm = sv.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state norm² is {norm}, expected 1")));
        }
        Ok(sv)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|⟨0…0|ψ⟩|²`.
    pub fn prob_all_zero(&self) -> f64 {
        self.amps[0].norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `⟨Z_q⟩`, with +1 for amplitudes whose bit `q` is 0.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = a.norm_sqr();
                if i & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub(crate) fn validate_gate(&self, gate: &Gate) -> Result<()> {
        validate_gate(gate, self.n_qubits)
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        self.validate_gate(gate)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                apply_pairs(&mut self.amps, q, |_, a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * s;
                    *b = (x - y) * s;
                });
            }
            Gate::Rx(q, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                let mis = Complex64::new(0.0, -s);
                apply_pairs(&mut self.amps, q, |_, a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * c + y * mis;
                    *b = x * mis + y * c;
                });
            }
            Gate::Ry(q, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                apply_pairs(&mut self.amps, q, |_, a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * c - y * s;
                    *b = x * s + y * c;
                });
            }
            Gate::Rz(q, t) => {
                let p0 = Complex64::from_polar(1.0, -t / 2.0);
                let p1 = Complex64::from_polar(1.0, t / 2.0);
                apply_pairs(&mut self.amps, q, |_, a, b| {
                    *a *= p0;
                    *b *= p1;
                });
            }
            Gate::Cz(q0, q1) => {
                let mask = (1usize << q0) | (1usize << q1);
                apply_diagonal(&mut self.amps, |i, a| {
                    if i & mask == mask {
                        *a = -*a;
                    }
                });
            }
            Gate::Rzz(q0, q1, t) => {
                let even = Complex64::from_polar(1.0, -t / 2.0);
                let odd = Complex64::from_polar(1.0, t / 2.0);
                apply_diagonal(&mut self.amps, |i, a| {
                    let parity = ((i >> q0) ^ (i >> q1)) & 1;
                    *a *= if parity == 0 { even } else { odd };
                });
            }
            Gate::Cnot(control, target) => {
                let cmask = 1usize << control;
                apply_pairs(&mut self.amps, target, |i, a, b| {
                    if i & cmask != 0 {
                        std::mem::swap(a, b);
                    }
                });
            }
        }
    }

    /// Draws `shots` basis-state indices from the Born distribution.
    pub fn sample_indices(&self, shots: usize, rng: &mut Rng) -> Vec<usize> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let last = self.amps.len() - 1;
        (0..shots)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                cdf.partition_point(|&c| c <= u).min(last)
            })
            .collect()
    }

    /// Measures every qubit `shots` times with a generator seeded from `seed`.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<ShotResult> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut rng = rng_from_seed(seed);
        let mut by_index: BTreeMap<usize, u64> = BTreeMap::new();
        for idx in self.sample_indices(shots, &mut rng) {
            *by_index.entry(idx).or_default() += 1;
        }
        let counts = by_index
            .into_iter()
            .map(|(idx, n)| (index_to_bitstring(idx, self.n_qubits), n))
            .collect();
        Ok(ShotResult {
            counts,
            shots: shots as u64,
            seed,
        })
    }
}

/// Measurement record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotResult {
    /// Bitstring → occurrences. Character `k` of a key is qubit `k`.
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotResult {
    pub fn frequency(&self, bitstring: &str) -> f64 {
        self.counts.get(bitstring).copied().unwrap_or(0) as f64 / self.shots as f64
    }
}

/// Renders basis index `idx` as a bitstring whose character `k` is qubit `k`.
pub fn index_to_bitstring(idx: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|k| if (idx >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`index_to_bitstring`]; `None` on characters other than 0/1.
pub fn bitstring_to_index(bits: &str) -> Option<usize> {
    bits.chars().enumerate().try_fold(0usize, |acc, (k, ch)| match ch {
        '0' => Some(acc),
        '1' => Some(acc | (1 << k)),
        _ => None,
    })
}

pub(crate) fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::UnsupportedQubits(n_qubits));
    }
    Ok(())
}

pub(crate) fn validate_gate(gate: &Gate, n_qubits: usize) -> Result<()> {
    let targets = gate.targets();
    for &q in &targets {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
    }
    if targets.len() == 2 && targets[0] == targets[1] {
        return Err(Error::DuplicateTargets(targets));
    }
    Ok(())
}

/// Calls `f(i, amp[i], amp[i | 1<<target])` for every index `i` with bit
/// `target` clear.
fn apply_pairs<F>(amps: &mut [Complex64], target: usize, f: F)
where
    F: Fn(usize, &mut Complex64, &mut Complex64) + Sync,
{
    let step = 1usize << target;
    let block = (2 * step).max(PAR_BLOCK);
    let body = |(ci, chunk): (usize, &mut [Complex64])| {
        let base = ci * block;
        for (si, pair_block) in chunk.chunks_mut(2 * step).enumerate() {
            let (lo, hi) = pair_block.split_at_mut(step);
            let offset = base + si * 2 * step;
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                f(offset + k, a, b);
            }
        }
    };
    if amps.len() >= PAR_THRESHOLD {
        amps.par_chunks_mut(block).enumerate().for_each(body);
    } else {
        amps.chunks_mut(block).enumerate().for_each(body);
    }
}

fn apply_diagonal<F>(amps: &mut [Complex64], f: F)
where
    F: Fn(usize, &mut Complex64) + Sync,
{
    if amps.len() >= PAR_THRESHOLD {
        amps.par_chunks_mut(PAR_BLOCK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                let base = ci * PAR_BLOCK;
                for (k, a) in chunk.iter_mut().enumerate() {
                    f(base + k, a);
                }
            });
    } else {
        for (i, a) in amps.iter_mut().enumerate() {
            f(i, a);
        }
    }
}
