use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DataMatrix;
use crate::error::{Error, Result};
use crate::featuremaps::{adjoint, EncodingSpec, FeatureScaler};
use crate::qsim::{Statevector, MAX_QUBITS};
use crate::rng::child_rng;

/// Above this many cached amplitudes the quantum kernel recomputes the
/// `E†(x_j)|0⟩` half of each fidelity circuit instead of storing it.
const STATE_CACHE_AMPLITUDES: usize = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelSource {
    Classical,
    QuantumExact,
    QuantumSampled,
}

/// How quantum kernel entries are read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum KernelMode {
    /// `|⟨0|E(x_i)E†(x_j)|0⟩|²` from the simulated amplitudes.
    Exact,
    /// Fraction of all-zero bitstrings among `shots` samples of the fidelity circuit.
    Sampled { shots: usize, seed: u64 },
}

impl KernelMode {
    pub fn shots(&self) -> Option<usize> {
        match *self {
            KernelMode::Exact => None,
            KernelMode::Sampled { shots, .. } => Some(shots),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            KernelMode::Exact => None,
            KernelMode::Sampled { seed, .. } => Some(seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelMode::Exact => "exact",
            KernelMode::Sampled { .. } => "sampled",
        }
    }
}

/// Metadata written next to an exported kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    pub n: usize,
    pub source: KernelSource,
    pub encoding: Option<EncodingSpec>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub values: DMatrix<f64>,
    pub source: KernelSource,
    pub encoding: Option<EncodingSpec>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub normalized: bool,
}

impl KernelMatrix {
    pub fn from_values(values: DMatrix<f64>, source: KernelSource) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::invalid("kernel matrix must be square"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel matrix"));
        }
        Ok(KernelMatrix {
            values,
            source,
            encoding: None,
            shots: None,
            seed: None,
            normalized: false,
        })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.values.trace()
    }

    pub fn meta(&self) -> KernelMeta {
        KernelMeta {
            n: self.n(),
            source: self.source,
            encoding: self.encoding,
            shots: self.shots,
            seed: self.seed,
            normalized: self.normalized,
        }
    }

    /// Writes `N` lines of `N` comma-separated values (shortest round-trip
    /// decimal form) to `<stem>.csv` and the metadata to `<stem>.json`.
    pub fn export(&self, stem: &Path) -> Result<()> {
        let csv_path = stem.with_extension("csv");
        let mut out = String::new();
        for row in self.values.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        std::fs::write(&csv_path, out).map_err(|e| Error::io(&csv_path, e))?;
        let json_path = stem.with_extension("json");
        let mut f = std::fs::File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
        serde_json::to_writer_pretty(&mut f, &self.meta())?;
        f.write_all(b"\n").map_err(|e| Error::io(&json_path, e))?;
        Ok(())
    }

    /// Reads a kernel written by [`KernelMatrix::export`].
    pub fn import(stem: &Path) -> Result<Self> {
        let json_path = stem.with_extension("json");
        let text = std::fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
        let meta: KernelMeta = serde_json::from_str(&text).map_err(|source| Error::Manifest {
            path: json_path.clone(),
            source,
        })?;
        let csv_path = stem.with_extension("csv");
        let text = std::fs::read_to_string(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        let mut data = Vec::with_capacity(meta.n * meta.n);
        for line in text.lines().filter(|l| !l.is_empty()) {
            for field in line.split(',') {
                data.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::invalid(format!("{}: {e}", csv_path.display())))?,
                );
            }
        }
        if data.len() != meta.n * meta.n {
            return Err(Error::DimensionMismatch {
                expected: meta.n * meta.n,
                actual: data.len(),
            });
        }
        let mut k = KernelMatrix::from_values(DMatrix::from_row_slice(meta.n, meta.n, &data), meta.source)?;
        k.encoding = meta.encoding;
        k.shots = meta.shots;
        k.seed = meta.seed;
        k.normalized = meta.normalized;
        Ok(k)
    }
}

/// `K_C = D Dᵀ`.
pub fn classical_kernel(d: &DataMatrix) -> KernelMatrix {
    let values = &d.values * d.values.transpose();
    KernelMatrix {
        values: crate::linalg::symmetrize(&values),
        source: KernelSource::Classical,
        encoding: None,
        shots: None,
        seed: None,
        normalized: false,
    }
}

/// Fits a `[0, π]` scaler on `d` and evaluates the fidelity kernel of the
/// scaled rows.
pub fn quantum_kernel(d: &DataMatrix, spec: &EncodingSpec, mode: KernelMode) -> Result<KernelMatrix> {
    let rows = d.rows();
    let scaler = FeatureScaler::fit(&rows)?;
    let scaled = rows
        .iter()
        .map(|r| scaler.transform(r))
        .collect::<Result<Vec<_>>>()?;
    quantum_kernel_scaled(&scaled, spec, mode)
}

/// Fidelity kernel of already-scaled feature vectors.
///
/// Entry `(i, j)` is read from the circuit `E(x_i)E†(x_j)` applied to
/// `|0…0⟩`; only `i ≤ j` is evaluated and mirrored.
pub fn quantum_kernel_scaled(rows: &[Vec<f64>], spec: &EncodingSpec, mode: KernelMode) -> Result<KernelMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyInput("quantum kernel rows"));
    }
    if spec.n_qubits == 0 || spec.n_qubits > MAX_QUBITS {
        return Err(Error::UnsupportedQubits(spec.n_qubits));
    }
    if mode.shots() == Some(0) {
        return Err(Error::ZeroShots);
    }
    for r in rows {
        if r.len() != spec.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: spec.n_qubits,
                actual: r.len(),
            });
        }
    }

    let encoders = rows.iter().map(|x| spec.encode(x)).collect::<Result<Vec<_>>>()?;
    // |φ_j⟩ = E†(x_j)|0⟩, the first half of every fidelity circuit
    let half_state = |j: usize| -> Result<Statevector> {
        let mut s = Statevector::zero(spec.n_qubits)?;
        adjoint(&encoders[j]).apply_to(&mut s)?;
        Ok(s)
    };
    let cache: Option<Vec<Statevector>> = if n << spec.n_qubits <= STATE_CACHE_AMPLITUDES {
        Some((0..n).into_par_iter().map(half_state).collect::<Result<_>>()?)
    } else {
        None
    };

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let entries: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<f64> {
            match mode {
                KernelMode::Exact => {
                    if i == j {
                        return Ok(1.0);
                    }
                    match &cache {
                        // ⟨0|E_i E_j†|0⟩ = ⟨φ_i|φ_j⟩
                        Some(states) => Ok(states[i].inner(&states[j])?.norm_sqr()),
                        None => {
                            let mut s = half_state(j)?;
                            encoders[i].apply_to(&mut s)?;
                            Ok(s.prob_all_zero())
                        }
                    }
                }
                KernelMode::Sampled { shots, seed } => {
                    let mut s = match &cache {
                        Some(states) => states[j].clone(),
                        None => half_state(j)?,
                    };
                    encoders[i].apply_to(&mut s)?;
                    let mut rng = child_rng(seed, (i * n + j) as u64);
                    let zeros = s
                        .sample_indices(shots, &mut rng)
                        .into_iter()
                        .filter(|&b| b == 0)
                        .count();
                    Ok(zeros as f64 / shots as f64)
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut values = DMatrix::zeros(n, n);
    for (&(i, j), &v) in pairs.iter().zip(&entries) {
        values[(i, j)] = v;
        values[(j, i)] = v;
    }
    Ok(KernelMatrix {
        values,
        source: match mode {
            KernelMode::Exact => KernelSource::QuantumExact,
            KernelMode::Sampled { .. } => KernelSource::QuantumSampled,
        },
        encoding: Some(*spec),
        shots: mode.shots(),
        seed: mode.seed(),
        normalized: false,
    })
}

/// Rescales `K` to trace `N`.
pub fn normalize_kernel(k: &KernelMatrix) -> Result<KernelMatrix> {
    let tr = k.trace();
    if !(tr > 0.0) {
        return Err(Error::invalid(format!("kernel trace is {tr}, cannot normalize")));
    }
    let mut out = k.clone();
    out.values *= k.n() as f64 / tr;
    out.normalized = true;
    Ok(out)
}
