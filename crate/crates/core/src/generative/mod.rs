//! Codebook latent + quantum circuit Born machine generative source.
//!
//! Patches are quantized to a k-entry codebook, the codeword frequencies
//! become a distribution over one-hot k-qubit bitstrings, and a Born
//! machine is trained on it. Samples are mapped back to the nearest valid
//! codeword and decoded to patches. The codebook is a k-means quantizer
//! standing in for a learned VQ-VAE.

mod codebook;
mod qcbm;

use std::path::Path;

use serde_json::json;

pub use codebook::{decode, encode, fit_codebook, Codebook};
pub use qcbm::{
    empirical_distribution, mitigate, mitigate_index, sample_qcbm, sample_qcbm_indices, train_qcbm,
    tv_counts, tv_dense, Ansatz, BitstringDistribution, QcbmModel, SpsaConfig, TrainingStage,
};

use crate::error::{Error, Result};
use crate::wxdata::{write_atomic, PatchTensor};

impl QcbmModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Manifest {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Total variation between two codeword-index histograms.
pub fn index_tv(a: &[usize], b: &[usize], k: usize) -> f64 {
    let freq = |xs: &[usize]| {
        let mut f = vec![0.0; k];
        for &x in xs {
            f[x] += 1.0 / xs.len() as f64;
        }
        f
    };
    let (fa, fb) = (freq(a), freq(b));
    0.5 * fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `n` synthetic patches: sample, mitigate, decode.
pub fn synthesize_source(
    model: &QcbmModel,
    codebook: &Codebook,
    n: usize,
    seed: u64,
    noise_p: f64,
) -> Result<PatchTensor> {
    if model.ansatz.n_qubits != codebook.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: codebook.n_qubits,
            actual: model.ansatz.n_qubits,
        });
    }
    let indices: Vec<usize> = if n == 0 {
        Vec::new()
    } else {
        sample_qcbm_indices(model, n, seed, noise_p)?
            .into_iter()
            .map(mitigate_index)
            .collect()
    };
    let mut out = decode(&indices, codebook)?;
    out.name = "synthetic_source".into();
    Ok(out.with_provenance(
        "generator",
        json!({
            "kind": "qcbm",
            "codebook_k": codebook.k,
            "codebook_seed": codebook.seed,
            "layers": model.ansatz.layers,
            "training_seed": model.seed,
            "training_stage": model.stage,
            "final_loss": model.final_loss,
            "sample_seed": seed,
            "noise_p": noise_p,
        }),
    ))
}
