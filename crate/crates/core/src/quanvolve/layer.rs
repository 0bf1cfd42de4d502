use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::featuremaps::{random_quanv_circuit, EncodingKind, EncodingSpec, FeatureScaler, RandomCircuitSpec};
use crate::qsim::{Circuit, Statevector};
use crate::rng::{child_rng, derive_seed};
use crate::wxdata::PatchTensor;

use super::dictionary::FeatureDictionary;

/// Geometry and circuits of a quanvolutional block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuanvLayerSpec {
    pub patch_size: usize,
    pub stride: usize,
    pub encoding: EncodingSpec,
    pub circuit: RandomCircuitSpec,
    /// Shots per patch in sampled mode.
    pub shots: usize,
}

impl QuanvLayerSpec {
    /// Patch `patch_size`, stride `stride`, `patch_size²` qubits.
    pub fn new(kind: EncodingKind, patch_size: usize, stride: usize, depth: usize, shots: usize, seed: u64) -> Self {
        let n = patch_size * patch_size;
        QuanvLayerSpec {
            patch_size,
            stride,
            encoding: EncodingSpec::of_kind(kind, n),
            circuit: RandomCircuitSpec {
                n_qubits: n,
                depth,
                seed,
            },
            shots,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.patch_size * self.patch_size
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        if self.patch_size == 0 || self.stride == 0 {
            return Err(Error::invalid("patch size and stride must be >= 1"));
        }
        if self.encoding.n_qubits != n || self.circuit.n_qubits != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: if self.encoding.n_qubits != n {
                    self.encoding.n_qubits
                } else {
                    self.circuit.n_qubits
                },
            });
        }
        if self.shots == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(())
    }

    /// Output grid side for an input side of `len`.
    pub fn grid_len(&self, len: usize) -> Result<usize> {
        if len < self.patch_size {
            return Err(Error::invalid(format!(
                "patch size {} exceeds image side {len}",
                self.patch_size
            )));
        }
        Ok((len - self.patch_size) / self.stride + 1)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum QuanvMode {
    Exact,
    Sampled { seed: u64 },
}

/// Row-major sliding windows of one `h × w` grid.
pub fn extract_grid_patches(grid: &[f32], h: usize, w: usize, patch_size: usize, stride: usize) -> Result<Vec<Vec<f64>>> {
    if grid.len() != h * w {
        return Err(Error::DimensionMismatch {
            expected: h * w,
            actual: grid.len(),
        });
    }
    if patch_size == 0 || stride == 0 {
        return Err(Error::invalid("patch size and stride must be >= 1"));
    }
    if h < patch_size || w < patch_size {
        return Err(Error::invalid(format!("patch size {patch_size} exceeds {h}x{w} image")));
    }
    let (gh, gw) = ((h - patch_size) / stride + 1, (w - patch_size) / stride + 1);
    let mut out = Vec::with_capacity(gh * gw);
    for gy in 0..gh {
        for gx in 0..gw {
            let mut p = Vec::with_capacity(patch_size * patch_size);
            for dy in 0..patch_size {
                let row = (gy * stride + dy) * w + gx * stride;
                p.extend(grid[row..row + patch_size].iter().map(|&v| v as f64));
            }
            out.push(p);
        }
    }
    Ok(out)
}

/// Patches of every channel of image `n`, channel-major.
pub fn extract_patches(image: &PatchTensor, n: usize, patch_size: usize, stride: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    let [_, c, h, w] = image.shape();
    (0..c)
        .map(|ch| extract_grid_patches(image.grid(n, ch), h, w, patch_size, stride))
        .collect()
}

/// Per-qubit `⟨Z⟩` after encoding `angles` and running `circuit`.
pub fn quanvolve_angles(angles: &[f64], spec: &QuanvLayerSpec, circuit: &Circuit, mode: QuanvMode) -> Result<Vec<f64>> {
    let n = spec.n_qubits();
    if angles.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: angles.len(),
        });
    }
    let mut state = Statevector::zero(n)?;
    spec.encoding.encode(angles)?.apply_to(&mut state)?;
    circuit.apply_to(&mut state)?;
    match mode {
        QuanvMode::Exact => (0..n).map(|q| state.expectation_z(q)).collect(),
        QuanvMode::Sampled { seed } => {
            let mut rng = child_rng(seed, 0);
            let mut ones = vec![0usize; n];
            for idx in state.sample_indices(spec.shots, &mut rng) {
                for (q, c) in ones.iter_mut().enumerate() {
                    *c += (idx >> q) & 1;
                }
            }
            Ok(ones
                .iter()
                .map(|&c| 1.0 - 2.0 * c as f64 / spec.shots as f64)
                .collect())
        }
    }
}

/// Where features come from in [`QuanvLayer::quanvolve_image`].
#[derive(Debug, Clone, Copy)]
pub enum FeatureSource<'a> {
    Direct(QuanvMode),
    Dictionary(&'a FeatureDictionary),
}

/// A spec with its compiled random circuit and per-channel pixel scalers.
#[derive(Debug, Clone, PartialEq)]
pub struct QuanvLayer {
    pub spec: QuanvLayerSpec,
    pub scalers: Vec<FeatureScaler>,
    circuit: Circuit,
}

impl QuanvLayer {
    /// Fits one `[min, max] → [0, π]` range per channel over all pixels of
    /// `train`.
    pub fn fit(spec: QuanvLayerSpec, train: &PatchTensor) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyInput("quanvolution training images"));
        }
        let [n, c, _, _] = train.shape();
        let scalers = (0..c)
            .map(|ch| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for i in 0..n {
                    for &v in train.grid(i, ch) {
                        lo = lo.min(v as f64);
                        hi = hi.max(v as f64);
                    }
                }
                FeatureScaler {
                    min: vec![lo],
                    max: vec![hi],
                }
            })
            .collect();
        Self::with_scalers(spec, scalers)
    }

    pub fn with_scalers(spec: QuanvLayerSpec, scalers: Vec<FeatureScaler>) -> Result<Self> {
        spec.validate()?;
        if scalers.iter().any(|s| s.dim() != 1) {
            return Err(Error::invalid("channel scalers must be one-dimensional"));
        }
        let circuit = random_quanv_circuit(&spec.circuit)?;
        Ok(QuanvLayer { spec, scalers, circuit })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn n_features(&self) -> usize {
        self.spec.n_qubits()
    }

    fn check_channels(&self, c: usize) -> Result<()> {
        if c != self.scalers.len() {
            return Err(Error::DimensionMismatch {
                expected: self.scalers.len(),
                actual: c,
            });
        }
        Ok(())
    }

    /// Raw pixel values of channel `channel` to encoding angles.
    pub fn scale(&self, channel: usize, patch: &[f64]) -> Vec<f64> {
        let s = &self.scalers[channel];
        patch
            .iter()
            .map(|&v| s.transform(&[v]).expect("one-dimensional")[0])
            .collect()
    }

    /// Scale, encode, run the random circuit, read `⟨Z⟩` per qubit.
    pub fn quanvolve_patch(&self, channel: usize, patch: &[f64], mode: QuanvMode) -> Result<Vec<f64>> {
        if channel >= self.scalers.len() {
            return Err(Error::IndexOutOfRange {
                index: channel,
                len: self.scalers.len(),
            });
        }
        quanvolve_angles(&self.scale(channel, patch), &self.spec, &self.circuit, mode)
    }

    /// Scaled patches of every image and channel, in (image, channel, cell)
    /// order.
    pub fn scaled_patches(&self, images: &PatchTensor) -> Result<Vec<Vec<f64>>> {
        self.check_channels(images.shape()[1])?;
        let mut out = Vec::new();
        for n in 0..images.len() {
            for (ch, patches) in extract_patches(images, n, self.spec.patch_size, self.spec.stride)?
                .into_iter()
                .enumerate()
            {
                out.extend(patches.iter().map(|p| self.scale(ch, p)));
            }
        }
        Ok(out)
    }

    /// `n × (C·d) × H' × W'` feature maps; output channel `c·d + q` holds
    /// qubit `q` of input channel `c`.
    pub fn quanvolve_image(&self, images: &PatchTensor, source: FeatureSource<'_>) -> Result<PatchTensor> {
        let [n, c, h, w] = images.shape();
        self.check_channels(c)?;
        let (gh, gw) = (self.spec.grid_len(h)?, self.spec.grid_len(w)?);
        let d = self.n_features();
        if let FeatureSource::Dictionary(dict) = source {
            if dict.spec_fingerprint != self.spec.fingerprint() {
                return Err(Error::invalid("dictionary was built for a different layer spec"));
            }
        }
        let cells = gh * gw;
        let jobs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..c).map(move |ch| (i, ch))).collect();
        let blocks: Vec<Vec<f32>> = jobs
            .par_iter()
            .map(|&(i, ch)| -> Result<Vec<f32>> {
                let patches = extract_grid_patches(images.grid(i, ch), h, w, self.spec.patch_size, self.spec.stride)?;
                // channel-major block: d planes of gh × gw
                let mut block = vec![0f32; d * cells];
                for (cell, p) in patches.iter().enumerate() {
                    let angles = self.scale(ch, p);
                    let feats = match source {
                        FeatureSource::Direct(QuanvMode::Exact) => {
                            quanvolve_angles(&angles, &self.spec, &self.circuit, QuanvMode::Exact)?
                        }
                        FeatureSource::Direct(QuanvMode::Sampled { seed }) => {
                            let stream = ((i * c + ch) * cells + cell) as u64;
                            let mode = QuanvMode::Sampled {
                                seed: derive_seed(seed, stream),
                            };
                            quanvolve_angles(&angles, &self.spec, &self.circuit, mode)?
                        }
                        FeatureSource::Dictionary(dict) => dict.lookup(&angles)?.to_vec(),
                    };
                    for (q, v) in feats.iter().enumerate() {
                        block[q * cells + cell] = *v as f32;
                    }
                }
                Ok(block)
            })
            .collect::<Result<_>>()?;
        let data: Vec<f32> = blocks.concat();
        let mut channels = Vec::with_capacity(c * d);
        for name in &images.channels {
            for q in 0..d {
                channels.push(format!("{name}_q{q}"));
            }
        }
        let mut out = PatchTensor::new(
            format!("{}_quanv", images.name),
            [n, c * d, gh, gw],
            channels,
            vec!["1".to_string(); c * d],
            data,
        )?;
        out.provenance.insert("spec_fingerprint".into(), self.spec.fingerprint().into());
        out.provenance.insert("patch_size".into(), self.spec.patch_size.into());
        out.provenance.insert("stride".into(), self.spec.stride.into());
        Ok(out)
    }
}
