use std::path::Path;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremaps::FeatureScaler;
use crate::rng::{derive_seed, rng_from_seed};
use crate::wxdata::{tensor_paths, write_atomic, PatchTensor};

use super::layer::{quanvolve_angles, QuanvLayer, QuanvLayerSpec, QuanvMode};

/// Sampled input → output pairs of a quanvolutional layer.
///
/// Centroids are scaled patches (encoding angles), shared across input
/// channels; outputs are the paired `⟨Z⟩` vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDictionary {
    pub spec: QuanvLayerSpec,
    pub spec_fingerprint: String,
    pub scalers: Vec<FeatureScaler>,
    pub seed: u64,
    /// Whether outputs were shot-estimated.
    pub sampled: bool,
    /// Patches the centroids were drawn from.
    pub population: usize,
    #[serde(skip)]
    pub centroids: Vec<Vec<f64>>,
    #[serde(skip)]
    pub outputs: Vec<Vec<f64>>,
}

/// Draws `k` training patches without replacement and quanvolves each
/// once. Outputs are shot-estimated unless `exact` is set.
pub fn build_dictionary(layer: &QuanvLayer, train: &PatchTensor, k: usize, seed: u64, exact: bool) -> Result<FeatureDictionary> {
    let population = layer.scaled_patches(train)?;
    if k == 0 {
        return Err(Error::invalid("dictionary size must be >= 1"));
    }
    if k > population.len() {
        return Err(Error::PopulationTooSmall {
            requested: k,
            available: population.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let picks = sample(&mut rng, population.len(), k).into_vec();
    let centroids: Vec<Vec<f64>> = picks.iter().map(|&i| population[i].clone()).collect();
    let outputs = centroids
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let mode = if exact {
                QuanvMode::Exact
            } else {
                QuanvMode::Sampled {
                    seed: derive_seed(seed, i as u64 + 1),
                }
            };
            quanvolve_angles(a, &layer.spec, layer.circuit(), mode)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureDictionary {
        spec: layer.spec,
        spec_fingerprint: layer.spec.fingerprint(),
        scalers: layer.scalers.clone(),
        seed,
        sampled: !exact,
        population: population.len(),
        centroids,
        outputs,
    })
}

impl FeatureDictionary {
    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    /// Index of the nearest centroid (Euclidean, lowest index on ties).
    pub fn nearest(&self, query: &[f64]) -> Result<usize> {
        if self.is_empty() {
            return Err(Error::EmptyInput("feature dictionary"));
        }
        let dim = self.centroids[0].len();
        if query.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: query.len(),
            });
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.centroids.iter().enumerate() {
            let d: f64 = c.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        Ok(best)
    }

    /// Paired output of the nearest centroid to `query` (scaled angles).
    pub fn lookup(&self, query: &[f64]) -> Result<&[f64]> {
        Ok(&self.outputs[self.nearest(query)?])
    }

    /// Rebuilds the layer this dictionary belongs to.
    pub fn layer(&self) -> Result<QuanvLayer> {
        QuanvLayer::with_scalers(self.spec, self.scalers.clone())
    }

    /// `<stem>.json` plus `<stem>.bin`: centroids then outputs, row-major
    /// little-endian f64.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let (json, bin) = tensor_paths(stem);
        let mut bytes = Vec::new();
        for row in self.centroids.iter().chain(&self.outputs) {
            for v in row {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        write_atomic(&bin, &bytes)?;
        let mut value = serde_json::to_value(self)?;
        value["k"] = self.len().into();
        value["dtype"] = "f64le".into();
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        write_atomic(&json, text.as_bytes())
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (json, bin) = tensor_paths(stem);
        let text = std::fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|source| Error::Manifest {
            path: json.clone(),
            source,
        })?;
        let k = value["k"]
            .as_u64()
            .ok_or_else(|| Error::invalid(format!("{}: missing entry count", json.display())))? as usize;
        let mut dict: FeatureDictionary = serde_json::from_value(value).map_err(|source| Error::Manifest {
            path: json.clone(),
            source,
        })?;
        let d = dict.spec.n_qubits();
        let bytes = std::fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
        let expected = 2 * k * d * 8;
        if bytes.len() != expected {
            return Err(Error::LengthMismatch {
                path: bin,
                expected,
                actual: bytes.len(),
            });
        }
        let flat: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        let rows: Vec<Vec<f64>> = flat.chunks(d).map(<[f64]>::to_vec).collect();
        dict.outputs = rows[k..].to_vec();
        dict.centroids = rows[..k].to_vec();
        Ok(dict)
    }
}
