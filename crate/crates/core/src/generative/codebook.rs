use std::collections::HashSet;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::wxdata::{write_atomic, PatchTensor};

/// Discrete latent vocabulary: `k` patch-space centroids, one qubit each.
///
/// Entries are ordered by the number of training patches they absorbed
/// (largest first), so index 0 is the most common codeword.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub k: usize,
    pub n_qubits: usize,
    pub patch_shape: [usize; 3],
    pub channels: Vec<String>,
    pub units: Vec<String>,
    #[serde(skip)]
    pub entries: Vec<Vec<f64>>,
    /// Training patches assigned to each entry at convergence.
    pub cluster_sizes: Vec<usize>,
    pub iterations: usize,
    pub seed: u64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest entry, lowest index on ties.
pub(crate) fn nearest(entries: &[Vec<f64>], v: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, e) in entries.iter().enumerate() {
        let d = sq_dist(e, v);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// k-means with k-means++ seeding over flattened patches.
pub fn fit_codebook(patches: &PatchTensor, k: usize, iters: usize, seed: u64) -> Result<Codebook> {
    if k == 0 {
        return Err(Error::invalid("codebook size must be >= 1"));
    }
    let points: Vec<Vec<f64>> = (0..patches.len()).map(|i| patches.patch_f64(i)).collect();
    let distinct: HashSet<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|v| v.to_bits()).collect())
        .collect();
    if distinct.len() < k {
        return Err(Error::PopulationTooSmall {
            requested: k,
            available: distinct.len(),
        });
    }
    let mut rng = rng_from_seed(seed);

    let mut centers: Vec<Vec<f64>> = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = d2.iter().rposition(|&d| d > 0.0).expect("distinct points remain");
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 && u < d {
                pick = i;
                break;
            }
            u -= d;
        }
        centers.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(&points) {
            *d = d.min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }

    let dim = points[0].len();
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(&centers, p)).collect();
    let mut iterations = 0;
    while iterations < iters {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // re-seed an empty cluster at the point farthest from its centroid
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centers[assign[a]])
                            .total_cmp(&sq_dist(&points[b], &centers[assign[b]]))
                    })
                    .expect("non-empty");
                centers[c] = points[far].clone();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(&centers, p)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }

    let mut sizes = vec![0usize; k];
    for &a in &assign {
        sizes[a] += 1;
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let entries: Vec<Vec<f64>> = order.iter().map(|&i| centers[i].clone()).collect();
    Ok(Codebook {
        k,
        n_qubits: k,
        patch_shape: patches.patch_shape(),
        channels: patches.channels.clone(),
        units: patches.units.clone(),
        entries,
        cluster_sizes: order.iter().map(|&i| sizes[i]).collect(),
        iterations,
        seed,
    })
}

impl Codebook {
    pub fn dim(&self) -> usize {
        self.patch_shape.iter().product()
    }

    /// `<stem>.json` metadata plus `<stem>.bin` with the entries as
    /// little-endian f64, entry-major.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let (json, bin) = crate::wxdata::tensor_paths(stem);
        let mut bytes = Vec::with_capacity(self.k * self.dim() * 8);
        for e in &self.entries {
            for v in e {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        write_atomic(&bin, &bytes)?;
        let mut value = serde_json::to_value(self)?;
        value["dtype"] = "f64le".into();
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        write_atomic(&json, text.as_bytes())
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (json, bin) = crate::wxdata::tensor_paths(stem);
        let text = std::fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
        let mut cb: Codebook = serde_json::from_str(&text).map_err(|source| Error::Manifest {
            path: json.clone(),
            source,
        })?;
        let bytes = std::fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
        let expected = cb.k * cb.dim() * 8;
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
        cb.entries = flat.chunks(cb.dim()).map(<[f64]>::to_vec).collect();
        Ok(cb)
    }
}

/// Nearest codebook entry per patch (Euclidean, lowest index on ties).
pub fn encode(patches: &PatchTensor, codebook: &Codebook) -> Result<Vec<usize>> {
    if patches.patch_len() != codebook.dim() {
        return Err(Error::DimensionMismatch {
            expected: codebook.dim(),
            actual: patches.patch_len(),
        });
    }
    Ok((0..patches.len())
        .map(|i| nearest(&codebook.entries, &patches.patch_f64(i)))
        .collect())
}

/// Patch `i` of the output is entry `indices[i]`.
pub fn decode(indices: &[usize], codebook: &Codebook) -> Result<PatchTensor> {
    let mut data = Vec::with_capacity(indices.len() * codebook.dim());
    for &i in indices {
        let e = codebook.entries.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: codebook.k,
        })?;
        data.extend(e.iter().map(|&v| v as f32));
    }
    let [c, h, w] = codebook.patch_shape;
    PatchTensor::new(
        "decoded",
        [indices.len(), c, h, w],
        codebook.channels.clone(),
        codebook.units.clone(),
        data,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(rows: &[Vec<f32>]) -> PatchTensor {
        let d = rows[0].len();
        PatchTensor::new(
            "t",
            [rows.len(), 1, 1, d],
            vec!["x".into()],
            vec!["-".into()],
            rows.concat(),
        )
        .unwrap()
    }

    #[test]
    fn distinct_patches_become_entries() {
        let rows = vec![vec![0.0, 0.0], vec![5.0, 1.0], vec![-3.0, 2.0]];
        let cb = fit_codebook(&tensor(&rows), 3, 50, 1).unwrap();
        let idx = encode(&tensor(&rows), &cb).unwrap();
        let back = decode(&idx, &cb).unwrap();
        assert_eq!(back.data(), tensor(&rows).data());
        assert!(fit_codebook(&tensor(&rows), 4, 50, 1).is_err());
    }

    #[test]
    fn encode_ties_go_to_lowest_index() {
        let mut cb = fit_codebook(&tensor(&[vec![0.0], vec![1.0], vec![2.0]]), 3, 10, 0).unwrap();
        cb.entries = vec![vec![0.0], vec![-1.0], vec![5.0], vec![1.0]];
        cb.k = 4;
        assert_eq!(encode(&tensor(&[vec![0.0]]), &cb).unwrap(), vec![0]);
        cb.entries[0] = vec![9.0];
        assert_eq!(encode(&tensor(&[vec![0.0]]), &cb).unwrap(), vec![1]);
    }

    #[test]
    fn save_load_round_trip() {
        let rows = vec![vec![0.1, 0.2], vec![5.0, 1.0]];
        let cb = fit_codebook(&tensor(&rows), 2, 10, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("cb");
        cb.save(&stem).unwrap();
        assert_eq!(Codebook::load(&stem).unwrap(), cb);
    }
}
