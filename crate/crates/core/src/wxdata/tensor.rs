use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DTYPE: &str = "f32le";
pub const RESOLUTION_KM: f64 = 4.0;

/// Sidecar describing a `.bin` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub dtype: String,
    pub shape: [usize; 4],
    pub channels: Vec<String>,
    pub units: Vec<String>,
    pub resolution_km: f64,
    pub provenance: BTreeMap<String, serde_json::Value>,
}

/// `n × c × h × w` stack of float32 grids, stored n-major then c, h, w.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchTensor {
    pub name: String,
    shape: [usize; 4],
    pub channels: Vec<String>,
    pub units: Vec<String>,
    pub provenance: BTreeMap<String, serde_json::Value>,
    data: Vec<f32>,
}

impl PatchTensor {
    pub fn new(
        name: impl Into<String>,
        shape: [usize; 4],
        channels: Vec<String>,
        units: Vec<String>,
        data: Vec<f32>,
    ) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        if channels.len() != shape[1] || units.len() != shape[1] {
            return Err(Error::invalid(format!(
                "{} channel names / {} units for {} channels",
                channels.len(),
                units.len(),
                shape[1]
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tensor payload"));
        }
        Ok(PatchTensor {
            name: name.into(),
            shape,
            channels,
            units,
            provenance: BTreeMap::new(),
            data,
        })
    }

    /// Zero patches with the given per-patch layout.
    pub fn empty_like(name: impl Into<String>, chw: [usize; 3], channels: Vec<String>, units: Vec<String>) -> Result<Self> {
        Self::new(name, [0, chw[0], chw[1], chw[2]], channels, units, Vec::new())
    }

    pub fn shape(&self) -> [usize; 4] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.shape[0]
    }

    pub fn is_empty(&self) -> bool {
        self.shape[0] == 0
    }

    pub fn patch_shape(&self) -> [usize; 3] {
        [self.shape[1], self.shape[2], self.shape[3]]
    }

    pub fn patch_len(&self) -> usize {
        self.shape[1] * self.shape[2] * self.shape[3]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn patch(&self, i: usize) -> &[f32] {
        let l = self.patch_len();
        &self.data[i * l..(i + 1) * l]
    }

    /// One `h × w` grid of patch `i`.
    pub fn grid(&self, i: usize, c: usize) -> &[f32] {
        let hw = self.shape[2] * self.shape[3];
        &self.patch(i)[c * hw..(c + 1) * hw]
    }

    pub fn get(&self, n: usize, c: usize, y: usize, x: usize) -> f32 {
        let [_, cc, h, w] = self.shape;
        self.data[((n * cc + c) * h + y) * w + x]
    }

    pub fn patch_f64(&self, i: usize) -> Vec<f64> {
        self.patch(i).iter().map(|&v| v as f64).collect()
    }

    /// New tensor holding the listed patches in order.
    pub fn select(&self, indices: &[usize]) -> Result<PatchTensor> {
        let mut data = Vec::with_capacity(indices.len() * self.patch_len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange { index: i, len: self.len() });
            }
            data.extend_from_slice(self.patch(i));
        }
        let mut out = PatchTensor::new(
            self.name.clone(),
            [indices.len(), self.shape[1], self.shape[2], self.shape[3]],
            self.channels.clone(),
            self.units.clone(),
            data,
        )?;
        out.provenance = self.provenance.clone();
        Ok(out)
    }

    pub fn with_provenance(mut self, key: &str, value: serde_json::Value) -> Self {
        self.provenance.insert(key.to_string(), value);
        self
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            name: self.name.clone(),
            dtype: DTYPE.to_string(),
            shape: self.shape,
            channels: self.channels.clone(),
            units: self.units.clone(),
            resolution_km: RESOLUTION_KM,
            provenance: self.provenance.clone(),
        }
    }
}

/// `<stem>.json` and `<stem>.bin`.
pub fn tensor_paths(stem: &Path) -> (PathBuf, PathBuf) {
    let s = stem.as_os_str().to_owned();
    let mut json = s.clone();
    json.push(".json");
    let mut bin = s;
    bin.push(".bin");
    (PathBuf::from(json), PathBuf::from(bin))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Writes the payload and then the manifest, each via temp file + rename.
pub fn write_tensor(t: &PatchTensor, stem: &Path) -> Result<()> {
    let (json, bin) = tensor_paths(stem);
    let mut bytes = Vec::with_capacity(t.data.len() * 4);
    for v in &t.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(&bin, &bytes)?;
    let mut text = serde_json::to_string_pretty(&t.manifest())?;
    text.push('\n');
    write_atomic(&json, text.as_bytes())
}

pub fn read_manifest(stem: &Path) -> Result<Manifest> {
    let (json, _) = tensor_paths(stem);
    let text = std::fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Manifest { path: json, source })
}

pub fn read_tensor(stem: &Path) -> Result<PatchTensor> {
    let manifest = read_manifest(stem)?;
    let (json, bin) = tensor_paths(stem);
    if manifest.dtype != DTYPE {
        return Err(Error::invalid(format!(
            "{}: unsupported dtype {:?}",
            json.display(),
            manifest.dtype
        )));
    }
    let bytes = std::fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    let expected = manifest.shape.iter().product::<usize>() * 4;
    if bytes.len() != expected {
        return Err(Error::LengthMismatch {
            path: bin,
            expected,
            actual: bytes.len(),
        });
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let mut t = PatchTensor::new(manifest.name, manifest.shape, manifest.channels, manifest.units, data)?;
    t.provenance = manifest.provenance;
    Ok(t)
}
