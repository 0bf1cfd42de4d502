//! Quanvolutional feature extraction.
//!
//! Every `patch × patch` window of every input channel is min-max scaled to
//! angles, encoded on `patch²` qubits, pushed through a fixed seeded random
//! circuit and read out as per-qubit `⟨Z⟩` values. For large datasets a
//! [`FeatureDictionary`] of sampled input/output pairs replaces direct
//! simulation with nearest-centroid lookup. A ridge [`ReadoutModel`] maps the
//! features to radar targets.

mod dictionary;
mod layer;
mod readout;

pub use dictionary::{build_dictionary, FeatureDictionary};
pub use layer::{
    extract_grid_patches, extract_patches, quanvolve_angles, FeatureSource, QuanvLayer, QuanvLayerSpec, QuanvMode,
};
pub use readout::{fit_readout, pixel_design, predict, predictions_to_tensor, target_matrix, ReadoutModel};
