//! Quantum-kernel screening and hybrid quantum feature pipelines for
//! synthetic weather radar.
//!
//! * [`qsim`]: exact statevector simulator with seeded measurement sampling.
//! * [`featuremaps`]: angle / IQP encodings, fidelity circuits, random
//!   quanvolutional circuits.
//! * [`kernelscreen`]: PCA, classical and quantum kernels, geometric
//!   difference, SVM complexity test and the screening report.
//! * [`generative`]: codebook quantizer + quantum circuit Born machine source
//!   generator with readout-noise mitigation.
//! * [`quanvolve`]: quanvolutional feature extraction with a sampled
//!   input→output dictionary and a ridge readout head.
//! * [`wxverify`]: contingency tables, POD/SUCR/CSI/BIAS/MSE, histogram
//!   matching calibration and performance diagrams.
//! * [`wxdata`]: patch tensor files, splits and a seeded synthetic scene
//!   generator.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod featuremaps;
pub mod generative;
pub mod kernelscreen;
pub mod linalg;
pub mod qsim;
pub mod quanvolve;
pub mod rng;
pub mod wxdata;
pub mod wxverify;

pub use error::{Error, Result};
