//! Patch tensors, dataset splits and the synthetic scene generator.

mod split;
mod synthetic;
mod tensor;

pub use split::{split, Split};
pub use synthetic::{
    gaussian_blur, generate_synthetic, product_transforms, SyntheticConfig, SyntheticDataset, GRID,
    LGHT_CHANNELS, MOD_CHANNELS, SAT_CHANNELS, TARG_CHANNELS,
};
pub use tensor::{read_manifest, read_tensor, tensor_paths, write_tensor, Manifest, PatchTensor, DTYPE, RESOLUTION_KM};
pub(crate) use tensor::write_atomic;
