//! Spherical sampling lookup tables for equirectangular panoramas.
//!
//! A [`SamplingLut`] records, for every output position of a `k x k`
//! convolution, where the taps of a spherical kernel land in the panorama.
//! [`resample`] gathers those taps into an ordinary image on which a stock
//! stride-`k` convolution ([`conv2d_strided`]) samples on the sphere, so
//! planar pretrained weights can be reused without ERP distortion.
//! [`gather_dot_oracle`] computes the same result directly and is used to
//! check the equivalence.

mod codec;
pub mod conv;
pub mod diffusion;
pub mod error;
pub mod fusion;
pub mod geometry;
pub mod kernel;
pub mod pnm;
pub mod resample;
pub mod rng;
pub mod tensor;
pub mod verify;

pub use conv::{cascade_downsample, conv2d_strided, gather_dot_oracle, spherical_conv, WeightSet};
pub use error::{Error, Result};
pub use fusion::{argmax_labels, fuse, FusionInput, LabelMap};
pub use geometry::{
    circle_points, dir_to_erp, pixel_to_dir, rotation_to_center, ErpCoord, ProjectionConfig,
    Rotation, UnitVec,
};
pub use kernel::{
    build_lut, build_template, KernelSize, KernelSpec, KernelTemplate, Ring, SamplingLut,
    SpacingMode, TapIndex,
};
pub use resample::{bilinear_sample, resample};
pub use rng::SeededRng;
pub use tensor::Tensor;
