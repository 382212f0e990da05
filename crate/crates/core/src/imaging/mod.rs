//! Image and mask containers, sampling, letterbox resizing and file formats.

mod densepose;
mod image;
pub mod io;
mod keypoints;
mod resize;
mod sample;

pub use self::image::{Extent, Image, Mask};
pub use densepose::{DensePoseMap, PART_COUNT};
pub use keypoints::{Keypoint, KeypointSet, CONFIDENCE_FLOOR};
pub use resize::{resize_bilinear, resize_pad, Placement};
pub use sample::bilinear_sample;

pub(crate) use sample::{sample_into, Stencil};
