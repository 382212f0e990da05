//! Training-free building blocks for pose-guided human image editing.
//!
//! * [`imaging`]: image/mask containers, bilinear sampling, letterboxing, PNG formats.
//! * [`dense_warp`]: UV-atlas reposing of source pixels onto a target DensePose map.
//! * [`sparse_warp`]: keypoint homographies for placing a flat garment on a torso.
//! * [`conditioning`]: background extraction, pose rasters, the 9-channel
//!   conditioning stack, garment removal, part features and part augmentation.
//! * [`attention`]: cross-attention and the attention-localization / noise losses.
//! * [`curation`]: the single-person image quality filter over JSONL manifests.
//! * [`synthetic`]: deterministic fixture generators used by tests and the CLI.

pub mod attention;
pub mod conditioning;
pub mod curation;
pub mod dense_warp;
mod error;
pub mod imaging;
pub mod sparse_warp;
pub mod synthetic;
pub mod tensor;

pub use error::{Error, Result};
