//! Keypoint-driven perspective warping of a canonical-view garment.

mod eigen;
mod homography;
mod warp;

pub use homography::{estimate_homography, reprojection_rmse, Homography, Point};
pub use warp::{warp_garment, warp_garment_default, warp_perspective, GarmentWarp};
