//! Conditioning inputs: the packed condition stack, partial backgrounds, pose
//! rasters, garment removal, part features, and orientation augmentation.

mod augment;
mod background;
mod features;
mod garment;
mod render;
mod segmentation;
mod stack;

pub use augment::{apply_part, augment_parts, draw_part, AugmentConfig, PartDraw};
pub use background::{extract_background, pose_box, BackgroundOptions, PoseBox, DEFAULT_BOX_MARGIN};
pub use features::{
    downsample_majority, extract_part_features, stack_token_rows, FeatureGrid, LabelEmbeddings, PartFeatureSet,
    PartFeatures,
};
pub use garment::{remove_garment, DEFAULT_REMOVAL_FILL};
pub use render::{
    limb_thickness, render_densepose, render_keypoints, render_pose, PoseInput, JOINTS, LIMBS, LIMB_COLORS,
};
pub use segmentation::{PartLabel, PartSegmentation, PixelBox, PALETTE};
pub use stack::{pack_condition, ConditionStack, Slot, STACK_CHANNELS};
