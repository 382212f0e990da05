//! Cross-attention and the training losses on a small dense-matrix type.

mod loss;
mod matrix;
mod ops;

pub use loss::{
    localization_loss, localization_loss_grad, noise_mse, part_attention_pairs, parts_localization_loss, total_loss,
    LossBreakdown, LossMode, LossWeights, DEFAULT_LAMBDA_B, DEFAULT_LAMBDA_E,
};
pub use matrix::Matrix;
pub use ops::{attention_map, cross_attention, AttentionOutput};
