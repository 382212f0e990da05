use serde::{Deserialize, Serialize};

use super::{attention_map, Matrix};
use crate::conditioning::{PartLabel, PartSegmentation};
use crate::error::{Error, Result};
use crate::imaging::Mask;

pub const DEFAULT_LAMBDA_B: f64 = 1e-3;
pub const DEFAULT_LAMBDA_E: f64 = 2.5e-4;

/// How the two region means of the localization loss are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Each mean divides by its own region's cell count.
    #[default]
    RegionNormalized,
    /// Both means divide by the total cell count.
    Literal,
}

fn check(a: &Matrix, m: &Mask) -> Result<()> {
    if (a.cols(), a.rows()) != (m.width(), m.height()) {
        return Err(Error::shape(format!(
            "attention map {}x{} vs mask {}x{}",
            a.cols(),
            a.rows(),
            m.width(),
            m.height()
        )));
    }
    if let Some(v) = a.data().iter().find(|&&v| v < 0.0) {
        return Err(Error::InvalidValue(format!("negative attention value {v}")));
    }
    Ok(())
}

/// Per-cell weights `w` such that the loss is `sum(w * A)`.
fn weights(m: &Mask, mode: LossMode) -> Vec<f64> {
    let n = m.data().len();
    let inside = m.count();
    let outside = n - inside;
    let (w_out, w_in) = match mode {
        LossMode::RegionNormalized => (
            if outside > 0 { 1.0 / outside as f64 } else { 0.0 },
            if inside > 0 { -1.0 / inside as f64 } else { 0.0 },
        ),
        LossMode::Literal if n > 0 => (1.0 / n as f64, -1.0 / n as f64),
        LossMode::Literal => (0.0, 0.0),
    };
    m.data().iter().map(|&v| if v != 0 { w_in } else { w_out }).collect()
}

/// Mean attention outside the mask minus mean attention inside it.
pub fn localization_loss(a: &Matrix, m: &Mask, mode: LossMode) -> Result<f64> {
    check(a, m)?;
    let w = weights(m, mode);
    let mut out = 0.0;
    let mut inside = 0.0;
    for ((&av, &wv), &mv) in a.data().iter().zip(&w).zip(m.data()) {
        if mv != 0 {
            inside += av * wv;
        } else {
            out += av * wv;
        }
    }
    Ok(out + inside)
}

/// Gradient of [`localization_loss`] with respect to `A`. It does not depend
/// on `A` because the loss is affine in it.
pub fn localization_loss_grad(a: &Matrix, m: &Mask, mode: LossMode) -> Result<Matrix> {
    check(a, m)?;
    Matrix::new(a.rows(), a.cols(), weights(m, mode))
}

/// Body-part loss: the localization loss of every part's attention map
/// against that part's mask, summed over parts.
pub fn parts_localization_loss(parts: &[(Matrix, Mask)], mode: LossMode) -> Result<f64> {
    parts.iter().map(|(a, m)| localization_loss(a, m, mode)).sum()
}

/// Builds the per-part pairs for [`parts_localization_loss`] from a full
/// `(h*w) x keys` attention matrix and the label of each key. A part's map is
/// the attention mass its keys receive; its mask is the part region of `seg`
/// resampled to `h x w`. Parts absent from `key_labels` are skipped.
pub fn part_attention_pairs(
    a: &Matrix,
    key_labels: &[PartLabel],
    seg: &PartSegmentation,
    h: usize,
    w: usize,
) -> Result<Vec<(Matrix, Mask)>> {
    if key_labels.len() != a.cols() {
        return Err(Error::shape(format!(
            "{} key labels for {} attention columns",
            key_labels.len(),
            a.cols()
        )));
    }
    let mut out = Vec::new();
    for label in PartLabel::PARTS {
        if !key_labels.contains(&label) {
            continue;
        }
        let map = attention_map(a, |c| key_labels[c] == label, h, w)?;
        let mask = seg.part_mask(label).resize_nearest(w, h);
        out.push((map, mask));
    }
    Ok(out)
}

/// Mean squared difference between true and predicted noise.
pub fn noise_mse(eps: &[f32], eps_hat: &[f32]) -> Result<f64> {
    if eps.len() != eps_hat.len() {
        return Err(Error::shape(format!(
            "noise has {} values, prediction has {}",
            eps.len(),
            eps_hat.len()
        )));
    }
    if eps.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = eps
        .iter()
        .zip(eps_hat)
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    Ok(sum / eps.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda1: DEFAULT_LAMBDA_B,
            lambda2: DEFAULT_LAMBDA_E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_sd: f64,
    pub l_b: f64,
    pub l_e: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub total: f64,
}

/// `l_sd + lambda1 * l_b + lambda2 * l_e`.
pub fn total_loss(l_sd: f64, l_b: f64, l_e: f64, weights: LossWeights) -> Result<LossBreakdown> {
    for lambda in [weights.lambda1, weights.lambda2] {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidWeight(lambda));
        }
    }
    Ok(LossBreakdown {
        l_sd,
        l_b,
        l_e,
        lambda1: weights.lambda1,
        lambda2: weights.lambda2,
        total: l_sd + weights.lambda1 * l_b + weights.lambda2 * l_e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> Matrix {
        Matrix::new(1, v.len(), v.to_vec()).unwrap()
    }

    fn mask_row(v: &[u8]) -> Mask {
        Mask::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn hand_values() {
        let mode = LossMode::RegionNormalized;
        let l = localization_loss(&row(&[0.8, 0.2]), &mask_row(&[1, 0]), mode).unwrap();
        assert!((l + 0.6).abs() < 1e-12);
        let g = localization_loss_grad(&row(&[0.8, 0.2]), &mask_row(&[1, 0]), mode).unwrap();
        assert_eq!(g.data(), &[-1.0, 1.0]);
    }

    #[test]
    fn uniform_attention_is_zero() {
        let m = Mask::from_fn(5, 3, |x, y| x > y);
        let a = Matrix::filled(3, 5, 0.37);
        assert!(localization_loss(&a, &m, LossMode::RegionNormalized).unwrap().abs() < 1e-12);
    }

    #[test]
    fn perfect_attention_is_minus_one() {
        let m = Mask::from_fn(4, 4, |x, _| x < 1);
        let a = Matrix::from_mask(&m);
        assert!((localization_loss(&a, &m, LossMode::RegionNormalized).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_inside_gradient() {
        let g = localization_loss_grad(&Matrix::filled(2, 3, 0.5), &Mask::ones(3, 2), LossMode::RegionNormalized).unwrap();
        assert!(g.data().iter().all(|&v| (v + 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn literal_mode_divides_by_all_cells() {
        let l = localization_loss(&row(&[0.8, 0.2, 0.0, 0.0]), &mask_row(&[1, 0, 0, 0]), LossMode::Literal).unwrap();
        assert!((l - (0.2 - 0.8) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn extent_mismatch() {
        assert!(matches!(
            localization_loss(&row(&[0.5, 0.5]), &mask_row(&[1, 0, 0]), LossMode::RegionNormalized),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn noise_values() {
        assert_eq!(noise_mse(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 2.5);
        assert_eq!(noise_mse(&[0.0; 4], &[1.0; 4]).unwrap(), 1.0);
        assert_eq!(noise_mse(&[0.3; 3], &[0.3; 3]).unwrap(), 0.0);
        assert!(noise_mse(&[0.0; 2], &[0.0; 3]).is_err());
    }

    #[test]
    fn total_with_defaults() {
        let w = LossWeights::default();
        assert_eq!((w.lambda1, w.lambda2), (1e-3, 2.5e-4));
        assert_eq!(total_loss(1.0, 0.0, 0.0, w).unwrap().total, 1.0);
        assert!((total_loss(0.5, -1.0, -1.0, w).unwrap().total - 0.49875).abs() < 1e-15);
        assert!(matches!(
            total_loss(0.0, 0.0, 0.0, LossWeights { lambda1: -1.0, lambda2: 0.0 }),
            Err(Error::InvalidWeight(_))
        ));
    }

    #[test]
    fn part_pairs_from_key_labels() {
        let seg = PartSegmentation::new(2, 1, vec![1, 4]).unwrap();
        // two queries (1x2 map), three keys: face, upper, upper
        let a = Matrix::new(2, 3, vec![0.6, 0.2, 0.2, 0.1, 0.5, 0.4]).unwrap();
        let labels = [PartLabel::Face, PartLabel::UpperClothing, PartLabel::UpperClothing];
        let pairs = part_attention_pairs(&a, &labels, &seg, 1, 2).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].0.data(), &[0.6, 0.1]);
        assert_eq!(pairs[1].0.data(), &[0.4, 0.9]);
        let total = parts_localization_loss(&pairs, LossMode::RegionNormalized).unwrap();
        // face: 0.1 - 0.6, upper: 0.4 - 0.9
        assert!((total + 1.0).abs() < 1e-12);
    }
}
