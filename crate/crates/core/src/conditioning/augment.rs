use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::segmentation::{PartLabel, PartSegmentation, PixelBox};
use crate::error::{Error, Result};
use crate::imaging::Image;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    /// Half-width of the uniform jitter added to the base rotation, degrees.
    pub jitter_deg: f64,
    pub allow_flip: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            jitter_deg: 15.0,
            allow_flip: true,
        }
    }
}

/// The random transform applied to one part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartDraw {
    /// Base rotation in counter-clockwise quarter turns, 0..=3.
    pub quarter_turns: u8,
    pub jitter_deg: f64,
    pub flip: bool,
}

impl PartDraw {
    pub fn angle_deg(&self) -> f64 {
        self.quarter_turns as f64 * 90.0 + self.jitter_deg
    }
}

/// Draws the transform for `label` from its own stream of `seed`, so the
/// result does not depend on which other parts are present.
pub fn draw_part(seed: u64, label: PartLabel, cfg: &AugmentConfig) -> PartDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label.id() as u64);
    let quarter_turns = rng.random_range(0..4u8);
    let jitter_deg = if cfg.jitter_deg > 0.0 {
        rng.random_range(-cfg.jitter_deg..=cfg.jitter_deg)
    } else {
        0.0
    };
    let flip = cfg.allow_flip && rng.random_bool(0.5);
    PartDraw {
        quarter_turns,
        jitter_deg,
        flip,
    }
}

/// Randomly re-orients every present part inside its own bounding box.
///
/// Each output pixel of the bbox is inverse-mapped about the bbox centre
/// (nearest sample). It is overwritten only when the preimage lies in the
/// bbox and carries the part's label; everything else keeps the original
/// value. Parts read from the unmodified input and are composited in label
/// order.
pub fn augment_parts(img: &Image, seg: &PartSegmentation, seed: u64, cfg: &AugmentConfig) -> Result<Image> {
    if !img.same_extent(seg) {
        return Err(Error::shape(format!(
            "image {}x{} vs segmentation {}x{}",
            img.width(),
            img.height(),
            seg.width(),
            seg.height()
        )));
    }
    let mut out = img.clone();
    for label in seg.present_labels() {
        let bbox = seg.bbox(label).expect("present label has a bbox");
        let draw = draw_part(seed, label, cfg);
        apply_part(img, seg, &mut out, label, bbox, &draw);
    }
    Ok(out)
}

/// Applies one part's transform. Exposed for fixed-transform callers.
pub fn apply_part(
    src: &Image,
    seg: &PartSegmentation,
    out: &mut Image,
    label: PartLabel,
    bbox: PixelBox,
    draw: &PartDraw,
) {
    let inv = inverse_matrix(draw);
    let cx = (bbox.x0 + bbox.x1) as f64 / 2.0;
    let cy = (bbox.y0 + bbox.y1) as f64 / 2.0;
    for y in bbox.y0..=bbox.y1 {
        for x in bbox.x0..=bbox.x1 {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let sx = (inv[0][0] * dx + inv[0][1] * dy + cx).round();
            let sy = (inv[1][0] * dx + inv[1][1] * dy + cy).round();
            if sx < bbox.x0 as f64 || sy < bbox.y0 as f64 || sx > bbox.x1 as f64 || sy > bbox.y1 as f64 {
                continue;
            }
            let (sx, sy) = (sx as usize, sy as usize);
            if seg.label(sx, sy) != label.id() {
                continue;
            }
            let px = src.pixel(sx, sy).to_vec();
            out.pixel_mut(x, y).copy_from_slice(&px);
        }
    }
}

/// Inverse of `rotate(angle) * flip` in image coordinates (y down, so a
/// positive angle turns counter-clockwise on screen). Quarter turns are exact.
fn inverse_matrix(draw: &PartDraw) -> [[f64; 2]; 2] {
    let quarter: [[f64; 2]; 2] = match draw.quarter_turns % 4 {
        0 => [[1.0, 0.0], [0.0, 1.0]],
        1 => [[0.0, 1.0], [-1.0, 0.0]],
        2 => [[-1.0, 0.0], [0.0, -1.0]],
        _ => [[0.0, -1.0], [1.0, 0.0]],
    };
    let (s, c) = draw.jitter_deg.to_radians().sin_cos();
    let jitter = [[c, s], [-s, c]];
    let fwd = mul(&quarter, &jitter);
    let fwd = if draw.flip { mul(&fwd, &[[-1.0, 0.0], [0.0, 1.0]]) } else { fwd };
    // rotation and reflection are orthogonal: inverse = transpose
    [[fwd[0][0], fwd[1][0]], [fwd[0][1], fwd[1][1]]]
}

fn mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Image {
        let n = (w * h) as f32;
        Image::new(w, h, 1, (0..w * h).map(|i| i as f32 / n).collect()).unwrap()
    }

    #[test]
    fn background_only_is_identity() {
        let img = ramp(6, 5);
        let out = augment_parts(&img, &PartSegmentation::background(6, 5), 7, &AugmentConfig::default()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn deterministic_in_seed() {
        let img = ramp(8, 8);
        let labels = (0..64).map(|i| (i % 3) as u8 * 2).collect();
        let seg = PartSegmentation::new(8, 8, labels).unwrap();
        let cfg = AugmentConfig::default();
        assert_eq!(
            augment_parts(&img, &seg, 42, &cfg).unwrap(),
            augment_parts(&img, &seg, 42, &cfg).unwrap()
        );
    }

    #[test]
    fn draws_are_per_label_streams() {
        let cfg = AugmentConfig::default();
        let a = draw_part(3, PartLabel::Face, &cfg);
        assert_eq!(a, draw_part(3, PartLabel::Face, &cfg));
        let all: Vec<_> = PartLabel::PARTS.iter().map(|&l| draw_part(3, l, &cfg)).collect();
        assert!(all.iter().any(|d| d != &a));
        for d in all {
            assert!(d.quarter_turns < 4 && d.jitter_deg.abs() <= 15.0);
        }
    }

    #[test]
    fn quarter_turn_inverse_is_exact() {
        let d = PartDraw {
            quarter_turns: 1,
            jitter_deg: 0.0,
            flip: false,
        };
        assert_eq!(inverse_matrix(&d), [[0.0, -1.0], [1.0, 0.0]]);
    }

    #[test]
    fn shape_mismatch() {
        assert!(augment_parts(&ramp(3, 3), &PartSegmentation::background(3, 2), 0, &AugmentConfig::default()).is_err());
    }
}
