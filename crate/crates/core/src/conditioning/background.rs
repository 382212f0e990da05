use crate::error::{Error, Result};
use crate::imaging::{Image, KeypointSet, CONFIDENCE_FLOOR};

pub const DEFAULT_BOX_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundOptions {
    /// Each box grows by `margin * max(box width, box height)` on every side.
    pub margin: f64,
    /// Value written into the masked region, on every channel.
    pub fill: f32,
    pub confidence_floor: f64,
}

impl Default for BackgroundOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_BOX_MARGIN,
            fill: 0.0,
            confidence_floor: CONFIDENCE_FLOOR,
        }
    }
}

/// Axis-aligned box in continuous pixel coordinates, inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl PoseBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

/// Bounding box of the confident keypoints, expanded by the margin.
pub fn pose_box(kps: &KeypointSet, margin: f64, floor: f64) -> Option<PoseBox> {
    let mut it = kps.confident(floor);
    let first = it.next()?;
    let mut b = PoseBox {
        x0: first.x,
        y0: first.y,
        x1: first.x,
        y1: first.y,
    };
    for k in it {
        b.x0 = b.x0.min(k.x);
        b.y0 = b.y0.min(k.y);
        b.x1 = b.x1.max(k.x);
        b.y1 = b.y1.max(k.y);
    }
    let pad = margin * (b.x1 - b.x0).max(b.y1 - b.y0);
    Some(PoseBox {
        x0: b.x0 - pad,
        y0: b.y0 - pad,
        x1: b.x1 + pad,
        y1: b.y1 + pad,
    })
}

/// Partial background: the input with the union of the source and target
/// pose boxes overwritten by `opts.fill`. Pixels outside the union are
/// untouched. Fails with `EmptyPose` only when neither set has a usable keypoint.
pub fn extract_background(
    img: &Image,
    src_kps: &KeypointSet,
    tgt_kps: &KeypointSet,
    opts: &BackgroundOptions,
) -> Result<Image> {
    if !(opts.margin >= 0.0) {
        return Err(Error::InvalidValue(format!("margin must be non-negative, got {}", opts.margin)));
    }
    if !(0.0..=1.0).contains(&opts.fill) {
        return Err(Error::InvalidValue(format!("fill {} outside [0, 1]", opts.fill)));
    }
    let boxes: Vec<PoseBox> = [src_kps, tgt_kps]
        .into_iter()
        .filter_map(|k| pose_box(k, opts.margin, opts.confidence_floor))
        .collect();
    if boxes.is_empty() {
        return Err(Error::EmptyPose);
    }
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if boxes.iter().any(|b| b.contains(x as f64, y as f64)) {
                out.pixel_mut(x, y).fill(opts.fill);
            }
        }
    }
    Ok(out)
}
