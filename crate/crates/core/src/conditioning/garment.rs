use crate::error::{Error, Result};
use crate::imaging::{Image, Mask};

pub const DEFAULT_REMOVAL_FILL: f32 = 0.5;

/// Replaces every masked pixel with `fill` (one value per channel, or a
/// single value applied to all channels).
pub fn remove_garment(img: &Image, garment_mask: &Mask, fill: &[f32]) -> Result<Image> {
    if !img.same_extent(garment_mask) {
        return Err(Error::shape(format!(
            "image {}x{} vs mask {}x{}",
            img.width(),
            img.height(),
            garment_mask.width(),
            garment_mask.height()
        )));
    }
    let fill: Vec<f32> = match fill.len() {
        1 => vec![fill[0]; img.channels()],
        n if n == img.channels() => fill.to_vec(),
        n => {
            return Err(Error::shape(format!(
                "fill has {n} values, image has {} channels",
                img.channels()
            )))
        }
    };
    if let Some(v) = fill.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidValue(format!("fill {v} outside [0, 1]")));
    }
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if garment_mask.get(x, y) {
                out.pixel_mut(x, y).copy_from_slice(&fill);
            }
        }
    }
    Ok(out)
}
