use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{io, Image};
use crate::tensor::RawTensor;

pub const STACK_CHANNELS: usize = 9;

/// Channel slots of the conditioning stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Texture = 0,
    Pose = 1,
    Background = 2,
}

/// `[texture; pose raster; partial background]`, 9 planar channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionStack {
    width: usize,
    height: usize,
    /// Planar `C x H x W`.
    data: Vec<f32>,
}

impl ConditionStack {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn plane(&self, channel: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.data[channel * n..(channel + 1) * n]
    }

    /// Re-interleaves one three-channel slot into an RGB image.
    pub fn slice(&self, slot: Slot) -> Image {
        let n = self.width * self.height;
        let base = slot as usize * 3;
        let mut data = Vec::with_capacity(3 * n);
        for i in 0..n {
            for c in 0..3 {
                data.push(self.data[(base + c) * n + i]);
            }
        }
        Image::from_raw(self.width, self.height, 3, data)
    }

    pub fn to_tensor(&self) -> RawTensor {
        RawTensor {
            height: self.height,
            width: self.width,
            channels: STACK_CHANNELS,
            data: self.data.clone(),
        }
    }

    pub fn from_tensor(t: RawTensor) -> Result<Self> {
        if t.channels != STACK_CHANNELS {
            return Err(Error::shape(format!(
                "condition stack needs {STACK_CHANNELS} channels, tensor has {}",
                t.channels
            )));
        }
        if let Some(v) = t.data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidValue(format!("stack value {v} outside [0, 1]")));
        }
        Ok(Self {
            width: t.width,
            height: t.height,
            data: t.data,
        })
    }

    /// Writes `plane_0.png` .. `plane_8.png` (8-bit gray) into `dir`.
    pub fn save_planes(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for c in 0..STACK_CHANNELS {
            let plane = Image::from_raw(self.width, self.height, 1, self.plane(c).to_vec());
            io::save_image(dir.join(format!("plane_{c}.png")), &plane)?;
        }
        Ok(())
    }
}

/// Concatenates the three conditioning images in fixed channel order.
///
/// `tex = None` packs an all-zero texture (the full text-edit mode). Inputs
/// must be three-channel and share one extent.
pub fn pack_condition(tex: Option<&Image>, pose: &Image, bg: &Image) -> Result<ConditionStack> {
    let (w, h) = (pose.width(), pose.height());
    for (name, img) in [("pose", Some(pose)), ("background", Some(bg)), ("texture", tex)] {
        let Some(img) = img else { continue };
        if img.channels() != 3 {
            return Err(Error::shape(format!("{name} has {} channels, expected 3", img.channels())));
        }
        if (img.width(), img.height()) != (w, h) {
            return Err(Error::shape(format!(
                "{name} is {}x{}, pose is {w}x{h}",
                img.width(),
                img.height()
            )));
        }
    }
    let n = w * h;
    let mut data = vec![0.0f32; STACK_CHANNELS * n];
    for (slot, img) in [(0, tex), (1, Some(pose)), (2, Some(bg))] {
        let Some(img) = img else { continue };
        for (i, px) in img.data().chunks_exact(3).enumerate() {
            for c in 0..3 {
                data[(slot * 3 + c) * n + i] = px[c];
            }
        }
    }
    Ok(ConditionStack {
        width: w,
        height: h,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, seed: u32) -> Image {
        let data = (0..w * h * 3)
            .map(|i| (((i as u32).wrapping_mul(2654435761) ^ seed) % 1000) as f32 / 999.0)
            .collect();
        Image::new(w, h, 3, data).unwrap()
    }

    #[test]
    fn channel_order_and_slicing() {
        let (t, p, b) = (img(4, 3, 1), img(4, 3, 2), img(4, 3, 3));
        let s = pack_condition(Some(&t), &p, &b).unwrap();
        assert_eq!(s.to_tensor().channels, 9);
        assert_eq!(s.slice(Slot::Texture), t);
        assert_eq!(s.slice(Slot::Pose), p);
        assert_eq!(s.slice(Slot::Background), b);
        // plane 4 is the pose's green channel
        assert_eq!(s.plane(4)[5], p.pixel(1, 1)[1]);
    }

    #[test]
    fn zero_texture_mode() {
        let (p, b) = (img(2, 2, 5), img(2, 2, 6));
        let s = pack_condition(None, &p, &b).unwrap();
        assert!((0..3).all(|c| s.plane(c).iter().all(|&v| v == 0.0)));
        assert_eq!(s.slice(Slot::Pose), p);
    }

    #[test]
    fn extent_mismatch() {
        assert!(matches!(
            pack_condition(None, &img(2, 2, 0), &img(3, 2, 0)),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            pack_condition(Some(&img(2, 3, 0)), &img(2, 2, 0), &img(2, 2, 0)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn tensor_roundtrip_is_bit_exact() {
        let s = pack_condition(Some(&img(5, 4, 7)), &img(5, 4, 8), &img(5, 4, 9)).unwrap();
        let back = ConditionStack::from_tensor(RawTensor::from_bytes(&s.to_tensor().to_bytes()).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
