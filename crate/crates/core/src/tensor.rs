//! Raw float tensor file: 16-byte header (`b"CSTK"`, u32 height, u32 width,
//! u32 channels) followed by `channels * height * width` little-endian f32
//! values in planar order (channel-major, then rows, then columns).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::Image;

pub const MAGIC: [u8; 4] = *b"CSTK";
pub const HEADER_LEN: usize = 16;

/// A planar `C x H x W` float tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTensor {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl RawTensor {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::shape(format!(
                "tensor buffer of {} values does not match {channels}x{height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    /// Planar copy of an interleaved image.
    pub fn from_image(img: &Image) -> Self {
        let (n, c) = (img.width() * img.height(), img.channels());
        let mut data = vec![0.0; n * c];
        for (i, px) in img.data().chunks_exact(c).enumerate() {
            for (k, &v) in px.iter().enumerate() {
                data[k * n + i] = v;
            }
        }
        Self {
            height: img.height(),
            width: img.width(),
            channels: c,
            data,
        }
    }

    /// Interleaved image of a 1-, 3- or 4-channel tensor with values in [0, 1].
    pub fn to_image(&self) -> Result<Image> {
        let (n, c) = (self.width * self.height, self.channels);
        let mut data = vec![0.0; n * c];
        for k in 0..c {
            for (i, &v) in self.plane(k).iter().enumerate() {
                data[i * c + k] = v;
            }
        }
        Image::new(self.width, self.height, c, data)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(&MAGIC);
        for d in [self.height, self.width, self.channels] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
            return Err(Error::Format("missing CSTK header".into()));
        }
        let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
        let (h, w, c) = (dim(0), dim(1), dim(2));
        let n = h
            .checked_mul(w)
            .and_then(|x| x.checked_mul(c))
            .ok_or_else(|| Error::Format("tensor dimensions overflow".into()))?;
        let body = &bytes[HEADER_LEN..];
        if body.len() != 4 * n {
            return Err(Error::Format(format!(
                "tensor body has {} bytes, header declares {}",
                body.len(),
                4 * n
            )));
        }
        let data: Vec<f32> = body
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("tensor contains non-finite values".into()));
        }
        Ok(Self {
            height: h,
            width: w,
            channels: c,
            data,
        })
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)
            .map_err(|e| Error::io("<stream>", e))?;
        Self::from_bytes(&buf)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn image_layout_is_planar() {
        let img = Image::new(2, 1, 3, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let t = RawTensor::from_image(&img);
        assert_eq!(t.data, vec![0.1, 0.4, 0.2, 0.5, 0.3, 0.6]);
        assert_eq!(t.to_image().unwrap(), img);
    }

    #[test]
    fn header_layout() {
        let t = RawTensor::new(2, 3, 1, vec![0.5; 6]).unwrap();
        let b = t.to_bytes();
        assert_eq!(&b[..4], b"CSTK");
        assert_eq!(&b[4..8], &2u32.to_le_bytes());
        assert_eq!(&b[8..12], &3u32.to_le_bytes());
        assert_eq!(&b[12..16], &1u32.to_le_bytes());
        assert_eq!(b.len(), 16 + 24);
    }

    #[test]
    fn truncated_body_rejected() {
        let mut b = RawTensor::new(1, 2, 1, vec![1.0, 2.0]).unwrap().to_bytes();
        b.pop();
        assert!(matches!(RawTensor::from_bytes(&b), Err(Error::Format(_))));
        assert!(RawTensor::from_bytes(b"NOPE").is_err());
    }

    proptest! {
        #[test]
        fn bytes_roundtrip(h in 0usize..5, w in 0usize..5, c in 1usize..4, seed in any::<u32>()) {
            let data = (0..h * w * c).map(|i| ((i as u32).wrapping_mul(seed) % 1000) as f32 * 1e-3 - 0.5).collect();
            let t = RawTensor::new(h, w, c, data).unwrap();
            prop_assert_eq!(RawTensor::from_bytes(&t.to_bytes()).unwrap(), t);
        }
    }
}
