use super::{Extent, Mask};
use crate::error::{Error, Result};

/// Number of body-surface parts in the standard DensePose chart layout.
/// Part index 0 is background; 1..=24 are surface charts.
pub const PART_COUNT: usize = 24;

/// Per-pixel correspondence from image space to body-surface `(part, u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensePoseMap {
    width: usize,
    height: usize,
    parts: Vec<u8>,
    uv: Vec<[f32; 2]>,
}

impl DensePoseMap {
    /// Validates part indices and normalizes UVs: non-finite or out-of-range
    /// values are clamped into `[0, 1]` and background pixels get `u = v = 0`.
    pub fn new(width: usize, height: usize, parts: Vec<u8>, mut uv: Vec<[f32; 2]>) -> Result<Self> {
        let n = width * height;
        if parts.len() != n || uv.len() != n {
            return Err(Error::shape(format!(
                "densepose buffers ({} parts, {} uv) do not match {width}x{height}",
                parts.len(),
                uv.len()
            )));
        }
        if let Some(p) = parts.iter().find(|&&p| p as usize > PART_COUNT) {
            return Err(Error::InvalidValue(format!("part index {p} exceeds {PART_COUNT}")));
        }
        for (p, t) in parts.iter().zip(uv.iter_mut()) {
            if *p == 0 {
                *t = [0.0, 0.0];
            } else {
                for c in t.iter_mut() {
                    *c = if c.is_finite() { c.clamp(0.0, 1.0) } else { 0.0 };
                }
            }
        }
        Ok(Self {
            width,
            height,
            parts,
            uv,
        })
    }

    pub fn background(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            parts: vec![0; width * height],
            uv: vec![[0.0, 0.0]; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn part(&self, x: usize, y: usize) -> u8 {
        self.parts[y * self.width + x]
    }

    #[inline]
    pub fn uv(&self, x: usize, y: usize) -> [f32; 2] {
        self.uv[y * self.width + x]
    }

    pub fn parts(&self) -> &[u8] {
        &self.parts
    }

    pub fn uvs(&self) -> &[[f32; 2]] {
        &self.uv
    }

    pub fn foreground(&self) -> Mask {
        Mask::from_fn(self.width, self.height, |x, y| self.part(x, y) != 0)
    }

    /// Copy of this map with every pixel outside `keep` turned to background.
    pub fn masked(&self, keep: &Mask) -> Result<Self> {
        if keep.width() != self.width || keep.height() != self.height {
            return Err(Error::shape("mask extent differs from densepose map"));
        }
        let mut out = self.clone();
        for (i, &k) in keep.data().iter().enumerate() {
            if k == 0 {
                out.parts[i] = 0;
                out.uv[i] = [0.0, 0.0];
            }
        }
        Ok(out)
    }

    /// Nearest-neighbour resample, used when rasterizing to another extent.
    pub fn resize_nearest(&self, width: usize, height: usize) -> Self {
        let mut parts = Vec::with_capacity(width * height);
        let mut uv = Vec::with_capacity(width * height);
        for y in 0..height {
            let sy = (((y as f64 + 0.5) * self.height as f64 / height as f64) as usize)
                .min(self.height - 1);
            for x in 0..width {
                let sx = (((x as f64 + 0.5) * self.width as f64 / width as f64) as usize)
                    .min(self.width - 1);
                parts.push(self.part(sx, sy));
                uv.push(self.uv(sx, sy));
            }
        }
        Self {
            width,
            height,
            parts,
            uv,
        }
    }
}

impl Extent for DensePoseMap {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}
