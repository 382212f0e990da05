use crate::error::{Error, Result};

/// A row-major, channel-interleaved raster with values normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Image {
    /// Builds an image, validating the buffer length, channel count and value range.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if !matches!(channels, 1 | 3 | 4) {
            return Err(Error::shape(format!("unsupported channel count {channels}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::shape(format!(
                "buffer of {} values does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::InvalidValue(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Internal constructor for buffers produced by in-crate operations that
    /// only ever write convex combinations of valid pixel values.
    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self::from_raw(width, height, channels, vec![0.0; width * height * channels])
    }

    /// An image where every pixel equals `color` (one value per channel).
    pub fn filled(width: usize, height: usize, color: &[f32]) -> Result<Self> {
        let channels = color.len();
        let data = color
            .iter()
            .copied()
            .cycle()
            .take(width * height * channels)
            .collect();
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn same_extent<T: Extent>(&self, other: &T) -> bool {
        self.width == other.width() && self.height == other.height()
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub(crate) fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [f32] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    /// Returns a three-channel copy: gray is replicated, alpha is dropped.
    pub fn to_rgb(&self) -> Image {
        match self.channels {
            3 => self.clone(),
            1 => Image::from_raw(
                self.width,
                self.height,
                3,
                self.data.iter().flat_map(|&v| [v, v, v]).collect(),
            ),
            _ => Image::from_raw(
                self.width,
                self.height,
                3,
                self.data
                    .chunks_exact(self.channels)
                    .flat_map(|p| [p[0], p[1], p[2]])
                    .collect(),
            ),
        }
    }

    /// Copies the rectangle `[x, x + width) x [y, y + height)`.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<Image> {
        if x + width > self.width || y + height > self.height {
            return Err(Error::shape(format!(
                "crop {width}x{height}+{x}+{y} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height * self.channels);
        for row in y..y + height {
            let start = (row * self.width + x) * self.channels;
            data.extend_from_slice(&self.data[start..start + width * self.channels]);
        }
        Ok(Image::from_raw(width, height, self.channels, data))
    }
}

/// Anything with a pixel extent.
pub trait Extent {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
}

impl Extent for Image {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}

impl Extent for Mask {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}

/// Strictly binary per-pixel mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::shape(format!(
                "mask buffer of {} values does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidValue(format!("mask value {v} is not binary")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn ones(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![1; width * height],
        }
    }

    /// Builds a mask by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y) as u8);
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.data[y * self.width + x] = on as u8;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn and(&self, other: &Mask) -> Result<Mask> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::shape("mask extents differ"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a & b)
            .collect();
        Ok(Mask {
            width: self.width,
            height: self.height,
            data,
        })
    }

    /// Nearest-neighbour resize, used to bring masks to attention-map extent.
    pub fn resize_nearest(&self, width: usize, height: usize) -> Mask {
        Mask::from_fn(width, height, |x, y| {
            let sx = ((x as f64 + 0.5) * self.width as f64 / width as f64) as usize;
            let sy = ((y as f64 + 0.5) * self.height as f64 / height as f64) as usize;
            self.get(sx.min(self.width - 1), sy.min(self.height - 1))
        })
    }

    /// The mask as a single-channel image with values 0 and 1.
    pub fn to_image(&self) -> Image {
        Image::from_raw(
            self.width,
            self.height,
            1,
            self.data.iter().map(|&v| v as f32).collect(),
        )
    }
}
