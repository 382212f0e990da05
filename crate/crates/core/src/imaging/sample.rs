use super::Image;
use crate::error::{Error, Result};

/// Bilinear interpolation at continuous pixel coordinates.
///
/// Pixel `(i, j)` sits at integer coordinates, so sampling at an integer
/// position returns that pixel exactly. Coordinates outside
/// `[0, width-1] x [0, height-1]` are clamped to the edge.
pub fn bilinear_sample(img: &Image, x: f64, y: f64) -> Result<Vec<f32>> {
    if x.is_nan() || y.is_nan() {
        return Err(Error::InvalidCoordinate { x, y });
    }
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    let mut out = vec![0.0; img.channels()];
    sample_into(img, x, y, &mut out);
    Ok(out)
}

/// Corner indices and weights of a clamped bilinear stencil.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub fx: f64,
    pub fy: f64,
}

impl Stencil {
    #[inline]
    pub fn new(width: usize, height: usize, x: f64, y: f64) -> Self {
        let (x0, x1, fx) = axis(width, x);
        let (y0, y1, fy) = axis(height, y);
        Stencil {
            x0,
            y0,
            x1,
            y1,
            fx,
            fy,
        }
    }

    /// `(x, y, weight)` for the four corners, in row-major order.
    #[inline]
    pub fn corners(&self) -> [(usize, usize, f64); 4] {
        [
            (self.x0, self.y0, (1.0 - self.fx) * (1.0 - self.fy)),
            (self.x1, self.y0, self.fx * (1.0 - self.fy)),
            (self.x0, self.y1, (1.0 - self.fx) * self.fy),
            (self.x1, self.y1, self.fx * self.fy),
        ]
    }
}

#[inline]
fn axis(len: usize, t: f64) -> (usize, usize, f64) {
    let max = (len - 1) as f64;
    let t = t.clamp(0.0, max);
    let i0 = t.floor();
    let f = t - i0;
    let i0 = i0 as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, f)
}

/// Writes the bilinear sample into `out` (length = channel count).
/// Caller guarantees a non-empty image and non-NaN coordinates.
#[inline]
pub(crate) fn sample_into(img: &Image, x: f64, y: f64, out: &mut [f32]) {
    let s = Stencil::new(img.width(), img.height(), x, y);
    let mut acc = [0.0f64; 4];
    for (cx, cy, w) in s.corners() {
        if w == 0.0 {
            continue;
        }
        for (a, &v) in acc.iter_mut().zip(img.pixel(cx, cy)) {
            *a += w * v as f64;
        }
    }
    for (o, a) in out.iter_mut().zip(acc) {
        *o = a as f32;
    }
}
