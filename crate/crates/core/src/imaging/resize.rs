use serde::{Deserialize, Serialize};

use super::sample::sample_into;
use super::Image;
use crate::error::{Error, Result};

/// Where the scaled content sits inside a letterboxed square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub original_width: usize,
    pub original_height: usize,
}

impl Placement {
    /// Crops the content rectangle back out of a padded image.
    pub fn unpad(&self, padded: &Image) -> Result<Image> {
        padded.crop(self.x, self.y, self.width, self.height)
    }

    /// Crops the content and rescales it to the original dimensions.
    pub fn restore(&self, padded: &Image) -> Result<Image> {
        let content = self.unpad(padded)?;
        resize_bilinear(&content, self.original_width, self.original_height)
    }
}

/// Resamples with pixel-centre alignment and clamp-to-edge.
pub fn resize_bilinear(img: &Image, width: usize, height: usize) -> Result<Image> {
    if img.is_empty() || width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    if width == img.width() && height == img.height() {
        return Ok(img.clone());
    }
    let sx = img.width() as f64 / width as f64;
    let sy = img.height() as f64 / height as f64;
    let c = img.channels();
    let mut out = Image::zeros(width, height, c);
    for y in 0..height {
        let src_y = (y as f64 + 0.5) * sy - 0.5;
        for x in 0..width {
            let src_x = (x as f64 + 0.5) * sx - 0.5;
            sample_into(img, src_x, src_y, out.pixel_mut(x, y));
        }
    }
    Ok(out)
}

/// Scales the longer side to `target` (aspect preserved) and centres the
/// result on a `target x target` canvas filled with `fill`.
///
/// When the padding is odd the extra pixel goes to the right/bottom band.
pub fn resize_pad(img: &Image, target: usize, fill: &[f32]) -> Result<(Image, Placement)> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    if target == 0 {
        return Err(Error::InvalidValue("resize target must be positive".into()));
    }
    if fill.len() != img.channels() {
        return Err(Error::shape(format!(
            "fill has {} channels, image has {}",
            fill.len(),
            img.channels()
        )));
    }
    let (w, h) = (img.width(), img.height());
    let long = w.max(h) as f64;
    let cw = ((w as f64 * target as f64 / long).round() as usize).clamp(1, target);
    let ch = ((h as f64 * target as f64 / long).round() as usize).clamp(1, target);
    let content = resize_bilinear(img, cw, ch)?;

    let x0 = (target - cw) / 2;
    let y0 = (target - ch) / 2;
    let mut canvas = Image::filled(target, target, fill)?;
    let c = img.channels();
    for y in 0..ch {
        let src = &content.data()[y * cw * c..(y + 1) * cw * c];
        let start = ((y0 + y) * target + x0) * c;
        canvas.data_mut()[start..start + cw * c].copy_from_slice(src);
    }
    Ok((
        canvas,
        Placement {
            x: x0,
            y: y0,
            width: cw,
            height: ch,
            original_width: w,
            original_height: h,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize) -> Image {
        Image::filled(w, h, &[0.2, 0.4, 0.6]).unwrap()
    }

    #[test]
    fn tall_image_gets_side_bands() {
        let (out, p) = resize_pad(&gray(512, 1024), 256, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((out.width(), out.height()), (256, 256));
        assert_eq!((p.x, p.y, p.width, p.height), (64, 0, 128, 256));
        assert_eq!(out.pixel(63, 100), &[1.0, 1.0, 1.0]);
        assert_eq!(out.pixel(64, 100), &[0.2, 0.4, 0.6]);
        assert_eq!(out.pixel(191, 100), &[0.2, 0.4, 0.6]);
        assert_eq!(out.pixel(192, 100), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn square_needs_no_padding() {
        let (out, p) = resize_pad(&gray(300, 300), 256, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((p.x, p.y, p.width, p.height), (0, 0, 256, 256));
        assert!(out.data().iter().all(|&v| v != 1.0));
    }

    #[test]
    fn centred_padding_split() {
        let (_, p) = resize_pad(&gray(300, 400), 256, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((p.width, p.height), (192, 256));
        assert_eq!(p.x, 32);
        assert_eq!(256 - p.x - p.width, 32);
    }

    #[test]
    fn odd_padding_extra_goes_right() {
        // 5x4 -> 256x205, pad 51 -> 25 top / 26 bottom
        let (_, p) = resize_pad(&gray(5, 4), 256, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.height, 205);
        assert_eq!(p.y, 25);
        assert_eq!(256 - p.y - p.height, 26);
    }

    #[test]
    fn restore_recovers_dimensions() {
        let (out, p) = resize_pad(&gray(300, 400), 256, &[1.0, 1.0, 1.0]).unwrap();
        let back = p.restore(&out).unwrap();
        assert_eq!((back.width(), back.height()), (300, 400));
        assert!(back.data().iter().all(|&v| (v - 0.2).abs() < 1e-6
            || (v - 0.4).abs() < 1e-6
            || (v - 0.6).abs() < 1e-6));
    }

    #[test]
    fn empty_input() {
        let img = Image::zeros(0, 5, 3);
        assert!(matches!(
            resize_pad(&img, 256, &[1.0, 1.0, 1.0]),
            Err(Error::EmptyImage)
        ));
    }
}
