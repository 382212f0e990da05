//! 8-bit PNG I/O. Quantization to bytes happens only here.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, ImageReader, Luma, Rgb, RgbImage, Rgba};

use super::{DensePoseMap, Image, KeypointSet, Mask, PART_COUNT};
use crate::error::{Error, Result};

#[inline]
pub fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[inline]
pub fn from_u8(v: u8) -> f32 {
    v as f32 / 255.0
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let reader = reader
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other}", path.display())),
    })
}

fn encode_err(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other}", path.display())),
    }
}

/// Loads a PNG as gray, RGB or RGBA depending on its color type.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    image_from_dynamic(decode(path)?)
}

pub fn image_from_dynamic(img: DynamicImage) -> Result<Image> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let color = img.color();
    let (channels, bytes) = if color.has_alpha() {
        (4, img.into_rgba8().into_raw())
    } else if color.has_color() {
        (3, img.into_rgb8().into_raw())
    } else {
        (1, img.into_luma8().into_raw())
    };
    Ok(Image::from_raw(
        w,
        h,
        channels,
        bytes.into_iter().map(from_u8).collect(),
    ))
}

pub fn image_to_dynamic(img: &Image) -> DynamicImage {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes: Vec<u8> = img.data().iter().map(|&v| to_u8(v)).collect();
    match img.channels() {
        1 => DynamicImage::ImageLuma8(ImageBuffer::<Luma<u8>, _>::from_raw(w, h, bytes).unwrap()),
        3 => DynamicImage::ImageRgb8(ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, bytes).unwrap()),
        _ => DynamicImage::ImageRgba8(ImageBuffer::<Rgba<u8>, _>::from_raw(w, h, bytes).unwrap()),
    }
}

pub fn save_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    image_to_dynamic(img)
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| encode_err(path, e))
}

/// Loads a mask; any gray level of 128 or more counts as set.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let gray = decode(path)?.into_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    Mask::new(w, h, gray.into_raw().into_iter().map(|v| (v >= 128) as u8).collect())
}

/// Saves a mask as 8-bit gray with values 0 and 255.
pub fn save_mask(path: impl AsRef<Path>, mask: &Mask) -> Result<()> {
    let path = path.as_ref();
    let bytes = mask.data().iter().map(|&v| v * 255).collect();
    GrayImage::from_raw(mask.width() as u32, mask.height() as u32, bytes)
        .expect("mask buffer size")
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| encode_err(path, e))
}

/// IUV encoding: R = part index, G = round(u*255), B = round(v*255).
pub fn encode_densepose(map: &DensePoseMap) -> RgbImage {
    let mut bytes = Vec::with_capacity(map.width() * map.height() * 3);
    for (&p, &[u, v]) in map.parts().iter().zip(map.uvs()) {
        bytes.extend_from_slice(&[p, to_u8(u), to_u8(v)]);
    }
    RgbImage::from_raw(map.width() as u32, map.height() as u32, bytes).expect("iuv buffer size")
}

pub fn decode_densepose(rgb: &RgbImage) -> Result<DensePoseMap> {
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut parts = Vec::with_capacity(w * h);
    let mut uv = Vec::with_capacity(w * h);
    for px in rgb.pixels() {
        let [p, u, v] = px.0;
        if p as usize > PART_COUNT {
            return Err(Error::Format(format!("IUV part index {p} exceeds {PART_COUNT}")));
        }
        parts.push(p);
        uv.push([from_u8(u), from_u8(v)]);
    }
    DensePoseMap::new(w, h, parts, uv)
}

pub fn load_densepose(path: impl AsRef<Path>) -> Result<DensePoseMap> {
    let path = path.as_ref();
    decode_densepose(&decode(path)?.into_rgb8())
}

pub fn save_densepose(path: impl AsRef<Path>, map: &DensePoseMap) -> Result<()> {
    let path = path.as_ref();
    encode_densepose(map)
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| encode_err(path, e))
}

pub fn load_keypoints(path: impl AsRef<Path>) -> Result<KeypointSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    KeypointSet::from_json(&text)
}

pub fn save_keypoints(path: impl AsRef<Path>, set: &KeypointSet) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, set.to_json()).map_err(|e| Error::io(path, e))
}
