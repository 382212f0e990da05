use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{Extent, Mask};

/// Human-parsing labels used for part features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum PartLabel {
    Background = 0,
    Face = 1,
    Hair = 2,
    Headwear = 3,
    UpperClothing = 4,
    Coat = 5,
    LowerClothing = 6,
    Shoes = 7,
    Accessories = 8,
    Person = 9,
}

impl PartLabel {
    /// The nine foreground labels, in id order.
    pub const PARTS: [PartLabel; 9] = [
        PartLabel::Face,
        PartLabel::Hair,
        PartLabel::Headwear,
        PartLabel::UpperClothing,
        PartLabel::Coat,
        PartLabel::LowerClothing,
        PartLabel::Shoes,
        PartLabel::Accessories,
        PartLabel::Person,
    ];

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(PartLabel::Background),
            1..=9 => Some(Self::PARTS[id as usize - 1]),
            _ => None,
        }
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            PartLabel::Background => "background",
            PartLabel::Face => "face",
            PartLabel::Hair => "hair",
            PartLabel::Headwear => "headwear",
            PartLabel::UpperClothing => "upper_clothing",
            PartLabel::Coat => "coat",
            PartLabel::LowerClothing => "lower_clothing",
            PartLabel::Shoes => "shoes",
            PartLabel::Accessories => "accessories",
            PartLabel::Person => "person",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        std::iter::once(PartLabel::Background)
            .chain(Self::PARTS)
            .find(|l| l.name() == name)
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

/// Per-pixel part labels (0..=9).
///
/// Label 9 marks person pixels not covered by a more specific part; the person
/// region is every non-background pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartSegmentation {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl PartSegmentation {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::shape(format!(
                "segmentation buffer of {} labels does not match {width}x{height}",
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::InvalidValue(format!("part label {l} outside 0..=9")));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn background(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            labels: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    pub fn person_mask(&self) -> Mask {
        Mask::from_fn(self.width, self.height, |x, y| self.label(x, y) != 0)
    }

    pub fn part_mask(&self, label: PartLabel) -> Mask {
        Mask::from_fn(self.width, self.height, |x, y| self.label(x, y) == label.id())
    }

    /// Foreground labels that occur at least once, in id order.
    pub fn present_labels(&self) -> Vec<PartLabel> {
        let mut seen = [false; 10];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        PartLabel::PARTS
            .into_iter()
            .filter(|l| seen[l.id() as usize])
            .collect()
    }

    pub fn bbox(&self, label: PartLabel) -> Option<PixelBox> {
        let mut b: Option<PixelBox> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.label(x, y) != label.id() {
                    continue;
                }
                b = Some(match b {
                    None => PixelBox { x0: x, y0: y, x1: x, y1: y },
                    Some(b) => PixelBox {
                        x0: b.x0.min(x),
                        y0: b.y0.min(y),
                        x1: b.x1.max(x),
                        y1: b.y1.max(y),
                    },
                });
            }
        }
        b
    }

    /// Reads an 8-bit indexed or gray PNG whose raw sample values are label ids.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut decoder = png::Decoder::new(BufReader::new(file));
        decoder.set_transformations(png::Transformations::IDENTITY);
        let fmt = |e: png::DecodingError| match e {
            png::DecodingError::IoError(io) => Error::io(path, io),
            other => Error::Format(format!("{}: {other}", path.display())),
        };
        let mut reader = decoder.read_info().map_err(fmt)?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| Error::Format("segmentation PNG too large".into()))?;
        let mut buf = vec![0; size];
        let info = reader.next_frame(&mut buf).map_err(fmt)?;
        if !matches!(info.color_type, png::ColorType::Indexed | png::ColorType::Grayscale) {
            return Err(Error::Format(format!(
                "{}: segmentation must be indexed or grayscale, found {:?}",
                path.display(),
                info.color_type
            )));
        }
        let (w, h) = (info.width as usize, info.height as usize);
        let bits = info.bit_depth as usize;
        if bits > 8 {
            return Err(Error::Format("16-bit segmentation PNGs are not supported".into()));
        }
        let mut labels = Vec::with_capacity(w * h);
        for row in buf.chunks(info.line_size).take(h) {
            for x in 0..w {
                let bit = x * bits;
                let byte = row[bit / 8];
                let shift = 8 - bits - bit % 8;
                labels.push((byte >> shift) & ((1u16 << bits) - 1) as u8);
            }
        }
        Self::new(w, h, labels)
    }

    /// Writes an 8-bit indexed PNG with a fixed 10-entry palette.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut enc = png::Encoder::new(BufWriter::new(file), self.width as u32, self.height as u32);
        enc.set_color(png::ColorType::Indexed);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_palette(PALETTE.concat());
        let fmt = |e: png::EncodingError| match e {
            png::EncodingError::IoError(io) => Error::io(path, io),
            other => Error::Format(format!("{}: {other}", path.display())),
        };
        let mut writer = enc.write_header().map_err(fmt)?;
        writer.write_image_data(&self.labels).map_err(fmt)?;
        writer.finish().map_err(fmt)
    }
}

impl Extent for PartSegmentation {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}

/// Display colors for label ids 0..=9.
pub const PALETTE: [[u8; 3]; 10] = [
    [0, 0, 0],
    [255, 204, 153],
    [102, 51, 0],
    [255, 0, 255],
    [255, 0, 0],
    [0, 128, 255],
    [0, 0, 255],
    [255, 255, 0],
    [0, 255, 255],
    [128, 128, 128],
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_names_roundtrip() {
        for l in PartLabel::PARTS {
            assert_eq!(PartLabel::from_name(l.name()), Some(l));
            assert_eq!(PartLabel::from_id(l.id()), Some(l));
        }
        assert_eq!(PartLabel::from_id(10), None);
    }

    #[test]
    fn png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let seg = PartSegmentation::new(3, 2, vec![0, 1, 9, 4, 4, 7]).unwrap();
        let p = dir.path().join("seg.png");
        seg.save_png(&p).unwrap();
        assert_eq!(PartSegmentation::load_png(&p).unwrap(), seg);
    }

    #[test]
    fn bbox_and_presence() {
        let seg = PartSegmentation::new(3, 3, vec![0, 4, 0, 0, 4, 4, 2, 0, 0]).unwrap();
        assert_eq!(
            seg.bbox(PartLabel::UpperClothing),
            Some(PixelBox { x0: 1, y0: 0, x1: 2, y1: 1 })
        );
        assert_eq!(seg.present_labels(), vec![PartLabel::Hair, PartLabel::UpperClothing]);
        assert_eq!(seg.person_mask().count(), 4);
        assert!(seg.bbox(PartLabel::Coat).is_none());
    }

    #[test]
    fn rejects_out_of_range_label() {
        assert!(PartSegmentation::new(1, 1, vec![10]).is_err());
    }
}
