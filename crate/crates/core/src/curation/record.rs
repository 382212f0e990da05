use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::imaging::KeypointSet;

/// A detection `[x, y, w, h, score]` in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
}

impl DetBox {
    /// Clamps the box to `[0, width] x [0, height]`.
    pub fn clamped(&self, width: f64, height: f64) -> DetBox {
        let x0 = self.x.clamp(0.0, width);
        let y0 = self.y.clamp(0.0, height);
        let x1 = (self.x + self.w).clamp(0.0, width);
        let y1 = (self.y + self.h).clamp(0.0, height);
        DetBox {
            x: x0,
            y: y0,
            w: x1 - x0,
            h: y1 - y0,
            score: self.score,
        }
    }

    pub fn intersection_area(&self, other: &DetBox) -> f64 {
        let w = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let h = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        w.max(0.0) * h.max(0.0)
    }
}

impl Serialize for DetBox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.w, self.h, self.score].serialize(s)
    }
}

impl<'de> Deserialize<'de> for DetBox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, w, h, score] = <[f64; 5]>::deserialize(d)?;
        Ok(DetBox { x, y, w, h, score })
    }
}

/// One curation candidate. Every annotation is optional on the wire; a
/// missing one makes the criteria that need it fail as `missing:<field>`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: String,
    #[serde(default)]
    pub width: Option<u32>,
    #[serde(default)]
    pub height: Option<u32>,
    #[serde(default)]
    pub person_boxes: Option<Vec<DetBox>>,
    #[serde(default)]
    pub face_boxes: Option<Vec<DetBox>>,
    #[serde(default)]
    pub keypoints: Option<KeypointSet>,
    #[serde(default)]
    pub person_mask_area: Option<f64>,
    #[serde(default)]
    pub other_instance_overlap_area: Option<f64>,
    #[serde(default)]
    pub clothing_pixel_area: Option<f64>,
    #[serde(default)]
    pub caption: Option<String>,
    #[serde(default)]
    pub clip_similarity: Option<f64>,
}

impl AnnotationRecord {
    /// Parses one manifest line and checks the value invariants.
    pub fn from_json(line: &str) -> Result<Self> {
        let rec: AnnotationRecord =
            serde_json::from_str(line).map_err(|e| Error::Format(format!("record: {e}")))?;
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        let areas = [
            ("person_mask_area", self.person_mask_area),
            ("other_instance_overlap_area", self.other_instance_overlap_area),
            ("clothing_pixel_area", self.clothing_pixel_area),
        ];
        for (name, v) in areas {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidValue(format!("{name} must be a non-negative number, got {v}")));
                }
            }
        }
        if let Some(s) = self.clip_similarity {
            if !(-1.0..=1.0).contains(&s) {
                return Err(Error::InvalidValue(format!("clip_similarity {s} outside [-1, 1]")));
            }
        }
        for (name, boxes) in [("person_boxes", &self.person_boxes), ("face_boxes", &self.face_boxes)] {
            for b in boxes.iter().flatten() {
                let finite = [b.x, b.y, b.w, b.h, b.score].iter().all(|v| v.is_finite());
                if !finite || b.w < 0.0 || b.h < 0.0 || !(0.0..=1.0).contains(&b.score) {
                    return Err(Error::InvalidValue(format!("bad entry in {name}: {b:?}")));
                }
            }
        }
        Ok(())
    }
}
