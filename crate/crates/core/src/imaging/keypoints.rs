use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default confidence below which a keypoint is treated as undetected.
pub const CONFIDENCE_FLOOR: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

/// Named 2-D landmarks. Names are unique; coordinates may lie off-image.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KeypointSet {
    keypoints: Vec<Keypoint>,
}

impl KeypointSet {
    pub fn new(keypoints: Vec<Keypoint>) -> Result<Self> {
        let mut seen = HashSet::new();
        for k in &keypoints {
            if !seen.insert(k.name.as_str()) {
                return Err(Error::InvalidValue(format!("duplicate keypoint name {:?}", k.name)));
            }
            if !(k.x.is_finite() && k.y.is_finite()) {
                return Err(Error::InvalidValue(format!("keypoint {:?} has non-finite coordinates", k.name)));
            }
            if !(0.0..=1.0).contains(&k.score) {
                return Err(Error::InvalidValue(format!(
                    "keypoint {:?} score {} outside [0, 1]",
                    k.name, k.score
                )));
            }
        }
        Ok(Self { keypoints })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Keypoint> {
        self.keypoints.iter()
    }

    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Keypoint> {
        self.keypoints.iter().find(|k| k.name == name)
    }

    /// Keypoints whose score reaches `floor`.
    pub fn confident(&self, floor: f64) -> impl Iterator<Item = &Keypoint> {
        self.keypoints.iter().filter(move |k| k.score >= floor)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSet =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("keypoint JSON: {e}")))?;
        Self::new(raw.keypoints)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("keypoints serialize")
    }
}

impl<'de> Deserialize<'de> for KeypointSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSet::deserialize(d)?;
        KeypointSet::new(raw.keypoints).map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
struct RawSet {
    keypoints: Vec<Keypoint>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_wire_format() {
        let set = KeypointSet::from_json(
            r#"{"keypoints":[{"name":"left_shoulder","x":10.5,"y":-3,"score":0.9},
                             {"name":"neck","x":1,"y":2,"score":0.1}]}"#,
        )
        .unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.get("left_shoulder").unwrap().y, -3.0);
        assert_eq!(set.confident(CONFIDENCE_FLOOR).count(), 1);
        let back = KeypointSet::from_json(&set.to_json()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn duplicate_names_rejected() {
        let k = |n: &str| Keypoint {
            name: n.into(),
            x: 0.0,
            y: 0.0,
            score: 1.0,
        };
        assert!(KeypointSet::new(vec![k("a"), k("a")]).is_err());
    }
}
