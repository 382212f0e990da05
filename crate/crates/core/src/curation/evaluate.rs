use serde::{Deserialize, Serialize};

use super::record::{AnnotationRecord, DetBox};

/// Thresholds of the seven quality criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurationConfig {
    /// Shorter image side must reach this many pixels.
    pub min_side: u32,
    /// The highest-scoring person box must reach this score.
    pub person_score_floor: f64,
    /// Every other person box must stay strictly below this score.
    pub distractor_score_floor: f64,
    pub face_score_floor: f64,
    pub min_joints: usize,
    pub joint_confidence: f64,
    /// Upper bound on occluder overlap / person area.
    pub max_occlusion: f64,
    /// Lower bound on clothing area / person area.
    pub min_clothing_coverage: f64,
    /// CLIP similarity must exceed this value.
    pub min_clip_similarity: f64,
}

impl Default for CurationConfig {
    fn default() -> Self {
        Self {
            min_side: 512,
            person_score_floor: 0.5,
            distractor_score_floor: 0.5,
            face_score_floor: 0.5,
            min_joints: 8,
            joint_confidence: 0.3,
            max_occlusion: 0.05,
            min_clothing_coverage: 0.1,
            min_clip_similarity: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Resolution,
    PersonCount,
    HeadVisible,
    Pose,
    Occlusion,
    ClothingCoverage,
    ClipSimilarity,
}

impl Criterion {
    pub const ALL: [Criterion; 7] = [
        Criterion::Resolution,
        Criterion::PersonCount,
        Criterion::HeadVisible,
        Criterion::Pose,
        Criterion::Occlusion,
        Criterion::ClothingCoverage,
        Criterion::ClipSimilarity,
    ];

    /// Fail reason used in reports and histograms.
    pub fn reason(self) -> &'static str {
        match self {
            Criterion::Resolution => "resolution",
            Criterion::PersonCount => "person_count",
            Criterion::HeadVisible => "head_visible",
            Criterion::Pose => "pose",
            Criterion::Occlusion => "occlusion",
            Criterion::ClothingCoverage => "clothing_coverage",
            Criterion::ClipSimilarity => "clip_similarity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "field")]
pub enum Verdict {
    Pass,
    Fail,
    /// A required annotation is absent.
    Indeterminate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordError {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: Option<String>,
    /// One verdict per criterion, in criterion order. Empty for malformed records.
    pub verdicts: Vec<(Criterion, Verdict)>,
    pub accepted: bool,
    /// `"<criterion>"` for a failed check, `"missing:<field>"` for an absent
    /// annotation; each reason at most once.
    pub fail_reasons: Vec<String>,
    pub error: Option<RecordError>,
}

impl CriterionReport {
    pub fn malformed(id: Option<String>, err: &crate::Error) -> Self {
        Self {
            id,
            verdicts: Vec::new(),
            accepted: false,
            fail_reasons: Vec::new(),
            error: Some(RecordError {
                code: err.code().to_string(),
                message: err.to_string(),
            }),
        }
    }

    pub fn is_malformed(&self) -> bool {
        self.error.is_some()
    }
}

fn need<T: Copy>(v: Option<T>, field: &str) -> Result<T, Verdict> {
    v.ok_or_else(|| Verdict::Indeterminate(field.to_string()))
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Highest-scoring person box (first wins ties), clamped to the image if its
/// size is known.
fn top_person(rec: &AnnotationRecord, boxes: &[DetBox]) -> Option<DetBox> {
    let top = boxes
        .iter()
        .copied()
        .reduce(|best, b| if b.score > best.score { b } else { best })?;
    Some(match (rec.width, rec.height) {
        (Some(w), Some(h)) => top.clamped(w as f64, h as f64),
        _ => top,
    })
}

fn check(rec: &AnnotationRecord, cfg: &CurationConfig, c: Criterion) -> Result<Verdict, Verdict> {
    Ok(match c {
        Criterion::Resolution => {
            let w = need(rec.width, "width")?;
            let h = need(rec.height, "height")?;
            pass_if(w.min(h) >= cfg.min_side)
        }
        Criterion::PersonCount => {
            let boxes = need(rec.person_boxes.as_deref(), "person_boxes")?;
            let Some(top) = boxes.iter().map(|b| b.score).reduce(f64::max) else {
                return Ok(Verdict::Fail);
            };
            let top_idx = boxes.iter().position(|b| b.score == top).expect("max exists");
            let others_low = boxes
                .iter()
                .enumerate()
                .all(|(i, b)| i == top_idx || b.score < cfg.distractor_score_floor);
            pass_if(top >= cfg.person_score_floor && others_low)
        }
        Criterion::HeadVisible => {
            let persons = need(rec.person_boxes.as_deref(), "person_boxes")?;
            let faces = need(rec.face_boxes.as_deref(), "face_boxes")?;
            let Some(person) = top_person(rec, persons) else {
                return Ok(Verdict::Fail);
            };
            pass_if(
                faces
                    .iter()
                    .any(|f| f.score >= cfg.face_score_floor && f.intersection_area(&person) > 0.0),
            )
        }
        Criterion::Pose => {
            let kps = need(rec.keypoints.as_ref(), "keypoints")?;
            pass_if(kps.confident(cfg.joint_confidence).count() >= cfg.min_joints)
        }
        Criterion::Occlusion => {
            let overlap = need(rec.other_instance_overlap_area, "other_instance_overlap_area")?;
            let area = need(rec.person_mask_area, "person_mask_area")?;
            pass_if(area > 0.0 && overlap / area <= cfg.max_occlusion)
        }
        Criterion::ClothingCoverage => {
            let clothing = need(rec.clothing_pixel_area, "clothing_pixel_area")?;
            let area = need(rec.person_mask_area, "person_mask_area")?;
            pass_if(area > 0.0 && clothing / area >= cfg.min_clothing_coverage)
        }
        Criterion::ClipSimilarity => {
            let s = need(rec.clip_similarity, "clip_similarity")?;
            pass_if(s > cfg.min_clip_similarity)
        }
    })
}

/// Applies all seven criteria. A record is accepted only if every one passes.
pub fn evaluate_record(rec: &AnnotationRecord, cfg: &CurationConfig) -> CriterionReport {
    let mut verdicts = Vec::with_capacity(7);
    let mut fail_reasons: Vec<String> = Vec::new();
    for c in Criterion::ALL {
        let v = check(rec, cfg, c).unwrap_or_else(|v| v);
        let reason = match &v {
            Verdict::Pass => None,
            Verdict::Fail => Some(c.reason().to_string()),
            Verdict::Indeterminate(field) => Some(format!("missing:{field}")),
        };
        if let Some(r) = reason {
            if !fail_reasons.contains(&r) {
                fail_reasons.push(r);
            }
        }
        verdicts.push((c, v));
    }
    CriterionReport {
        id: Some(rec.id.clone()),
        accepted: fail_reasons.is_empty(),
        verdicts,
        fail_reasons,
        error: None,
    }
}

/// Parses and evaluates one manifest line; parse failures become a
/// malformed report instead of an error.
pub fn evaluate_line(line: &str, cfg: &CurationConfig) -> CriterionReport {
    match AnnotationRecord::from_json(line) {
        Ok(rec) => evaluate_record(&rec, cfg),
        Err(e) => {
            let id = serde_json::from_str::<serde_json::Value>(line)
                .ok()
                .and_then(|v| v.get("id").and_then(|i| i.as_str()).map(str::to_string));
            CriterionReport::malformed(id, &e)
        }
    }
}
