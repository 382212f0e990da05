//! Single-person image quality filter over precomputed annotations.
//!
//! A record is accepted when all seven criteria pass: minimum resolution,
//! exactly one person, a visible head, a detectable pose, little occlusion,
//! adequate clothing coverage and image-text similarity. Absent annotations
//! fail the criteria that need them.

mod evaluate;
mod manifest;
mod record;

pub use evaluate::{
    evaluate_line, evaluate_record, Criterion, CriterionReport, CurationConfig, RecordError, Verdict,
};
pub use manifest::{curate_manifest, CurationStats};
pub use record::{AnnotationRecord, DetBox};
