use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate_line, CriterionReport, CurationConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurationStats {
    pub total: usize,
    pub accepted: usize,
    /// Well-formed records that failed at least one criterion.
    pub rejected: usize,
    pub malformed: usize,
    /// `accepted / total`, 0 for an empty manifest.
    pub acceptance_rate: f64,
    /// Number of rejected records listing each reason.
    pub fail_reasons: BTreeMap<String, usize>,
}

impl CurationStats {
    pub fn add(&mut self, report: &CriterionReport) {
        self.total += 1;
        if report.is_malformed() {
            self.malformed += 1;
        } else if report.accepted {
            self.accepted += 1;
        } else {
            self.rejected += 1;
            for r in &report.fail_reasons {
                *self.fail_reasons.entry(r.clone()).or_default() += 1;
            }
        }
        self.acceptance_rate = self.accepted as f64 / self.total as f64;
    }
}

/// Streams a JSONL manifest, writing every accepted line verbatim and in
/// input order to `accepted`. Blank lines are skipped; unparsable ones are
/// counted as malformed. `on_report` sees every evaluated record.
pub fn curate_manifest<R: BufRead, W: Write>(
    input: R,
    cfg: &CurationConfig,
    mut accepted: W,
    mut on_report: impl FnMut(&CriterionReport),
) -> Result<CurationStats> {
    let io_err = |e: std::io::Error| Error::Io {
        path: "<manifest>".into(),
        source: e,
    };
    let mut stats = CurationStats::default();
    for line in input.lines() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let report = evaluate_line(&line, cfg);
        if report.accepted {
            writeln!(accepted, "{line}").map_err(io_err)?;
        }
        stats.add(&report);
        on_report(&report);
    }
    accepted.flush().map_err(io_err)?;
    Ok(stats)
}
