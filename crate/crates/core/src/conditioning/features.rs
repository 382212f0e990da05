use std::collections::BTreeMap;

use super::segmentation::{PartLabel, PartSegmentation};
use crate::attention::Matrix;
use crate::error::{Error, Result};

/// A `rows x cols` grid of `dim`-dimensional visual tokens, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    rows: usize,
    cols: usize,
    dim: usize,
    data: Vec<f32>,
}

impl FeatureGrid {
    pub fn new(rows: usize, cols: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols * dim {
            return Err(Error::shape(format!(
                "feature buffer of {} values does not match {rows}x{cols}x{dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("non-finite feature value".into()));
        }
        Ok(Self {
            rows,
            cols,
            dim,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn token(&self, row: usize, col: usize) -> &[f32] {
        let i = (row * self.cols + col) * self.dim;
        &self.data[i..i + self.dim]
    }
}

/// One text-embedding vector per foreground part label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEmbeddings {
    dim: usize,
    table: BTreeMap<PartLabel, Vec<f32>>,
}

impl LabelEmbeddings {
    /// Requires all nine part labels with vectors of equal length.
    pub fn new(table: BTreeMap<PartLabel, Vec<f32>>) -> Result<Self> {
        let mut dim = None;
        for label in PartLabel::PARTS {
            let v = table
                .get(&label)
                .ok_or_else(|| Error::shape(format!("no embedding for part {:?}", label.name())))?;
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::shape(format!(
                        "embedding for {:?} has dimension {}, expected {d}",
                        label.name(),
                        v.len()
                    )))
                }
                _ => {}
            }
        }
        if table.contains_key(&PartLabel::Background) {
            return Err(Error::InvalidValue("background has no label embedding".into()));
        }
        Ok(Self {
            dim: dim.unwrap_or(0),
            table,
        })
    }

    /// Parses `{"face": [..], "hair": [..], ...}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<f32>> =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("label embeddings: {e}")))?;
        let mut table = BTreeMap::new();
        for (name, v) in raw {
            let label = PartLabel::from_name(&name)
                .ok_or_else(|| Error::Format(format!("unknown part label {name:?}")))?;
            table.insert(label, v);
        }
        Self::new(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, label: PartLabel) -> &[f32] {
        &self.table[&label]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartFeatures {
    pub label: PartLabel,
    /// Each token is the cell's visual feature followed by the label embedding.
    pub tokens: Vec<Vec<f32>>,
    /// Grid cells `(row, col)` the tokens came from, in scan order.
    pub cells: Vec<(usize, usize)>,
    /// Mean of the raw visual tokens followed by the label embedding.
    pub pooled: Option<Vec<f32>>,
}

impl PartFeatures {
    pub fn present(&self) -> bool {
        !self.tokens.is_empty()
    }
}

/// Part features for the nine foreground labels, in label order.
#[derive(Debug, Clone, PartialEq)]
pub struct PartFeatureSet {
    pub parts: Vec<PartFeatures>,
    pub token_dim: usize,
}

impl PartFeatureSet {
    pub fn get(&self, label: PartLabel) -> Option<&PartFeatures> {
        self.parts.iter().find(|p| p.label == label)
    }

    pub fn token_count(&self) -> usize {
        self.parts.iter().map(|p| p.tokens.len()).sum()
    }

    /// All tokens as matrix rows (label order, then scan order) together with
    /// the label each row belongs to. Suitable as cross-attention keys/values.
    pub fn token_matrix(&self) -> (Matrix, Vec<PartLabel>) {
        stack_token_rows(&[self]).expect("single set has uniform token dim")
    }
}

/// Stacks the tokens of several feature sets, e.g. the garment-removed person
/// followed by a new garment, into one key/value matrix.
pub fn stack_token_rows(sets: &[&PartFeatureSet]) -> Result<(Matrix, Vec<PartLabel>)> {
    let dim = sets.first().map_or(0, |s| s.token_dim);
    if let Some(s) = sets.iter().find(|s| s.token_dim != dim) {
        return Err(Error::shape(format!(
            "token dimension {} differs from {dim}",
            s.token_dim
        )));
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for s in sets {
        for p in &s.parts {
            for t in &p.tokens {
                data.extend(t.iter().map(|&v| v as f64));
                labels.push(p.label);
            }
        }
    }
    Ok((Matrix::new(labels.len(), dim, data)?, labels))
}

/// Majority label of every feature cell.
///
/// Cell `(i, j)` covers pixel rows `[i*H/Hf, (i+1)*H/Hf)` and the analogous
/// columns (at least one pixel). Ties go to background, then to the lowest id.
pub fn downsample_majority(seg: &PartSegmentation, rows: usize, cols: usize) -> Vec<u8> {
    let span = |i: usize, n: usize, full: usize| {
        let a = (i * full / n).min(full - 1);
        let b = ((i + 1) * full / n).clamp(a + 1, full);
        a..b
    };
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut counts = [0usize; 10];
            for y in span(i, rows, seg.height()) {
                for x in span(j, cols, seg.width()) {
                    counts[seg.label(x, y) as usize] += 1;
                }
            }
            let best = counts.iter().copied().max().unwrap_or(0);
            let label = counts.iter().position(|&c| c == best).unwrap_or(0);
            out.push(label as u8);
        }
    }
    out
}

/// Groups feature-grid tokens by the majority part label of their cell.
pub fn extract_part_features(
    grid: &FeatureGrid,
    seg: &PartSegmentation,
    embeds: &LabelEmbeddings,
) -> Result<PartFeatureSet> {
    if seg.width() == 0 || seg.height() == 0 {
        return Err(Error::EmptyImage);
    }
    let cell_labels = downsample_majority(seg, grid.rows, grid.cols);
    let token_dim = grid.dim + embeds.dim();
    let mut parts: Vec<PartFeatures> = PartLabel::PARTS
        .iter()
        .map(|&label| PartFeatures {
            label,
            tokens: Vec::new(),
            cells: Vec::new(),
            pooled: None,
        })
        .collect();
    let mut sums = vec![vec![0.0f64; grid.dim]; PartLabel::PARTS.len()];
    for i in 0..grid.rows {
        for j in 0..grid.cols {
            let l = cell_labels[i * grid.cols + j];
            if l == 0 {
                continue;
            }
            let slot = l as usize - 1;
            let raw = grid.token(i, j);
            let mut tok = Vec::with_capacity(token_dim);
            tok.extend_from_slice(raw);
            tok.extend_from_slice(embeds.get(parts[slot].label));
            parts[slot].tokens.push(tok);
            parts[slot].cells.push((i, j));
            for (s, &v) in sums[slot].iter_mut().zip(raw) {
                *s += v as f64;
            }
        }
    }
    for (p, sum) in parts.iter_mut().zip(sums) {
        if p.tokens.is_empty() {
            continue;
        }
        let n = p.tokens.len() as f64;
        let mut pooled: Vec<f32> = sum.iter().map(|s| (s / n) as f32).collect();
        pooled.extend_from_slice(embeds.get(p.label));
        p.pooled = Some(pooled);
    }
    Ok(PartFeatureSet { parts, token_dim })
}
