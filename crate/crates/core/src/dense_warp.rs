//! Reposing through body-surface UV coordinates.
//!
//! Source pixels are scattered into a per-part texture atlas using the source
//! DensePose map, then gathered back out at the UVs of the target map. Target
//! pixels whose atlas neighbourhood is sufficiently populated are marked
//! visible; everything else is left at zero for the generator to synthesize.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{DensePoseMap, Image, Mask, Stencil, PART_COUNT};

pub const DEFAULT_ATLAS_RESOLUTION: usize = 128;
pub const DEFAULT_FILL_ITERATIONS: usize = 2;
pub const DEFAULT_VISIBILITY_THRESHOLD: f64 = 0.5;
/// Weight given to texels filled by neighbour averaging. Below 1 so that
/// inferred texels can always be told apart from observed ones.
pub const DEFAULT_FILL_WEIGHT: f32 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseWarpConfig {
    pub atlas_resolution: usize,
    pub fill_iterations: usize,
    pub visibility_threshold: f64,
}

impl Default for DenseWarpConfig {
    fn default() -> Self {
        Self {
            atlas_resolution: DEFAULT_ATLAS_RESOLUTION,
            fill_iterations: DEFAULT_FILL_ITERATIONS,
            visibility_threshold: DEFAULT_VISIBILITY_THRESHOLD,
        }
    }
}

/// Per-part `R x R` RGB texture with fill weights.
///
/// A texel with weight 0 is empty. Observed texels carry their contribution
/// count; hole-filled texels carry the fill sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct UvAtlas {
    resolution: usize,
    color: Vec<[f32; 3]>,
    weight: Vec<f32>,
}

impl UvAtlas {
    pub fn empty(resolution: usize) -> Self {
        let n = PART_COUNT * resolution * resolution;
        Self {
            resolution,
            color: vec![[0.0; 3]; n],
            weight: vec![0.0; n],
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    #[inline]
    fn index(&self, part: u8, row: usize, col: usize) -> usize {
        debug_assert!(part >= 1 && part as usize <= PART_COUNT);
        ((part as usize - 1) * self.resolution + row) * self.resolution + col
    }

    /// Color and weight of texel `(row, col)` of `part` (1-based part index).
    pub fn texel(&self, part: u8, row: usize, col: usize) -> ([f32; 3], f32) {
        let i = self.index(part, row, col);
        (self.color[i], self.weight[i])
    }

    pub fn set_texel(&mut self, part: u8, row: usize, col: usize, color: [f32; 3], weight: f32) {
        let i = self.index(part, row, col);
        self.color[i] = color;
        self.weight[i] = weight;
    }

    pub fn filled_texels(&self) -> usize {
        self.weight.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.filled_texels() == 0
    }
}

#[inline]
fn texel_coord(t: f32, resolution: usize) -> usize {
    (t as f64 * (resolution - 1) as f64).round() as usize
}

/// Scatters every foreground source pixel into texel
/// `(round(v*(R-1)), round(u*(R-1)))` of its part. Collisions are averaged and
/// the fill weight counts contributions.
pub fn build_uv_atlas(src: &Image, src_pose: &DensePoseMap, resolution: usize) -> Result<UvAtlas> {
    if !src.same_extent(src_pose) {
        return Err(Error::shape(format!(
            "source {}x{} vs densepose {}x{}",
            src.width(),
            src.height(),
            src_pose.width(),
            src_pose.height()
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidValue(format!(
            "atlas resolution must be at least 2, got {resolution}"
        )));
    }
    let src = src.to_rgb();
    let n = PART_COUNT * resolution * resolution;
    let mut sum = vec![[0.0f64; 3]; n];
    let mut count = vec![0u32; n];
    for y in 0..src.height() {
        for x in 0..src.width() {
            let part = src_pose.part(x, y);
            if part == 0 {
                continue;
            }
            let [u, v] = src_pose.uv(x, y);
            let i = ((part as usize - 1) * resolution + texel_coord(v, resolution)) * resolution
                + texel_coord(u, resolution);
            for (s, &c) in sum[i].iter_mut().zip(src.pixel(x, y)) {
                *s += c as f64;
            }
            count[i] += 1;
        }
    }
    let mut atlas = UvAtlas::empty(resolution);
    for i in 0..n {
        if count[i] > 0 {
            let k = count[i] as f64;
            atlas.color[i] = sum[i].map(|s| (s / k) as f32);
            atlas.weight[i] = count[i] as f32;
        }
    }
    Ok(atlas)
}

/// Dilates the atlas by `iterations` rings using [`DEFAULT_FILL_WEIGHT`].
pub fn fill_atlas_holes(atlas: &UvAtlas, iterations: usize) -> UvAtlas {
    fill_atlas_holes_with(atlas, iterations, DEFAULT_FILL_WEIGHT)
}

/// Each iteration fills every empty texel that has at least one filled
/// 8-neighbour (within the same part) with the unweighted mean of those
/// neighbours and gives it `fill_weight`. Texels filled before the iteration
/// started are never modified.
pub fn fill_atlas_holes_with(atlas: &UvAtlas, iterations: usize, fill_weight: f32) -> UvAtlas {
    let r = atlas.resolution;
    let mut cur = atlas.clone();
    for _ in 0..iterations {
        let prev = cur.clone();
        let mut changed = false;
        for part in 1..=PART_COUNT as u8 {
            for row in 0..r {
                for col in 0..r {
                    let i = prev.index(part, row, col);
                    if prev.weight[i] > 0.0 {
                        continue;
                    }
                    let mut acc = [0.0f64; 3];
                    let mut k = 0u32;
                    for dr in -1i64..=1 {
                        for dc in -1i64..=1 {
                            if dr == 0 && dc == 0 {
                                continue;
                            }
                            let (nr, nc) = (row as i64 + dr, col as i64 + dc);
                            if nr < 0 || nc < 0 || nr >= r as i64 || nc >= r as i64 {
                                continue;
                            }
                            let j = prev.index(part, nr as usize, nc as usize);
                            if prev.weight[j] > 0.0 {
                                for (a, &c) in acc.iter_mut().zip(&prev.color[j]) {
                                    *a += c as f64;
                                }
                                k += 1;
                            }
                        }
                    }
                    if k > 0 {
                        cur.color[i] = acc.map(|a| (a / k as f64) as f32);
                        cur.weight[i] = fill_weight;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    cur
}

/// Gathers the atlas at every target foreground pixel.
///
/// The part grid is bilinearly sampled at `(u*(R-1), v*(R-1))` with each
/// corner weighted by its occupancy `min(weight, 1)`. The interpolated
/// occupancy decides visibility; visible pixels get the occupancy-normalized
/// color, every other pixel stays zero.
pub fn warp_dense(atlas: &UvAtlas, tgt_pose: &DensePoseMap, visibility_threshold: f64) -> (Image, Mask) {
    let (w, h) = (tgt_pose.width(), tgt_pose.height());
    let r = atlas.resolution;
    let scale = (r - 1) as f64;
    let mut tex = Image::zeros(w, h, 3);
    let mut vis = Mask::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let part = tgt_pose.part(x, y);
            if part == 0 {
                continue;
            }
            let [u, v] = tgt_pose.uv(x, y);
            let s = Stencil::new(r, r, u as f64 * scale, v as f64 * scale);
            let mut occ = 0.0f64;
            let mut acc = [0.0f64; 3];
            for (cx, cy, b) in s.corners() {
                if b == 0.0 {
                    continue;
                }
                let i = atlas.index(part, cy, cx);
                let o = b * (atlas.weight[i].min(1.0) as f64);
                if o == 0.0 {
                    continue;
                }
                occ += o;
                for (a, &c) in acc.iter_mut().zip(&atlas.color[i]) {
                    *a += o * c as f64;
                }
            }
            if occ > 0.0 && occ >= visibility_threshold {
                let px = tex.pixel_mut(x, y);
                for (p, a) in px.iter_mut().zip(acc) {
                    *p = ((a / occ) as f32).clamp(0.0, 1.0);
                }
                vis.set(x, y, true);
            }
        }
    }
    (tex, vis)
}

/// Build, hole-fill and gather in one call.
pub fn repose(
    src: &Image,
    src_pose: &DensePoseMap,
    tgt_pose: &DensePoseMap,
    cfg: &DenseWarpConfig,
) -> Result<(Image, Mask)> {
    let atlas = build_uv_atlas(src, src_pose, cfg.atlas_resolution)?;
    let atlas = fill_atlas_holes(&atlas, cfg.fill_iterations);
    Ok(warp_dense(&atlas, tgt_pose, cfg.visibility_threshold))
}
