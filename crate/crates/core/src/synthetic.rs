//! Deterministic synthetic inputs for tests, benchmarks and the CLI's
//! `make-fixtures` command.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conditioning::{PartSegmentation, JOINTS};
use crate::curation::{AnnotationRecord, DetBox};
use crate::dense_warp::DEFAULT_ATLAS_RESOLUTION;
use crate::imaging::{DensePoseMap, Image, Keypoint, KeypointSet, Mask, PART_COUNT};
use crate::sparse_warp::{Homography, Point};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

/// Texel range `[t0, t1]` of one UV axis.
#[derive(Debug, Clone, Copy)]
struct Span {
    t0: usize,
    t1: usize,
}

#[derive(Debug, Clone, Copy)]
struct PartPatch {
    part: u8,
    u: Span,
    v: Span,
    /// Per-channel `(a, b, phase)` of the texture, at most half a cycle per
    /// unit of UV so that it is resolvable at the default atlas resolution.
    tex: [(f64, f64, f64); 3],
}

impl PartPatch {
    fn color(&self, u: f64, v: f64) -> [f32; 3] {
        self.tex
            .map(|(a, b, p)| (0.5 + 0.3 * (std::f64::consts::TAU * (a * u + b * v) + p).sin()) as f32)
    }
}

/// Splits `0..size` into `n` jittered intervals.
fn cuts(rng: &mut ChaCha8Rng, size: usize, n: usize) -> Vec<usize> {
    let step = size / n;
    let jitter = step / 4;
    let mut c = vec![0];
    for i in 1..n {
        c.push(i * step + rng.random_range(0..=2 * jitter) - jitter);
    }
    c.push(size);
    c
}

fn grid(rng: &mut ChaCha8Rng, size: usize, n: usize) -> Vec<Rect> {
    let xs = cuts(rng, size, n);
    let ys = cuts(rng, size, n);
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            out.push(Rect {
                x0: xs[i],
                x1: xs[i + 1],
                y0: ys[j],
                y1: ys[j + 1],
            });
        }
    }
    out
}

/// Paints `patch` into `rect`: UV runs linearly (optionally reversed) over the
/// patch's texel range, so neighbouring pixels differ by at most one texel.
fn paint(
    img: &mut [f32],
    parts: &mut [u8],
    uv: &mut [[f32; 2]],
    size: usize,
    rect: Rect,
    patch: &PartPatch,
    flip: (bool, bool),
) {
    let r = (DEFAULT_ATLAS_RESOLUTION - 1) as f64;
    let (w, h) = ((rect.x1 - rect.x0 - 1) as f64, (rect.y1 - rect.y0 - 1) as f64);
    for y in rect.y0..rect.y1 {
        for x in rect.x0..rect.x1 {
            let mut fx = (x - rect.x0) as f64 / w;
            let mut fy = (y - rect.y0) as f64 / h;
            if flip.0 {
                fx = 1.0 - fx;
            }
            if flip.1 {
                fy = 1.0 - fy;
            }
            let u = (patch.u.t0 as f64 + fx * (patch.u.t1 - patch.u.t0) as f64) / r;
            let v = (patch.v.t0 as f64 + fy * (patch.v.t1 - patch.v.t0) as f64) / r;
            let i = y * size + x;
            parts[i] = patch.part;
            uv[i] = [u as f32, v as f32];
            img[3 * i..3 * i + 3].copy_from_slice(&patch.color(u, v));
        }
    }
}

/// A person photographed in two poses: `image_a` under `pose_a` and
/// `image_b` under `pose_b`, sharing one surface texture.
#[derive(Debug, Clone)]
pub struct DensePair {
    pub image_a: Image,
    pub pose_a: DensePoseMap,
    pub image_b: Image,
    pub pose_b: DensePoseMap,
}

/// Random body-surface layouts at `size x size` (at least 64).
///
/// Both poses tile the image with a jittered 4x4 grid of rectangular
/// patches, one body part per patch (two background patches in each). Parts
/// appear in different cells and orientations in the two poses. Every part's
/// UV range spans no more texels than either of its patches has pixels, so
/// scattering at the default atlas resolution leaves no interior holes.
pub fn dense_pair(seed: u64, size: usize) -> DensePair {
    assert!(size >= 64, "fixture size must be at least 64");
    let mut rng = rng(seed);
    let n = 4;
    let cells_a = grid(&mut rng, size, n);
    let cells_b = grid(&mut rng, size, n);
    let mut ids: Vec<u8> = (1..=PART_COUNT as u8).collect();
    ids.shuffle(&mut rng);
    let used = &ids[..n * n - 2];
    let mut order_a: Vec<Option<u8>> = used.iter().copied().map(Some).chain([None, None]).collect();
    let mut order_b = order_a.clone();
    order_a.shuffle(&mut rng);
    order_b.shuffle(&mut rng);
    let cell_of = |order: &[Option<u8>], p: u8| order.iter().position(|&o| o == Some(p)).expect("part placed");

    let r = DEFAULT_ATLAS_RESOLUTION - 1;
    let mut patches = Vec::new();
    for &p in used {
        let (ca, cb) = (cells_a[cell_of(&order_a, p)], cells_b[cell_of(&order_b, p)]);
        let max_w = (ca.x1 - ca.x0).min(cb.x1 - cb.x0) - 1;
        let max_h = (ca.y1 - ca.y0).min(cb.y1 - cb.y0) - 1;
        let mut span = |max: usize| {
            let len = rng.random_range(max / 2..=max).min(r);
            let t0 = rng.random_range(0..=r - len);
            Span { t0, t1: t0 + len }
        };
        let (u, v) = (span(max_w), span(max_h));
        let mut coef = || {
            (
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        };
        let tex = [coef(), coef(), coef()];
        patches.push(PartPatch { part: p, u, v, tex });
    }

    let render = |cells: &[Rect], order: &[Option<u8>], rng: &mut ChaCha8Rng| {
        let n2 = size * size;
        let mut img = vec![0.2f32; 3 * n2];
        let mut parts = vec![0u8; n2];
        let mut uv = vec![[0.0f32; 2]; n2];
        for (cell, slot) in cells.iter().zip(order) {
            let Some(p) = slot else { continue };
            let patch = patches.iter().find(|q| q.part == *p).expect("patch exists");
            let flip = (rng.random_bool(0.5), rng.random_bool(0.5));
            paint(&mut img, &mut parts, &mut uv, size, *cell, patch, flip);
        }
        (
            Image::new(size, size, 3, img).expect("valid fixture image"),
            DensePoseMap::new(size, size, parts, uv).expect("valid fixture pose"),
        )
    };
    let (image_a, pose_a) = render(&cells_a, &order_a, &mut rng);
    let (image_b, pose_b) = render(&cells_b, &order_b, &mut rng);
    DensePair {
        image_a,
        pose_a,
        image_b,
        pose_b,
    }
}

/// Canonical 18-joint standing pose inside a `width x height` frame.
pub fn body_keypoints(width: usize, height: usize) -> KeypointSet {
    const LAYOUT: [(f64, f64); 18] = [
        (0.50, 0.12),
        (0.50, 0.22),
        (0.38, 0.23),
        (0.33, 0.38),
        (0.31, 0.52),
        (0.62, 0.23),
        (0.67, 0.38),
        (0.69, 0.52),
        (0.43, 0.52),
        (0.43, 0.70),
        (0.43, 0.88),
        (0.57, 0.52),
        (0.57, 0.70),
        (0.57, 0.88),
        (0.47, 0.10),
        (0.53, 0.10),
        (0.45, 0.11),
        (0.55, 0.11),
    ];
    let kps = JOINTS
        .iter()
        .zip(LAYOUT)
        .map(|(name, (fx, fy))| Keypoint {
            name: name.to_string(),
            x: fx * (width - 1) as f64,
            y: fy * (height - 1) as f64,
            score: 0.9,
        })
        .collect();
    KeypointSet::new(kps).expect("valid canonical pose")
}

/// Garment landmark names shared by garment and body keypoint sets.
pub const GARMENT_LANDMARKS: [&str; 8] = [
    "left_collar",
    "right_collar",
    "left_shoulder",
    "right_shoulder",
    "left_waist",
    "right_waist",
    "left_hem",
    "right_hem",
];

#[derive(Debug, Clone)]
pub struct GarmentScene {
    pub garment: Image,
    pub mask: Mask,
    pub garment_kps: KeypointSet,
    pub body_kps: KeypointSet,
    /// Ground-truth garment-to-body map.
    pub homography: Homography,
    pub out_width: usize,
    pub out_height: usize,
}

/// A flat striped shirt on a `size x size` canvas and a body whose garment
/// landmarks are its image under a random mild homography.
pub fn garment_scene(seed: u64, size: usize) -> GarmentScene {
    let mut rng = rng(seed);
    let s = size as f64;
    let mask = Mask::from_fn(size, size, |x, y| {
        let (fx, fy) = (x as f64 / s, y as f64 / s);
        let body = (0.3..0.7).contains(&fx) && (0.15..0.9).contains(&fy);
        let sleeves = (0.15..0.85).contains(&fx) && (0.15..0.35).contains(&fy);
        body || sleeves
    });
    let mut data = Vec::with_capacity(size * size * 3);
    for y in 0..size {
        for x in 0..size {
            let c = if mask.get(x, y) {
                let stripe = ((y / 6) % 2) as f32;
                [0.2 + 0.6 * stripe, 0.3, 0.8 - 0.5 * stripe * (x as f32 / s as f32)]
            } else {
                [1.0, 1.0, 1.0]
            };
            data.extend_from_slice(&c);
        }
    }
    let garment = Image::new(size, size, 3, data).expect("valid garment");
    let at = [
        (0.42, 0.15),
        (0.58, 0.15),
        (0.30, 0.18),
        (0.70, 0.18),
        (0.30, 0.55),
        (0.70, 0.55),
        (0.30, 0.89),
        (0.70, 0.89),
    ];
    let homography = random_homography(&mut rng, s);
    let mut g = Vec::new();
    let mut b = Vec::new();
    for (name, (fx, fy)) in GARMENT_LANDMARKS.iter().zip(at) {
        let p = Point { x: fx * s, y: fy * s };
        let q = homography.apply(p).expect("landmark maps to a finite point");
        g.push(Keypoint { name: name.to_string(), x: p.x, y: p.y, score: 0.95 });
        b.push(Keypoint { name: name.to_string(), x: q.x, y: q.y, score: 0.9 });
    }
    GarmentScene {
        garment,
        mask,
        garment_kps: KeypointSet::new(g).expect("unique names"),
        body_kps: KeypointSet::new(b).expect("unique names"),
        homography,
        out_width: size,
        out_height: size,
    }
}

/// Mild perspective transform of a frame of side `s`: small rotation, scale
/// in [0.8, 1.1], shift up to 10% and a slight projective tilt.
pub fn random_homography(rng: &mut ChaCha8Rng, s: f64) -> Homography {
    let theta: f64 = rng.random_range(-0.2..0.2);
    let scale: f64 = rng.random_range(0.8..1.1);
    let (tx, ty) = (rng.random_range(-0.1..0.1) * s, rng.random_range(-0.1..0.1) * s);
    let (gx, gy) = (rng.random_range(-2e-4..2e-4) * 256.0 / s, rng.random_range(-2e-4..2e-4) * 256.0 / s);
    let (c, si) = (theta.cos() * scale, theta.sin() * scale);
    let half = s / 2.0;
    // rotate about the frame centre, then translate
    Homography::from_matrix([
        [c, -si, half - c * half + si * half + tx],
        [si, c, half - si * half - c * half + ty],
        [gx, gy, 1.0],
    ])
    .expect("non-singular by construction")
}

/// Rectangular part layout on a `width x height` canvas with a per-part
/// gradient texture, for segmentation and augmentation tests.
pub fn part_scene(seed: u64, width: usize, height: usize) -> (Image, PartSegmentation) {
    let mut rng = rng(seed);
    let mut labels = vec![0u8; width * height];
    let mut data = vec![0.0f32; width * height * 3];
    for (i, px) in data.chunks_exact_mut(3).enumerate() {
        let (x, y) = ((i % width) as f32, (i / width) as f32);
        px.copy_from_slice(&[x / width as f32, y / height as f32, 0.5]);
    }
    let count = rng.random_range(2..=5);
    for _ in 0..count {
        let label = rng.random_range(1..=9u8);
        let w = rng.random_range(width / 8..=width / 3).max(2);
        let h = rng.random_range(height / 8..=height / 3).max(2);
        let x0 = rng.random_range(0..=width - w);
        let y0 = rng.random_range(0..=height - h);
        let base = [rng.random::<f32>(), rng.random::<f32>(), rng.random::<f32>()];
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                let i = y * width + x;
                labels[i] = label;
                let t = ((x - x0) + 2 * (y - y0)) as f32 / (w + 2 * h) as f32;
                data[3 * i] = base[0] * (1.0 - t) + t;
                data[3 * i + 1] = base[1] * t;
                data[3 * i + 2] = base[2];
            }
        }
    }
    (
        Image::new(width, height, 3, data).expect("valid scene"),
        PartSegmentation::new(width, height, labels).expect("valid labels"),
    )
}

/// A record that passes every curation criterion at the default thresholds.
pub fn passing_record(id: &str) -> AnnotationRecord {
    AnnotationRecord {
        id: id.to_string(),
        width: Some(768),
        height: Some(1024),
        person_boxes: Some(vec![DetBox { x: 184.0, y: 100.0, w: 400.0, h: 880.0, score: 0.97 }]),
        face_boxes: Some(vec![DetBox { x: 330.0, y: 120.0, w: 110.0, h: 130.0, score: 0.93 }]),
        keypoints: Some(body_keypoints(768, 1024)),
        person_mask_area: Some(200_000.0),
        other_instance_overlap_area: Some(1_000.0),
        clothing_pixel_area: Some(120_000.0),
        caption: Some("a person standing in a park".to_string()),
        clip_similarity: Some(0.31),
    }
}

/// Largest per-channel absolute difference over the pixels set in `mask`.
pub fn masked_max_error(a: &Image, b: &Image, mask: &Mask) -> f32 {
    let c = a.channels();
    let mut worst = 0.0f32;
    for (i, &m) in mask.data().iter().enumerate() {
        if m != 0 {
            for k in 0..c {
                worst = worst.max((a.data()[i * c + k] - b.data()[i * c + k]).abs());
            }
        }
    }
    worst
}

/// PSNR in dB (peak 1) over the pixels set in `mask`; infinite when equal.
pub fn masked_psnr(a: &Image, b: &Image, mask: &Mask) -> f64 {
    let c = a.channels();
    let (mut sum, mut n) = (0.0f64, 0usize);
    for (i, &m) in mask.data().iter().enumerate() {
        if m != 0 {
            for k in 0..c {
                let d = (a.data()[i * c + k] - b.data()[i * c + k]) as f64;
                sum += d * d;
                n += 1;
            }
        }
    }
    if n == 0 || sum == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (n as f64 / sum).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_pair_is_deterministic() {
        let a = dense_pair(3, 64);
        let b = dense_pair(3, 64);
        assert_eq!(a.image_a, b.image_a);
        assert_eq!(a.pose_b, b.pose_b);
        assert!(a.pose_a.foreground().count() > 64 * 64 / 2);
    }

    #[test]
    fn garment_landmarks_follow_homography() {
        let s = garment_scene(1, 96);
        for (g, b) in s.garment_kps.iter().zip(s.body_kps.iter()) {
            let q = s.homography.apply(Point { x: g.x, y: g.y }).unwrap();
            assert!((q.x - b.x).abs() < 1e-9 && (q.y - b.y).abs() < 1e-9);
        }
    }

    #[test]
    fn passing_record_validates() {
        assert!(passing_record("x").validate().is_ok());
    }
}
