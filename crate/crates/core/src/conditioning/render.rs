use crate::error::{Error, Result};
use crate::imaging::{io, DensePoseMap, Image, KeypointSet, CONFIDENCE_FLOOR};

/// The 18-joint body layout, in index order.
pub const JOINTS: [&str; 18] = [
    "nose",
    "neck",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_hip",
    "right_knee",
    "right_ankle",
    "left_hip",
    "left_knee",
    "left_ankle",
    "right_eye",
    "left_eye",
    "right_ear",
    "left_ear",
];

/// Joint index pairs, drawn in this order with [`LIMB_COLORS`].
pub const LIMBS: [(usize, usize); 17] = [
    (1, 2),
    (1, 5),
    (2, 3),
    (3, 4),
    (5, 6),
    (6, 7),
    (1, 8),
    (8, 9),
    (9, 10),
    (1, 11),
    (11, 12),
    (12, 13),
    (1, 0),
    (0, 14),
    (14, 16),
    (0, 15),
    (15, 17),
];

pub const LIMB_COLORS: [[u8; 3]; 17] = [
    [255, 0, 0],
    [255, 85, 0],
    [255, 170, 0],
    [255, 255, 0],
    [170, 255, 0],
    [85, 255, 0],
    [0, 255, 0],
    [0, 255, 85],
    [0, 255, 170],
    [0, 255, 255],
    [0, 170, 255],
    [0, 85, 255],
    [0, 0, 255],
    [85, 0, 255],
    [170, 0, 255],
    [255, 0, 255],
    [255, 0, 85],
];

/// Line thickness: 3 px at 256, proportional to the longer output side.
pub fn limb_thickness(width: usize, height: usize) -> usize {
    ((3.0 * width.max(height) as f64 / 256.0).round() as usize).max(1)
}

/// Rasterizes the skeleton on black: each limb whose two joints are confident
/// is a Bresenham line stamped with a disc of radius `(thickness - 1) / 2`.
/// No anti-aliasing; later limbs overwrite earlier ones.
pub fn render_keypoints(kps: &KeypointSet, width: usize, height: usize) -> Result<Image> {
    if kps.confident(CONFIDENCE_FLOOR).next().is_none() {
        return Err(Error::EmptyPose);
    }
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let joints: Vec<Option<(f64, f64)>> = JOINTS
        .iter()
        .map(|n| {
            kps.get(n)
                .filter(|k| k.score >= CONFIDENCE_FLOOR)
                .map(|k| (k.x, k.y))
        })
        .collect();
    let radius = (limb_thickness(width, height) - 1) / 2;
    let mut img = Image::zeros(width, height, 3);
    for (&(a, b), color) in LIMBS.iter().zip(LIMB_COLORS) {
        let (Some(p), Some(q)) = (joints[a], joints[b]) else {
            continue;
        };
        let color = color.map(io::from_u8);
        let Some((p, q)) = clip_segment(p, q, width, height, radius as f64) else {
            continue;
        };
        for (x, y) in bresenham(p, q) {
            stamp(&mut img, x, y, radius, &color);
        }
    }
    Ok(img)
}

/// IUV raster of a DensePose map: identical values to its PNG encoding.
/// Resampled nearest-neighbour when the requested extent differs.
pub fn render_densepose(pose: &DensePoseMap, width: usize, height: usize) -> Result<Image> {
    if pose.width() == 0 || pose.height() == 0 || width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let pose = if (pose.width(), pose.height()) == (width, height) {
        pose.clone()
    } else {
        pose.resize_nearest(width, height)
    };
    let rgb = io::encode_densepose(&pose);
    Ok(Image::from_raw(
        width,
        height,
        3,
        rgb.into_raw().into_iter().map(io::from_u8).collect(),
    ))
}

/// Either pose representation.
pub enum PoseInput<'a> {
    Keypoints(&'a KeypointSet),
    DensePose(&'a DensePoseMap),
}

pub fn render_pose(pose: PoseInput<'_>, width: usize, height: usize) -> Result<Image> {
    match pose {
        PoseInput::Keypoints(k) => render_keypoints(k, width, height),
        PoseInput::DensePose(d) => render_densepose(d, width, height),
    }
}

fn stamp(img: &mut Image, cx: i64, cy: i64, radius: usize, color: &[f32; 3]) {
    let r = radius as i64;
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy > r * r {
                continue;
            }
            let (x, y) = (cx + dx, cy + dy);
            if x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() {
                img.pixel_mut(x as usize, y as usize).copy_from_slice(color);
            }
        }
    }
}

/// Integer Bresenham line between rounded endpoints, inclusive.
pub(crate) fn bresenham(p: (f64, f64), q: (f64, f64)) -> Vec<(i64, i64)> {
    let (mut x0, mut y0) = (p.0.round() as i64, p.1.round() as i64);
    let (x1, y1) = (q.0.round() as i64, q.1.round() as i64);
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy) as usize + 1);
    loop {
        out.push((x0, y0));
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
    out
}

/// Liang-Barsky clip to the image rectangle grown by `pad`.
fn clip_segment(
    p: (f64, f64),
    q: (f64, f64),
    width: usize,
    height: usize,
    pad: f64,
) -> Option<((f64, f64), (f64, f64))> {
    let (xmin, ymin) = (-pad - 0.5, -pad - 0.5);
    let (xmax, ymax) = (width as f64 - 0.5 + pad, height as f64 - 0.5 + pad);
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (den, num) in [
        (-dx, p.0 - xmin),
        (dx, xmax - p.0),
        (-dy, p.1 - ymin),
        (dy, ymax - p.1),
    ] {
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let t = num / den;
            if den < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some((
        (p.0 + t0 * dx, p.1 + t0 * dy),
        (p.0 + t1 * dx, p.1 + t1 * dy),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Keypoint;
    use std::collections::HashSet;

    fn kp(name: &str, x: f64, y: f64, score: f64) -> Keypoint {
        Keypoint {
            name: name.into(),
            x,
            y,
            score,
        }
    }

    /// Independent line oracle: for an x-major segment, one pixel per column
    /// at the rounded interpolated row (and symmetrically for y-major).
    fn dda_oracle(p: (i64, i64), q: (i64, i64)) -> HashSet<(i64, i64)> {
        let (dx, dy) = (q.0 - p.0, q.1 - p.1);
        let n = dx.abs().max(dy.abs());
        (0..=n)
            .map(|i| {
                let t = if n == 0 { 0.0 } else { i as f64 / n as f64 };
                (
                    (p.0 as f64 + t * dx as f64).round() as i64,
                    (p.1 as f64 + t * dy as f64).round() as i64,
                )
            })
            .collect()
    }

    #[test]
    fn below_floor_is_empty_pose() {
        let k = KeypointSet::new(vec![kp("neck", 1.0, 1.0, 0.1)]).unwrap();
        assert!(matches!(render_keypoints(&k, 8, 8), Err(Error::EmptyPose)));
        assert!(matches!(
            render_keypoints(&KeypointSet::empty(), 8, 8),
            Err(Error::EmptyPose)
        ));
    }

    #[test]
    fn single_limb_is_one_thin_segment() {
        // 64x64 -> thickness round(0.75) = 1, so the raster is the bare line.
        let k = KeypointSet::new(vec![
            kp("neck", 5.0, 10.0, 0.9),
            kp("right_shoulder", 40.0, 22.0, 0.9),
        ])
        .unwrap();
        let img = render_keypoints(&k, 64, 64).unwrap();
        let color = LIMB_COLORS[0].map(io::from_u8);
        let expected = dda_oracle((5, 10), (40, 22));
        for y in 0..64 {
            for x in 0..64 {
                let px = img.pixel(x, y);
                if expected.contains(&(x as i64, y as i64)) {
                    assert_eq!(px, &color, "({x},{y})");
                } else {
                    assert_eq!(px, &[0.0; 3], "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn thickness_three_at_256() {
        assert_eq!(limb_thickness(256, 256), 3);
        assert_eq!(limb_thickness(512, 512), 6);
        let k = KeypointSet::new(vec![
            kp("neck", 100.0, 50.0, 0.9),
            kp("left_shoulder", 100.0, 80.0, 0.9),
        ])
        .unwrap();
        let img = render_keypoints(&k, 256, 256).unwrap();
        // vertical line dilated by a radius-1 disc: columns 99..=101
        let lit: usize = (0..256).filter(|&x| img.pixel(x, 60)[0] > 0.0 || img.pixel(x, 60)[1] > 0.0).count();
        assert_eq!(lit, 3);
        assert_eq!(img.pixel(100, 49), &LIMB_COLORS[1].map(io::from_u8));
        assert_eq!(img.pixel(100, 48), &[0.0; 3]);
    }

    #[test]
    fn far_off_image_segment_is_clipped() {
        let k = KeypointSet::new(vec![
            kp("neck", -1e9, 5.0, 0.9),
            kp("right_shoulder", 1e9, 5.0, 0.9),
        ])
        .unwrap();
        let img = render_keypoints(&k, 16, 16).unwrap();
        assert!((0..16).all(|x| img.pixel(x, 5)[0] == 1.0));
    }

    #[test]
    fn densepose_raster_matches_png_bytes() {
        let pose = DensePoseMap::new(2, 2, vec![0, 3, 24, 1], vec![[0.0, 0.0], [0.2, 0.9], [1.0, 1.0], [0.5, 0.0]])
            .unwrap();
        let img = render_densepose(&pose, 2, 2).unwrap();
        let bytes: Vec<u8> = img.data().iter().map(|&v| io::to_u8(v)).collect();
        assert_eq!(bytes, io::encode_densepose(&pose).into_raw());
    }

    #[test]
    fn bresenham_endpoints_and_connectivity() {
        let line = bresenham((0.0, 0.0), (7.0, -3.0));
        assert_eq!(line.first(), Some(&(0, 0)));
        assert_eq!(line.last(), Some(&(7, -3)));
        for w in line.windows(2) {
            assert!((w[1].0 - w[0].0).abs() <= 1 && (w[1].1 - w[0].1).abs() <= 1);
        }
    }
}
