use super::homography::{estimate_homography, Homography, Point};
use crate::error::{Error, Result};
use crate::imaging::{sample_into, Image, KeypointSet, Mask, Stencil, CONFIDENCE_FLOOR};

/// Slack allowed on the in-bounds test so that exact integer preimages which
/// come back as `-1e-15` after inversion still count as inside.
const BOUNDS_EPS: f64 = 1e-9;

/// Inverse-mapping perspective warp.
///
/// Output pixel `p` samples `img` at `H^-1 p` (bilinear, clamp-to-edge). It
/// is visible iff the preimage lies inside the source bounds and the
/// bilinearly sampled `alpha` there is at least 0.5. Invisible pixels are zero.
pub fn warp_perspective(
    img: &Image,
    alpha: &Mask,
    h: &Homography,
    out_width: usize,
    out_height: usize,
) -> Result<(Image, Mask)> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    if !img.same_extent(alpha) {
        return Err(Error::shape("garment alpha extent differs from garment image"));
    }
    let inv = h.inverse()?;
    let (max_x, max_y) = ((img.width() - 1) as f64, (img.height() - 1) as f64);
    let mut tex = Image::zeros(out_width, out_height, img.channels());
    let mut vis = Mask::zeros(out_width, out_height);
    for y in 0..out_height {
        for x in 0..out_width {
            let Some(q) = inv.apply(Point::new(x as f64, y as f64)) else {
                continue;
            };
            if q.x < -BOUNDS_EPS || q.y < -BOUNDS_EPS || q.x > max_x + BOUNDS_EPS || q.y > max_y + BOUNDS_EPS {
                continue;
            }
            let s = Stencil::new(img.width(), img.height(), q.x, q.y);
            let a: f64 = s
                .corners()
                .iter()
                .map(|&(cx, cy, w)| if alpha.get(cx, cy) { w } else { 0.0 })
                .sum();
            if a < 0.5 {
                continue;
            }
            sample_into(img, q.x, q.y, tex.pixel_mut(x, y));
            vis.set(x, y, true);
        }
    }
    Ok((tex, vis))
}

/// Result of placing a garment on a body.
#[derive(Debug, Clone)]
pub struct GarmentWarp {
    pub texture: Image,
    pub visibility: Mask,
    pub homography: Homography,
    /// Landmark names used for the fit, in garment-landmark order.
    pub matched: Vec<String>,
}

/// Matches landmarks by name (both scores at or above `confidence_floor`),
/// fits one homography from garment space to body space and warps.
pub fn warp_garment(
    garment: &Image,
    garment_mask: &Mask,
    garment_landmarks: &KeypointSet,
    body_keypoints: &KeypointSet,
    out_width: usize,
    out_height: usize,
    confidence_floor: f64,
) -> Result<GarmentWarp> {
    let mut src = Vec::new();
    let mut dst = Vec::new();
    let mut matched = Vec::new();
    for g in garment_landmarks.confident(confidence_floor) {
        if let Some(b) = body_keypoints.get(&g.name).filter(|b| b.score >= confidence_floor) {
            src.push(Point::new(g.x, g.y));
            dst.push(Point::new(b.x, b.y));
            matched.push(g.name.clone());
        }
    }
    if src.len() < 4 {
        return Err(Error::InsufficientPoints { found: src.len() });
    }
    let homography = estimate_homography(&src, &dst)?;
    let (texture, visibility) = warp_perspective(garment, garment_mask, &homography, out_width, out_height)?;
    Ok(GarmentWarp {
        texture,
        visibility,
        homography,
        matched,
    })
}

/// [`warp_garment`] with the default confidence floor.
pub fn warp_garment_default(
    garment: &Image,
    garment_mask: &Mask,
    garment_landmarks: &KeypointSet,
    body_keypoints: &KeypointSet,
    out_width: usize,
    out_height: usize,
) -> Result<GarmentWarp> {
    warp_garment(
        garment,
        garment_mask,
        garment_landmarks,
        body_keypoints,
        out_width,
        out_height,
        CONFIDENCE_FLOOR,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Keypoint;

    fn checker4() -> Image {
        let data = (0..16)
            .map(|i| if (i % 4 + i / 4) % 2 == 0 { 1.0 } else { 0.0 })
            .collect();
        Image::new(4, 4, 1, data).unwrap()
    }

    #[test]
    fn identity_copies_under_alpha() {
        let img = checker4();
        let alpha = Mask::from_fn(4, 4, |x, y| x + y < 4);
        let (tex, vis) = warp_perspective(&img, &alpha, &Homography::IDENTITY, 4, 4).unwrap();
        assert_eq!(vis, alpha);
        for y in 0..4 {
            for x in 0..4 {
                let expect = if alpha.get(x, y) { img.pixel(x, y)[0] } else { 0.0 };
                assert_eq!(tex.pixel(x, y)[0], expect);
            }
        }
    }

    #[test]
    fn translation_shifts_and_hides_uncovered_columns() {
        let img = checker4();
        let (tex, vis) =
            warp_perspective(&img, &Mask::ones(4, 4), &Homography::translation(2.0, 0.0), 4, 4).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                if x < 2 {
                    assert!(!vis.get(x, y));
                    assert_eq!(tex.pixel(x, y)[0], 0.0);
                } else {
                    assert!(vis.get(x, y));
                    assert_eq!(tex.pixel(x, y)[0], img.pixel(x - 2, y)[0]);
                }
            }
        }
    }

    #[test]
    fn empty_alpha_gives_nothing() {
        let (tex, vis) =
            warp_perspective(&checker4(), &Mask::zeros(4, 4), &Homography::IDENTITY, 6, 5).unwrap();
        assert_eq!(vis.count(), 0);
        assert!(tex.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn translation_then_inverse_restores_overlap() {
        let img = checker4();
        let h = Homography::translation(1.0, 1.0);
        let ones = Mask::ones(4, 4);
        let (a, va) = warp_perspective(&img, &ones, &h, 4, 4).unwrap();
        let (b, vb) = warp_perspective(&a, &va, &h.inverse().unwrap(), 4, 4).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                if vb.get(x, y) {
                    assert_eq!(b.pixel(x, y), img.pixel(x, y));
                }
            }
        }
        assert_eq!(vb.count(), 9);
    }

    fn kps(v: &[(&str, f64, f64)]) -> KeypointSet {
        KeypointSet::new(
            v.iter()
                .map(|&(n, x, y)| Keypoint {
                    name: n.into(),
                    x,
                    y,
                    score: 1.0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_landmarks_paste_unchanged() {
        let img = checker4();
        let mask = Mask::ones(4, 4);
        let l = kps(&[("a", 0.0, 0.0), ("b", 3.0, 0.0), ("c", 3.0, 3.0), ("d", 0.0, 3.0)]);
        let out = warp_garment_default(&img, &mask, &l, &l, 4, 4).unwrap();
        assert_eq!(out.visibility, mask);
        for (a, b) in out.texture.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn three_shared_names_is_insufficient() {
        let img = checker4();
        let mask = Mask::ones(4, 4);
        let g = kps(&[("a", 0.0, 0.0), ("b", 3.0, 0.0), ("c", 3.0, 3.0), ("d", 0.0, 3.0)]);
        let b = kps(&[("a", 0.0, 0.0), ("b", 3.0, 0.0), ("c", 3.0, 3.0), ("z", 0.0, 3.0)]);
        assert!(matches!(
            warp_garment_default(&img, &mask, &g, &b, 4, 4),
            Err(Error::InsufficientPoints { found: 3 })
        ));
    }

    #[test]
    fn low_confidence_landmarks_are_ignored() {
        let img = checker4();
        let mask = Mask::ones(4, 4);
        let g = kps(&[("a", 0.0, 0.0), ("b", 3.0, 0.0), ("c", 3.0, 3.0), ("d", 0.0, 3.0)]);
        let mut b: Vec<Keypoint> = g.iter().cloned().collect();
        b[3].score = 0.1;
        let b = KeypointSet::new(b).unwrap();
        assert!(matches!(
            warp_garment_default(&img, &mask, &g, &b, 4, 4),
            Err(Error::InsufficientPoints { found: 3 })
        ));
    }
}
