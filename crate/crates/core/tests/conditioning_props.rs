use std::collections::BTreeMap;

use humanedit_core::conditioning::{
    apply_part, extract_background, extract_part_features, BackgroundOptions, FeatureGrid, LabelEmbeddings, PartDraw,
    PartLabel, PartSegmentation,
};
use humanedit_core::imaging::{Image, Keypoint, KeypointSet};
use proptest::prelude::*;

fn keypoints(pts: &[(f64, f64)]) -> KeypointSet {
    KeypointSet::new(
        pts.iter()
            .enumerate()
            .map(|(i, &(x, y))| Keypoint {
                name: format!("j{i}"),
                x,
                y,
                score: 0.9,
            })
            .collect(),
    )
    .unwrap()
}

fn embeddings(dim: usize) -> LabelEmbeddings {
    let table: BTreeMap<PartLabel, Vec<f32>> = PartLabel::PARTS
        .iter()
        .map(|&l| (l, vec![l.id() as f32; dim]))
        .collect();
    LabelEmbeddings::new(table).unwrap()
}

fn sorted_pixels(img: &Image, x0: usize, y0: usize, side: usize) -> Vec<Vec<u32>> {
    let mut px: Vec<Vec<u32>> = (y0..y0 + side)
        .flat_map(|y| (x0..x0 + side).map(move |x| (x, y)))
        .map(|(x, y)| img.pixel(x, y).iter().map(|v| v.to_bits()).collect())
        .collect();
    px.sort();
    px
}

proptest! {
    #[test]
    fn background_untouched_outside_boxes(
        w in 8usize..40,
        h in 8usize..40,
        pts in prop::collection::vec((0.0f64..40.0, 0.0f64..40.0), 1..6),
        fill in 0.0f32..=1.0,
    ) {
        let img = Image::new(w, h, 3, (0..w * h * 3).map(|i| (i % 97) as f32 / 96.0).collect()).unwrap();
        let src = keypoints(&pts);
        let tgt = keypoints(&pts.iter().map(|&(x, y)| (x + 3.0, y)).collect::<Vec<_>>());
        let opts = BackgroundOptions { fill, ..BackgroundOptions::default() };
        let out = extract_background(&img, &src, &tgt, &opts).unwrap();
        let boxes: Vec<_> = [&src, &tgt]
            .iter()
            .filter_map(|k| humanedit_core::conditioning::pose_box(k, opts.margin, opts.confidence_floor))
            .collect();
        for y in 0..h {
            for x in 0..w {
                if boxes.iter().any(|b| b.contains(x as f64, y as f64)) {
                    prop_assert!(out.pixel(x, y).iter().all(|&v| v == fill));
                } else {
                    prop_assert_eq!(out.pixel(x, y), img.pixel(x, y));
                }
            }
        }
    }

    #[test]
    fn token_count_bounded_by_grid(
        rows in 1usize..8,
        cols in 1usize..8,
        w in 4usize..30,
        h in 4usize..30,
        labels in prop::collection::vec(0u8..=9, 900),
    ) {
        let seg = PartSegmentation::new(w, h, labels[..w * h].to_vec()).unwrap();
        let grid = FeatureGrid::new(rows, cols, 2, vec![0.5; rows * cols * 2]).unwrap();
        let set = extract_part_features(&grid, &seg, &embeddings(3)).unwrap();
        prop_assert!(set.token_count() <= rows * cols);
        prop_assert_eq!(set.token_dim, 5);
        for p in &set.parts {
            prop_assert_eq!(p.tokens.len(), p.cells.len());
            prop_assert!(p.tokens.iter().all(|t| t.len() == 5 && t[2..].iter().all(|&v| v == p.label.id() as f32)));
        }
    }

    #[test]
    fn quarter_turns_permute_square_part(
        half in 1usize..6,
        turns in 0u8..4,
        vals in prop::collection::vec(0.0f32..=1.0, 3 * 169),
    ) {
        let side = 2 * half + 1;
        let (w, h) = (side + 2, side + 2);
        let labels = (0..w * h)
            .map(|i| if (1..=side).contains(&(i % w)) && (1..=side).contains(&(i / w)) { PartLabel::UpperClothing.id() } else { 0 })
            .collect();
        let seg = PartSegmentation::new(w, h, labels).unwrap();
        let img = Image::new(w, h, 3, vals[..w * h * 3].to_vec()).unwrap();
        let bbox = seg.bbox(PartLabel::UpperClothing).unwrap();
        let mut out = img.clone();
        let draw = PartDraw { quarter_turns: turns, jitter_deg: 0.0, flip: false };
        apply_part(&img, &seg, &mut out, PartLabel::UpperClothing, bbox, &draw);
        prop_assert_eq!(sorted_pixels(&out, 1, 1, side), sorted_pixels(&img, 1, 1, side));
        // the border ring is background and stays as is
        for y in 0..h {
            for x in 0..w {
                if seg.label(x, y) == 0 {
                    prop_assert_eq!(out.pixel(x, y), img.pixel(x, y));
                }
            }
        }
    }
}
