use std::path::{Path, PathBuf};

use clap::Args;
use humanedit_core::attention::Matrix;
use humanedit_core::curation::DetBox;
use humanedit_core::imaging::{io, Keypoint, KeypointSet, Mask};
use humanedit_core::synthetic::{body_keypoints, dense_pair, garment_scene, part_scene, passing_record};
use humanedit_core::tensor::RawTensor;
use humanedit_core::Error;

use crate::CliError;

#[derive(Args)]
pub struct MakeFixtures {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side length of the image fixtures.
    #[arg(long, default_value_t = 128)]
    size: usize,
}

fn shifted(kps: &KeypointSet, dx: f64, dy: f64) -> KeypointSet {
    KeypointSet::new(
        kps.iter()
            .map(|k| Keypoint {
                x: k.x + dx,
                y: k.y + dy,
                ..k.clone()
            })
            .collect(),
    )
    .expect("names stay unique")
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

impl MakeFixtures {
    pub fn run(self) -> Result<(), CliError> {
        if self.size < 64 {
            return Err(CliError::Usage("--size must be at least 64".into()));
        }
        let d = &self.out_dir;
        std::fs::create_dir_all(d).map_err(|e| Error::Io {
            path: d.clone(),
            source: e,
        })?;
        let s = self.size;

        let pair = dense_pair(self.seed, s);
        io::save_image(d.join("person.png"), &pair.image_a)?;
        io::save_densepose(d.join("person_iuv.png"), &pair.pose_a)?;
        io::save_densepose(d.join("target_iuv.png"), &pair.pose_b)?;

        let g = garment_scene(self.seed, s);
        io::save_image(d.join("garment.png"), &g.garment)?;
        io::save_mask(d.join("garment_mask.png"), &g.mask)?;
        io::save_keypoints(d.join("garment_keypoints.json"), &g.garment_kps)?;
        io::save_keypoints(d.join("body_keypoints.json"), &g.body_kps)?;
        let three = KeypointSet::new(g.body_kps.iter().take(3).cloned().collect())?;
        io::save_keypoints(d.join("body_keypoints_3.json"), &three)?;

        let src = body_keypoints(s, s);
        io::save_keypoints(d.join("source_keypoints.json"), &shifted(&src, -(s as f64) / 10.0, 0.0))?;
        io::save_keypoints(d.join("target_keypoints.json"), &shifted(&src, s as f64 / 10.0, 0.0))?;

        let (scene, seg) = part_scene(self.seed, s, s);
        io::save_image(d.join("scene.png"), &scene)?;
        seg.save_png(d.join("segmentation.png"))?;
        io::save_mask(d.join("upper_mask.png"), &Mask::from_fn(s, s, |_, y| y < s / 2))?;
        io::save_mask(d.join("lower_mask.png"), &Mask::from_fn(s, s, |_, y| y >= s / 2))?;

        // attention inputs: 16 queries over a 4x4 map, 2 keys of dim 3
        let q = Matrix::from_fn(16, 3, |r, c| ((r * 3 + c) % 7) as f64 / 7.0 - 0.4);
        let k = Matrix::from_fn(2, 3, |r, c| if r == c { 1.0 } else { -0.5 });
        let v = Matrix::from_fn(2, 4, |r, c| (r * 4 + c) as f64 / 8.0);
        q.to_tensor().save(d.join("query.cstk"))?;
        k.to_tensor().save(d.join("key.cstk"))?;
        v.to_tensor().save(d.join("value.cstk"))?;
        let a = Matrix::from_fn(4, 4, |r, _| if r < 2 { 0.2 } else { 0.05 });
        a.to_tensor().save(d.join("upper_attention.cstk"))?;
        let noise = RawTensor::new(4, 4, 1, (0..16).map(|i| (i as f32 - 8.0) / 8.0).collect())?;
        noise.save(d.join("noise.cstk"))?;
        RawTensor::new(4, 4, 1, vec![0.0; 16])?.save(d.join("noise_pred.cstk"))?;

        let mut crowded = passing_record("crowded");
        crowded.person_boxes = Some(vec![
            DetBox { x: 10.0, y: 10.0, w: 300.0, h: 900.0, score: 0.9 },
            DetBox { x: 400.0, y: 10.0, w: 300.0, h: 900.0, score: 0.8 },
        ]);
        let mut small = passing_record("small");
        small.width = Some(320);
        let lines: Vec<String> = [passing_record("clean"), crowded, small]
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes"))
            .collect();
        write_text(&d.join("manifest.jsonl"), &(lines.join("\n") + "\n"))?;
        Ok(())
    }
}
