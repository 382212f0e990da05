use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args};
use humanedit_core::attention::{
    attention_map, cross_attention, localization_loss, noise_mse, total_loss, LossMode, LossWeights, Matrix,
    DEFAULT_LAMBDA_B, DEFAULT_LAMBDA_E,
};
use humanedit_core::conditioning::{
    augment_parts, extract_background, pack_condition, remove_garment, render_densepose, render_keypoints,
    AugmentConfig, BackgroundOptions, ConditionStack, PartSegmentation, Slot, DEFAULT_BOX_MARGIN,
    DEFAULT_REMOVAL_FILL,
};
use humanedit_core::curation::{curate_manifest, CurationConfig};
use humanedit_core::dense_warp::{
    repose, DenseWarpConfig, DEFAULT_ATLAS_RESOLUTION, DEFAULT_FILL_ITERATIONS, DEFAULT_VISIBILITY_THRESHOLD,
};
use humanedit_core::imaging::{io, Image, Mask, CONFIDENCE_FLOOR};
use humanedit_core::sparse_warp::{reprojection_rmse, warp_garment, Point};
use humanedit_core::tensor::RawTensor;
use humanedit_core::Error;

use crate::CliError;

type CmdResult = Result<(), CliError>;

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn load_matrix(path: &Path) -> Result<Matrix, Error> {
    Matrix::from_tensor(&RawTensor::load(path)?)
}

#[derive(Args)]
pub struct WarpDense {
    #[arg(long)]
    source: PathBuf,
    /// IUV PNG of the source image.
    #[arg(long)]
    source_pose: PathBuf,
    /// IUV PNG of the target pose; sets the output extent.
    #[arg(long)]
    target_pose: PathBuf,
    #[arg(long)]
    out_tex: PathBuf,
    #[arg(long)]
    out_mask: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ATLAS_RESOLUTION)]
    atlas_resolution: usize,
    #[arg(long, default_value_t = DEFAULT_FILL_ITERATIONS)]
    fill_iterations: usize,
    #[arg(long, default_value_t = DEFAULT_VISIBILITY_THRESHOLD)]
    visibility_threshold: f64,
}

impl WarpDense {
    pub fn run(self) -> CmdResult {
        let src = io::load_image(&self.source)?;
        let src_pose = io::load_densepose(&self.source_pose)?;
        let tgt_pose = io::load_densepose(&self.target_pose)?;
        let cfg = DenseWarpConfig {
            atlas_resolution: self.atlas_resolution,
            fill_iterations: self.fill_iterations,
            visibility_threshold: self.visibility_threshold,
        };
        let (tex, vis) = repose(&src, &src_pose, &tgt_pose, &cfg)?;
        io::save_image(&self.out_tex, &tex)?;
        io::save_mask(&self.out_mask, &vis)?;
        Ok(())
    }
}

#[derive(Args)]
pub struct WarpSparse {
    #[arg(long)]
    garment: PathBuf,
    #[arg(long)]
    garment_mask: PathBuf,
    /// Garment landmark JSON.
    #[arg(long)]
    garment_keypoints: PathBuf,
    /// Body keypoint JSON sharing landmark names with the garment.
    #[arg(long)]
    body_keypoints: PathBuf,
    /// Output width; defaults to the garment width.
    #[arg(long)]
    width: Option<usize>,
    /// Output height; defaults to the garment height.
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = CONFIDENCE_FLOOR)]
    confidence_floor: f64,
    #[arg(long)]
    out_tex: PathBuf,
    #[arg(long)]
    out_mask: PathBuf,
    /// Also write the fitted homography and its reprojection error as JSON.
    #[arg(long)]
    homography_out: Option<PathBuf>,
}

impl WarpSparse {
    pub fn run(self) -> CmdResult {
        let garment = io::load_image(&self.garment)?;
        let mask = io::load_mask(&self.garment_mask)?;
        let g = io::load_keypoints(&self.garment_keypoints)?;
        let b = io::load_keypoints(&self.body_keypoints)?;
        let w = self.width.unwrap_or(garment.width());
        let h = self.height.unwrap_or(garment.height());
        let fit = warp_garment(&garment, &mask, &g, &b, w, h, self.confidence_floor)?;
        io::save_image(&self.out_tex, &fit.texture)?;
        io::save_mask(&self.out_mask, &fit.visibility)?;
        if let Some(path) = &self.homography_out {
            let pts = |set: &humanedit_core::imaging::KeypointSet| -> Vec<Point> {
                fit.matched
                    .iter()
                    .map(|n| {
                        let k = set.get(n).expect("matched name exists");
                        Point { x: k.x, y: k.y }
                    })
                    .collect()
            };
            let rmse = reprojection_rmse(&fit.homography, &pts(&g), &pts(&b));
            write_json(
                path,
                &serde_json::json!({
                    "matrix": fit.homography.matrix(),
                    "matched": fit.matched,
                    "reprojection_rmse": rmse,
                }),
            )?;
        }
        Ok(())
    }
}

#[derive(Args)]
pub struct BgExtract {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    source_keypoints: PathBuf,
    #[arg(long)]
    target_keypoints: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Box growth per side as a fraction of the box's longer side.
    #[arg(long, default_value_t = DEFAULT_BOX_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = 0.0)]
    fill: f32,
}

impl BgExtract {
    pub fn run(self) -> CmdResult {
        let img = io::load_image(&self.image)?;
        let src = io::load_keypoints(&self.source_keypoints)?;
        let tgt = io::load_keypoints(&self.target_keypoints)?;
        let opts = BackgroundOptions {
            margin: self.margin,
            fill: self.fill,
            ..Default::default()
        };
        io::save_image(&self.out, &extract_background(&img, &src, &tgt, &opts)?)?;
        Ok(())
    }
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("pose").required(true).args(["keypoints", "densepose"]))]
pub struct RenderPose {
    #[arg(long)]
    keypoints: Option<PathBuf>,
    /// IUV PNG.
    #[arg(long)]
    densepose: Option<PathBuf>,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[arg(long)]
    out: PathBuf,
}

impl RenderPose {
    pub fn run(self) -> CmdResult {
        let img = match (&self.keypoints, &self.densepose) {
            (Some(k), _) => render_keypoints(&io::load_keypoints(k)?, self.width, self.height)?,
            (None, Some(d)) => render_densepose(&io::load_densepose(d)?, self.width, self.height)?,
            (None, None) => unreachable!("clap requires one pose input"),
        };
        io::save_image(&self.out, &img)?;
        Ok(())
    }
}

#[derive(Args)]
pub struct Pack {
    /// Warped texture; omitted means an all-zero texture slot.
    #[arg(long)]
    texture: Option<PathBuf>,
    /// Rendered pose raster.
    #[arg(long)]
    pose: PathBuf,
    /// Partial background.
    #[arg(long)]
    background: PathBuf,
    /// Output tensor file.
    #[arg(long)]
    out: PathBuf,
    /// Read inputs as 3-channel tensor files instead of 8-bit PNGs.
    #[arg(long)]
    float_io: bool,
    /// Also write the nine channels as grayscale PNGs into this directory.
    #[arg(long)]
    planes_dir: Option<PathBuf>,
}

impl Pack {
    fn load(&self, path: &Path) -> Result<Image, Error> {
        if self.float_io {
            RawTensor::load(path)?.to_image()
        } else {
            Ok(io::load_image(path)?.to_rgb())
        }
    }

    pub fn run(self) -> CmdResult {
        let tex = self.texture.as_deref().map(|p| self.load(p)).transpose()?;
        let pose = self.load(&self.pose)?;
        let bg = self.load(&self.background)?;
        let stack = pack_condition(tex.as_ref(), &pose, &bg)?;
        stack.to_tensor().save(&self.out)?;
        if let Some(dir) = &self.planes_dir {
            stack.save_planes(dir)?;
        }
        Ok(())
    }
}

#[derive(Args)]
pub struct Unpack {
    /// Packed tensor file.
    #[arg(long)]
    stack: PathBuf,
    /// Receives texture, pose and background as PNGs (or `.cstk` with `--float-io`).
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    float_io: bool,
}

impl Unpack {
    pub fn run(self) -> CmdResult {
        let stack = ConditionStack::from_tensor(RawTensor::load(&self.stack)?)?;
        std::fs::create_dir_all(&self.out_dir).map_err(|e| Error::Io {
            path: self.out_dir.clone(),
            source: e,
        })?;
        for (slot, name) in [(Slot::Texture, "texture"), (Slot::Pose, "pose"), (Slot::Background, "background")] {
            let img = stack.slice(slot);
            if self.float_io {
                RawTensor::from_image(&img).save(self.out_dir.join(format!("{name}.cstk")))?;
            } else {
                io::save_image(self.out_dir.join(format!("{name}.png")), &img)?;
            }
        }
        Ok(())
    }
}

#[derive(Args)]
pub struct RemoveGarment {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Fill value: one number for every channel, or one per channel.
    #[arg(long, value_delimiter = ',', default_values_t = [DEFAULT_REMOVAL_FILL])]
    fill: Vec<f32>,
}

impl RemoveGarment {
    pub fn run(self) -> CmdResult {
        let img = io::load_image(&self.image)?;
        let mask = io::load_mask(&self.mask)?;
        io::save_image(&self.out, &remove_garment(&img, &mask, &self.fill)?)?;
        Ok(())
    }
}

#[derive(Args)]
pub struct Augment {
    #[arg(long)]
    image: PathBuf,
    /// Indexed part-label PNG.
    #[arg(long)]
    segmentation: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Rotation jitter half-range in degrees.
    #[arg(long, default_value_t = 15.0)]
    jitter_deg: f64,
    #[arg(long)]
    no_flip: bool,
}

impl Augment {
    pub fn run(self) -> CmdResult {
        let img = io::load_image(&self.image)?;
        let seg = PartSegmentation::load_png(&self.segmentation)?;
        let cfg = AugmentConfig {
            jitter_deg: self.jitter_deg,
            allow_flip: !self.no_flip,
        };
        io::save_image(&self.out, &augment_parts(&img, &seg, self.seed, &cfg)?)?;
        Ok(())
    }
}

#[derive(Args)]
pub struct Attn {
    /// `n x d` query matrix (single-channel tensor, rows = height).
    #[arg(long)]
    query: PathBuf,
    /// `m x d` keys.
    #[arg(long)]
    key: PathBuf,
    /// `m x c` values.
    #[arg(long)]
    value: PathBuf,
    /// Logit scale; defaults to 1/sqrt(d).
    #[arg(long)]
    scale: Option<f64>,
    /// `n x c` output tensor.
    #[arg(long)]
    out: PathBuf,
    /// `n x m` attention map tensor.
    #[arg(long)]
    map_out: PathBuf,
}

impl Attn {
    pub fn run(self) -> CmdResult {
        let (q, k, v) = (load_matrix(&self.query)?, load_matrix(&self.key)?, load_matrix(&self.value)?);
        let res = cross_attention(&q, &k, &v, self.scale)?;
        res.output.to_tensor().save(&self.out)?;
        res.attention.to_tensor().save(&self.map_out)?;
        Ok(())
    }
}

#[derive(Args)]
pub struct Loss {
    /// Part attention map (single-channel tensor); pairs with `--part-mask` in order.
    #[arg(long = "part-attention", action = ArgAction::Append)]
    part_attention: Vec<PathBuf>,
    /// Part mask PNG, resampled to its attention map's extent.
    #[arg(long = "part-mask", action = ArgAction::Append)]
    part_mask: Vec<PathBuf>,
    /// Queries for computing part maps in place of `--part-attention`: one
    /// query per map cell, row-major over `--map-height x --map-width`.
    #[arg(long, requires_all = ["key", "map_height", "map_width"])]
    query: Option<PathBuf>,
    /// One key per part mask, in the same order.
    #[arg(long, requires = "query")]
    key: Option<PathBuf>,
    /// Logit scale for `--query`/`--key`; defaults to 1/sqrt(d).
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, requires = "query")]
    map_height: Option<usize>,
    #[arg(long, requires = "query")]
    map_width: Option<usize>,
    /// Attention map of the texture token.
    #[arg(long, requires = "texture_mask")]
    texture_attention: Option<PathBuf>,
    /// Visibility mask of the warped texture.
    #[arg(long, requires = "texture_attention")]
    texture_mask: Option<PathBuf>,
    /// True noise tensor.
    #[arg(long, requires = "noise_pred")]
    noise: Option<PathBuf>,
    /// Predicted noise tensor.
    #[arg(long, requires = "noise")]
    noise_pred: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA_B)]
    lambda1: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA_E)]
    lambda2: f64,
    /// Normalize each region mean by its own size; `false` divides both by all cells.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    region_normalized: bool,
}

impl Loss {
    pub fn run(self) -> CmdResult {
        let mode = if self.region_normalized {
            LossMode::RegionNormalized
        } else {
            LossMode::Literal
        };
        let masks = self
            .part_mask
            .iter()
            .map(io::load_mask)
            .collect::<Result<Vec<Mask>, Error>>()?;
        let maps: Vec<Matrix> = match (&self.query, &self.key) {
            (Some(q), Some(k)) => {
                if !self.part_attention.is_empty() {
                    return Err(CliError::Usage("--part-attention conflicts with --query/--key".into()));
                }
                let (h, w) = (self.map_height.unwrap_or(0), self.map_width.unwrap_or(0));
                let (q, k) = (load_matrix(q)?, load_matrix(k)?);
                if k.rows() != masks.len() {
                    return Err(CliError::Core(Error::ShapeMismatch(format!(
                        "{} keys for {} part masks",
                        k.rows(),
                        masks.len()
                    ))));
                }
                let a = cross_attention(&q, &k, &Matrix::zeros(k.rows(), 1), self.scale)?.attention;
                (0..k.rows())
                    .map(|j| attention_map(&a, |c| c == j, h, w))
                    .collect::<Result<_, _>>()?
            }
            _ => {
                if self.part_attention.len() != masks.len() {
                    return Err(CliError::Usage(format!(
                        "{} --part-attention for {} --part-mask",
                        self.part_attention.len(),
                        masks.len()
                    )));
                }
                self.part_attention
                    .iter()
                    .map(|p| load_matrix(p))
                    .collect::<Result<_, _>>()?
            }
        };
        let mut l_b = 0.0;
        for (a, m) in maps.iter().zip(&masks) {
            l_b += localization_loss(a, &m.resize_nearest(a.cols(), a.rows()), mode)?;
        }
        let l_e = match (&self.texture_attention, &self.texture_mask) {
            (Some(a), Some(m)) => {
                let a = load_matrix(a)?;
                let m = io::load_mask(m)?.resize_nearest(a.cols(), a.rows());
                localization_loss(&a, &m, mode)?
            }
            _ => 0.0,
        };
        let l_sd = match (&self.noise, &self.noise_pred) {
            (Some(e), Some(p)) => {
                let (e, p) = (RawTensor::load(e)?, RawTensor::load(p)?);
                if (e.channels, e.height, e.width) != (p.channels, p.height, p.width) {
                    return Err(CliError::Core(Error::ShapeMismatch(format!(
                        "noise {}x{}x{} vs prediction {}x{}x{}",
                        e.channels, e.height, e.width, p.channels, p.height, p.width
                    ))));
                }
                noise_mse(&e.data, &p.data)?
            }
            _ => 0.0,
        };
        let weights = LossWeights {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
        };
        let breakdown = total_loss(l_sd, l_b, l_e, weights)?;
        let mut v = serde_json::to_value(breakdown).expect("breakdown serializes");
        v["mode"] = serde_json::to_value(mode).expect("mode serializes");
        print_json(&v);
        Ok(())
    }
}

#[derive(Args)]
pub struct Curate {
    /// JSONL manifest of annotation records.
    #[arg(long)]
    input: PathBuf,
    /// Accepted records, verbatim and in input order.
    #[arg(long)]
    output: PathBuf,
    /// Also write the statistics JSON to this file (always printed on stdout).
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Per-record reports as JSONL.
    #[arg(long)]
    reports: Option<PathBuf>,
    #[arg(long, default_value_t = CurationConfig::default().min_side)]
    min_side: u32,
    #[arg(long, default_value_t = CurationConfig::default().person_score_floor)]
    person_score_floor: f64,
    #[arg(long, default_value_t = CurationConfig::default().distractor_score_floor)]
    distractor_score_floor: f64,
    #[arg(long, default_value_t = CurationConfig::default().face_score_floor)]
    face_score_floor: f64,
    #[arg(long, default_value_t = CurationConfig::default().min_joints)]
    min_joints: usize,
    #[arg(long, default_value_t = CurationConfig::default().joint_confidence)]
    joint_confidence: f64,
    #[arg(long, default_value_t = CurationConfig::default().max_occlusion)]
    max_occlusion: f64,
    #[arg(long, default_value_t = CurationConfig::default().min_clothing_coverage)]
    min_clothing_coverage: f64,
    #[arg(long, default_value_t = CurationConfig::default().min_clip_similarity)]
    min_clip_similarity: f64,
}

impl Curate {
    pub fn run(self) -> CmdResult {
        let cfg = CurationConfig {
            min_side: self.min_side,
            person_score_floor: self.person_score_floor,
            distractor_score_floor: self.distractor_score_floor,
            face_score_floor: self.face_score_floor,
            min_joints: self.min_joints,
            joint_confidence: self.joint_confidence,
            max_occlusion: self.max_occlusion,
            min_clothing_coverage: self.min_clothing_coverage,
            min_clip_similarity: self.min_clip_similarity,
        };
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |e: std::io::Error| Error::Io { path, source: e }
        };
        let input = BufReader::new(File::open(&self.input).map_err(io_err(&self.input))?);
        let output = BufWriter::new(File::create(&self.output).map_err(io_err(&self.output))?);
        let mut reports = match &self.reports {
            Some(p) => Some(BufWriter::new(File::create(p).map_err(io_err(p))?)),
            None => None,
        };
        let mut report_err = None;
        let stats = curate_manifest(input, &cfg, output, |r| {
            if let Some(w) = reports.as_mut() {
                let line = serde_json::to_string(r).expect("report serializes");
                if let Err(e) = writeln!(w, "{line}") {
                    report_err.get_or_insert(e);
                }
            }
        })?;
        if let (Some(e), Some(p)) = (report_err, &self.reports) {
            return Err(io_err(p)(e).into());
        }
        if let (Some(w), Some(p)) = (reports.as_mut(), &self.reports) {
            w.flush().map_err(io_err(p))?;
        }
        let v = serde_json::to_value(&stats).expect("stats serialize");
        if let Some(p) = &self.stats {
            write_json(p, &v)?;
        }
        print_json(&v);
        Ok(())
    }
}
