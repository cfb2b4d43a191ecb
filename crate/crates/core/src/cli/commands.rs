//! One function per subcommand. Each returns the lines it reports on stdout.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{AlignConfig, DemoConfig, FitConfig, FuseConfig, RenderConfig, SmoothConfig, SmoothMethod};
use crate::avatar::PoseParams;
use crate::diffusion::convergence_table;
use crate::error::{Error, Result};
use crate::fitting::{fit, momentum_params, smooth_params_with, FitSequence};
use crate::fusion::{fuse_face, FuseStatus, LandmarkSet};
use crate::image_io::ImageBuffer;
use crate::pose_tools::{apply_scales, compute_scales, read_skeletons, write_skeletons, BodyPartScales, PARTS};
use crate::splat::{psnr, render, ssim};
use crate::synth::dataset::{frame_name, write_jsonl, PoseRecord};
use crate::synth::{generate_dataset, read_cameras, read_dataset, read_poses, read_template, SynthConfig};
use crate::trainer::{train, write_loss_csv, AvatarModel, PooledL1, TrainConfig};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const LOSS_FILE: &str = "loss.csv";
pub const DENSIFY_FILE: &str = "densify.csv";

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

fn write_text(p: &Path, s: &str) -> Result<()> {
    std::fs::write(p, s).map_err(|e| Error::io(p, e))
}

fn pose_records(poses: &[PoseParams]) -> Vec<PoseRecord> {
    poses
        .iter()
        .enumerate()
        .map(|(frame, pose)| PoseRecord { frame, pose: pose.clone() })
        .collect()
}

pub fn synth(cfg: &SynthConfig, out: &Path) -> Result<String> {
    generate_dataset(out, cfg)?;
    Ok(format!("wrote {} training and {} held-out views to {}\n", cfg.frames, cfg.heldout, out.display()))
}

fn format_scales(s: &BodyPartScales) -> String {
    let mut out = String::new();
    for (i, part) in PARTS.iter().enumerate() {
        let flag = if s.degenerate[i] {
            " (degenerate)"
        } else if !s.defined[i] {
            " (fallback)"
        } else {
            ""
        };
        writeln!(out, "scale {} = {:?}{flag}", part.name(), s.values[i]).unwrap();
    }
    out
}

/// Rescales source skeletons to the reference body proportions.
pub fn align_pose(cfg: &AlignConfig, reference: &Path, source: &Path, out: &Path) -> Result<String> {
    let refs = read_skeletons(reference)?;
    let srcs = read_skeletons(source)?;
    let (Some((_, r)), Some((_, s0))) = (refs.first(), srcs.first()) else {
        return Err(Error::input("reference and source need at least one skeleton each"));
    };
    let once = compute_scales(r, s0);
    let aligned: Vec<_> = srcs
        .iter()
        .map(|(f, s)| {
            let scales = if cfg.per_frame { compute_scales(r, s) } else { once.clone() };
            (*f, apply_scales(s, &scales))
        })
        .collect();
    write_skeletons(out, &aligned)?;
    let mut report = if cfg.per_frame { String::from("scales of the first frame:\n") } else { String::new() };
    report.push_str(&format_scales(&once));
    writeln!(report, "aligned {} frames", aligned.len()).unwrap();
    Ok(report)
}

pub fn smooth(cfg: &SmoothConfig, input: &Path, out: &Path) -> Result<String> {
    let poses = read_poses(input)?;
    let joints = poses.first().map_or(0, |p| p.joint_rotations.len());
    for p in &poses {
        p.validate(joints)?;
    }
    let smoothed = match cfg.method {
        SmoothMethod::Savgol => smooth_params_with(&poses, cfg.window, cfg.order),
        SmoothMethod::Momentum => momentum_params(&poses, cfg.alpha_rotation, cfg.alpha_translation, cfg.alpha_shape),
    };
    write_jsonl(out, &pose_records(&smoothed))?;
    Ok(format!("smoothed {} frames\n", smoothed.len()))
}

pub struct FusePaths<'a> {
    pub src: &'a Path,
    pub dst: &'a Path,
    pub landmarks_src: &'a Path,
    pub landmarks_dst: &'a Path,
    pub out: &'a Path,
    pub mask_out: Option<&'a Path>,
}

/// Blends `src` (the rendered head) into `dst` (the frame) when the landmarks agree.
pub fn fuse(cfg: &FuseConfig, p: &FusePaths) -> Result<String> {
    let src = ImageBuffer::from_png(p.src)?;
    let dst = ImageBuffer::from_png(p.dst)?;
    let l_src = LandmarkSet::load(p.landmarks_src)?;
    let l_dst = LandmarkSet::load(p.landmarks_dst)?;
    let outcome = fuse_face(&dst, &src, &l_dst, &l_src, cfg.threshold)?;
    outcome.image.save_png(p.out)?;
    if let (Some(path), Some(mask)) = (p.mask_out, &outcome.mask) {
        mask.save_png(path)?;
    }
    Ok(match outcome.status {
        FuseStatus::Fused { disparity } => format!("fused (disparity {disparity:.6})\n"),
        FuseStatus::Gated { disparity } => format!("skipped: disparity {disparity:.6} not below {}\n", cfg.threshold),
        FuseStatus::NotFrontFacing => "skipped: no eye group confidently detected\n".to_string(),
        FuseStatus::Degenerate => "skipped: degenerate landmarks\n".to_string(),
    })
}

/// Fits body parameters to the dataset keypoints, starting from its poses
/// (optionally perturbed) in place of a learned initializer.
pub fn fit_cmd(cfg: &FitConfig, data: &Path, out: &Path) -> Result<String> {
    let template = read_template(&data.join("template.mesh"))?;
    let mut obs: Vec<_> = read_skeletons(&data.join("keypoints.jsonl"))?.into_iter().map(|(_, s)| s).collect();
    let mut cameras = read_cameras(&data.join("cameras.jsonl"))?;
    let mut init = read_poses(&data.join("poses.jsonl"))?;
    if obs.len() != cameras.len() || obs.len() != init.len() {
        return Err(Error::input("keypoints, cameras and poses have different frame counts"));
    }
    if cfg.frames > 0 {
        let n = cfg.frames.min(obs.len());
        obs.truncate(n);
        cameras.truncate(n);
        init.truncate(n);
    }
    if cfg.init_noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = Normal::new(0.0, cfg.init_noise).expect("positive std");
        for p in &mut init {
            for r in &mut p.joint_rotations {
                *r += Vector3::from_fn(|_, _| n.sample(&mut rng));
            }
            p.root_translation += Vector3::from_fn(|_, _| n.sample(&mut rng));
        }
    }
    let seq = FitSequence { observations: obs, cameras };
    let result = fit(&seq, &template, &init, &cfg.weights)?;
    write_jsonl(out, &pose_records(&result.params))?;
    Ok(format!(
        "fitted {} frames, final keypoint loss {:?}\n",
        result.params.len(),
        result.final_kpt_loss
    ))
}

/// Trains an avatar; `poses` replaces the dataset poses (for example with fitted ones).
pub fn train_cmd(cfg: &TrainConfig, data: &Path, poses: Option<&Path>, out: &Path) -> Result<String> {
    let ds = read_dataset(data)?;
    let mut samples = ds.samples;
    if let Some(path) = poses {
        let fitted = read_poses(path)?;
        if fitted.len() != samples.len() {
            return Err(Error::input(format!("{} poses for {} frames", fitted.len(), samples.len())));
        }
        for (s, p) in samples.iter_mut().zip(fitted) {
            s.pose = p;
        }
    }
    let template = read_template(&data.join("template.mesh"))?;
    let outcome = train(&samples, &template, cfg, &PooledL1::default())?;
    create_dir(out)?;
    outcome.model.save(&out.join(CHECKPOINT_FILE))?;
    write_loss_csv(&outcome.log, &out.join(LOSS_FILE))?;
    let mut events = String::from("iteration,before,pruned,cloned,after,min_opacity\n");
    for e in &outcome.events {
        writeln!(events, "{},{},{},{},{},{:?}", e.iteration, e.before, e.pruned, e.cloned, e.after, e.min_opacity).unwrap();
    }
    write_text(&out.join(DENSIFY_FILE), &events)?;
    let last = outcome.log.last().ok_or_else(|| Error::numerical("training ran no iterations"))?;
    Ok(format!(
        "trained {} iterations, final loss {:?}, {} gaussians\n",
        outcome.log.len(),
        last.total,
        last.n_gaussians
    ))
}

pub fn render_cmd(cfg: &RenderConfig, checkpoint: &Path, poses: &Path, cameras: &Path, out: &Path) -> Result<String> {
    let model = AvatarModel::load(checkpoint)?;
    let poses = read_poses(poses)?;
    let cameras = read_cameras(cameras)?;
    if poses.len() != cameras.len() {
        return Err(Error::input(format!("{} poses but {} cameras", poses.len(), cameras.len())));
    }
    create_dir(out)?;
    for (i, (p, c)) in poses.iter().zip(&cameras).enumerate() {
        let posed = model.pose(p)?;
        render(&posed.gaussians, c, cfg.sh_degree).image.save_png(out.join(frame_name(i)))?;
    }
    Ok(format!("rendered {} views to {}\n", poses.len(), out.display()))
}

fn png_names(dir: &Path) -> Result<Vec<String>> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".png"))
        .collect();
    names.sort();
    Ok(names)
}

fn fmt_metric(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

/// PSNR and SSIM of each prediction against the same-named ground-truth PNG.
pub fn eval_cmd(pred: &Path, gt: &Path, out: &Path) -> Result<String> {
    let names = png_names(gt)?;
    if names.is_empty() {
        return Err(Error::input(format!("no PNG files in {}", gt.display())));
    }
    let mut csv = String::from("frame,psnr,ssim\n");
    let (mut ps, mut ss) = (0.0, 0.0);
    for n in &names {
        let a = ImageBuffer::from_png(pred.join(n))?;
        let b = ImageBuffer::from_png(gt.join(n))?;
        if !a.same_size(&b) {
            return Err(Error::input(format!("{n}: prediction and ground truth sizes differ")));
        }
        let (p, s) = (psnr(&a, &b), ssim(&a, &b));
        writeln!(csv, "{},{},{}", n.trim_end_matches(".png"), fmt_metric(p), fmt_metric(s)).unwrap();
        ps += p;
        ss += s;
    }
    let k = names.len() as f64;
    writeln!(csv, "mean,{},{}", fmt_metric(ps / k), fmt_metric(ss / k)).unwrap();
    write_text(out, &csv)?;
    Ok(format!("mean psnr {} dB, mean ssim {}\n", fmt_metric(ps / k), fmt_metric(ss / k)))
}

pub fn ddim_demo(cfg: &DemoConfig, out: &Path) -> Result<String> {
    let table = convergence_table(&cfg.steps, cfg.data_std, cfg.zero_snr, cfg.prediction, cfg.seed, cfg.batch)?;
    let mut csv = String::from("steps,error\n");
    for (s, e) in &table {
        writeln!(csv, "{s},{e:e}").unwrap();
    }
    write_text(out, &csv)?;
    Ok(csv)
}
