//! The training loop.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::config::TrainConfig;
use super::densify::{densify_and_prune, DensifyParams, DensifyPlan, GradStats};
use super::loss::{total_loss, LossWeights, Perceptual};
use super::model::AvatarModel;
use super::schedule::{is_densify_step, position_lr, sh_schedule};
use crate::avatar::laplacian::laplacian_loss_with_grad;
use crate::avatar::{skin_vertices, Adjacency, BodyTemplate, PoseParams};
use crate::error::{Error, Result};
use crate::image_io::{ImageBuffer, Mask};
use crate::splat::{render, Camera, SH_COEFFS};

/// One training view.
#[derive(Clone, Debug)]
pub struct FrameSample {
    pub image: ImageBuffer,
    pub mask: Mask,
    pub camera: Camera,
    pub pose: PoseParams,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterLog {
    pub iteration: usize,
    pub total: f64,
    pub rgb: f64,
    pub ssim: f64,
    pub perceptual: f64,
    pub laplacian: f64,
    pub n_gaussians: usize,
    pub sh_degree: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensifyEvent {
    pub iteration: usize,
    pub before: usize,
    pub pruned: usize,
    pub cloned: usize,
    pub after: usize,
    /// Smallest opacity left after the pass (1 for an empty set).
    pub min_opacity: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: AvatarModel,
    pub log: Vec<IterLog>,
    pub events: Vec<DensifyEvent>,
}

struct Optimizer {
    positions: AdamState,
    scales: AdamState,
    features: AdamState,
    opacities: AdamState,
    net: AdamState,
}

impl Optimizer {
    fn new(n: usize, net_params: usize) -> Self {
        Self {
            positions: AdamState::new(3 * n),
            scales: AdamState::new(n),
            features: AdamState::new(3 * SH_COEFFS * n),
            opacities: AdamState::new(n),
            net: AdamState::new(net_params),
        }
    }

    fn remap(&mut self, plan: &DensifyPlan) {
        let clones = plan.cloned_from.len();
        for (s, width) in [
            (&mut self.positions, 3),
            (&mut self.scales, 1),
            (&mut self.features, 3 * SH_COEFFS),
            (&mut self.opacities, 1),
        ] {
            s.retain_rows(&plan.keep, width);
            s.push_zero_rows(clones, width);
        }
    }
}

fn validate_frames(frames: &[FrameSample], joints: usize) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::input("training needs at least one frame"));
    }
    for (i, f) in frames.iter().enumerate() {
        f.camera.validate()?;
        let size = (f.camera.width, f.camera.height);
        if (f.image.width, f.image.height) != size || (f.mask.width, f.mask.height) != size {
            return Err(Error::input(format!("frame {i}: image, mask and camera sizes disagree")));
        }
        f.pose.validate(joints)?;
    }
    Ok(())
}

fn step_vectors(values: &mut [Vector3<f64>], grads: &[Vector3<f64>], state: &mut AdamState, lr: f64) {
    let mut p: Vec<f64> = values.iter().flat_map(|v| v.iter().copied()).collect();
    let g: Vec<f64> = grads.iter().flat_map(|v| v.iter().copied()).collect();
    adam_step(&mut p, &g, state, lr);
    for (v, c) in values.iter_mut().zip(p.chunks_exact(3)) {
        *v = Vector3::new(c[0], c[1], c[2]);
    }
}

/// Fits the avatar to `frames`. Deterministic for a given configuration.
pub fn train(
    frames: &[FrameSample],
    template: &BodyTemplate,
    cfg: &TrainConfig,
    perceptual: &dyn Perceptual,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    validate_frames(frames, template.joint_count())?;
    let iterations = cfg.iterations_for(frames.len());
    let mut model = AvatarModel::initialize(template, &frames[0].pose.shape, cfg.seed)?;
    model.config_echo = cfg.to_kv();
    let nv = template.vertex_count();
    let adj = Adjacency::new(nv, &template.edges)?;
    let max_count = (cfg.max_gaussians_factor * nv as f64).floor() as usize;
    let weights = LossWeights {
        rgb: cfg.lambda_rgb,
        ssim: cfg.lambda_ssim,
        perceptual: cfg.lambda_perc,
    };

    // Original per-vertex Gaussians carry the Laplacian term; clones do not.
    let mut primary = vec![true; nv];
    let mut opt = Optimizer::new(nv, model.net.params.len());
    let mut stats = GradStats::new(nv);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = Vec::new();
    let mut log = Vec::with_capacity(iterations);
    let mut events = Vec::new();

    for t in 0..iterations {
        if order.is_empty() {
            order = (0..frames.len()).collect();
            order.shuffle(&mut rng);
        }
        let frame = &frames[order.pop().unwrap()];
        let degree = sh_schedule(t, iterations);
        let posed = model.pose(&frame.pose)?;
        let rendered = render(&posed.gaussians, &frame.camera, degree);
        let (parts, grad_image) = total_loss(&rendered.image, &frame.image, &frame.mask, &weights, perceptual);

        let n = model.gaussians.len();
        let mut grad_posed = vec![Vector3::zeros(); n];
        let mut lap = 0.0;
        if cfg.lambda_lap > 0.0 {
            let reference = skin_vertices(template, &frame.pose.shape, &posed.transforms);
            let mut deformed = reference.clone();
            for i in 0..n {
                if primary[i] {
                    deformed[model.anchors[i] as usize] = posed.gaussians.positions[i];
                }
            }
            let (l, g) = laplacian_loss_with_grad(&adj, &reference, &deformed);
            lap = l;
            for i in 0..n {
                if primary[i] {
                    grad_posed[i] = g[model.anchors[i] as usize] * cfg.lambda_lap;
                }
            }
        }
        let total = parts.total + cfg.lambda_lap * lap;
        if !total.is_finite() {
            return Err(Error::numerical(format!("non-finite loss {total} at iteration {t}")));
        }

        let grads = rendered.backward(&posed.gaussians, &frame.camera, &grad_image);
        let mut grad_offsets = vec![Vector3::zeros(); nv];
        let mut grad_pos = vec![Vector3::zeros(); n];
        let (half_w, half_h) = (0.5 * frame.camera.width as f64, 0.5 * frame.camera.height as f64);
        for i in 0..n {
            let a = model.anchors[i] as usize;
            let gp = grad_posed[i] + grads.positions[i];
            grad_offsets[a] += gp;
            grad_pos[i] = posed.vertex_linear[a].transpose() * gp;
            if grads.visible[i] {
                let [gx, gy] = grads.mean2d[i];
                stats.record(i, (gx * half_w).hypot(gy * half_h), &grad_pos[i]);
            }
        }
        let mut grad_net = vec![0.0; model.net.params.len()];
        model.net.backward(&posed.tape, &grad_offsets, &mut grad_net);

        let g = &mut model.gaussians;
        let lr_pos = position_lr(t, cfg.lr_position_init, cfg.lr_position_final, cfg.lr_position_steps);
        step_vectors(&mut g.positions, &grad_pos, &mut opt.positions, lr_pos);
        adam_step(&mut g.log_scales, &grads.log_scales, &mut opt.scales, cfg.lr_scale);
        adam_step(&mut g.opacity_logits, &grads.opacity_logits, &mut opt.opacities, cfg.lr_opacity);
        {
            let mut p: Vec<f64> = g.sh_coeffs.iter().flatten().flatten().copied().collect();
            let gs: Vec<f64> = grads.sh_coeffs.iter().flatten().flatten().copied().collect();
            adam_step(&mut p, &gs, &mut opt.features, cfg.lr_feature);
            for (sh, chunk) in g.sh_coeffs.iter_mut().zip(p.chunks_exact(3 * SH_COEFFS)) {
                for (k, row) in sh.iter_mut().enumerate() {
                    row.copy_from_slice(&chunk[3 * k..3 * k + 3]);
                }
            }
        }
        adam_step(&mut model.net.params, &grad_net, &mut opt.net, cfg.lr_net);

        if is_densify_step(t, cfg.densify_start, cfg.densify_end, cfg.densify_interval) {
            let before = model.gaussians.len();
            let params = DensifyParams {
                grad_threshold: cfg.densify_grad_threshold,
                prune_opacity: cfg.prune_opacity,
                max_count,
            };
            let (next, plan) = densify_and_prune(&model.gaussians, &stats, &params);
            model.gaussians = next;
            model.anchors = plan.apply(&model.anchors);
            primary = plan.apply(&primary);
            let survivors = before - plan.pruned();
            primary[survivors..].fill(false);
            opt.remap(&plan);
            stats = GradStats::new(model.gaussians.len());
            let min_opacity = (0..model.gaussians.len())
                .map(|i| model.gaussians.opacity(i))
                .fold(1.0, f64::min);
            events.push(DensifyEvent {
                iteration: t,
                before,
                pruned: plan.pruned(),
                cloned: plan.cloned_from.len(),
                after: model.gaussians.len(),
                min_opacity,
            });
        }

        log.push(IterLog {
            iteration: t,
            total,
            rgb: parts.rgb,
            ssim: parts.ssim,
            perceptual: parts.perceptual,
            laplacian: lap,
            n_gaussians: model.gaussians.len(),
            sh_degree: degree,
        });
    }
    Ok(TrainOutcome { model, log, events })
}

pub const LOSS_CSV_HEADER: &str = "iteration,total,rgb,ssim,perceptual,n_gaussians,sh_degree";

pub fn loss_csv(log: &[IterLog]) -> String {
    let mut s = String::from(LOSS_CSV_HEADER);
    s.push('\n');
    for l in log {
        writeln!(
            s,
            "{},{:?},{:?},{:?},{:?},{},{}",
            l.iteration, l.total, l.rgb, l.ssim, l.perceptual, l.n_gaussians, l.sh_degree
        )
        .unwrap();
    }
    s
}

pub fn write_loss_csv(log: &[IterLog], path: &Path) -> Result<()> {
    std::fs::write(path, loss_csv(log)).map_err(|e| Error::io(path, e))
}
