//! Two-stage sequence fit and post-fit smoothing.

use nalgebra::{Vector3, Vector4};

use super::objective::{kpt_loss, objective, FitSequence, FitWeights};
use crate::avatar::rotation::{axis_angle_to_quat, quat_to_axis_angle};
use crate::avatar::{BodyTemplate, PoseParams, NUM_SHAPE};
use crate::error::{Error, Result};
use crate::pose_tools::{momentum_smooth, momentum_smooth_quats, savgol, savgol_quats};
use crate::trainer::adam::{adam_step, AdamState};

pub const SMOOTH_WINDOW: usize = 9;
pub const SMOOTH_ORDER: usize = 2;

#[derive(Clone, Debug)]
pub struct FitResult {
    /// Optimizer output before smoothing.
    pub raw: Vec<PoseParams>,
    /// Smoothed sequence (equal to `raw` when smoothing is off).
    pub params: Vec<PoseParams>,
    /// Objective after each iteration of both stages.
    pub history: Vec<f64>,
    /// Mean per-frame `λ_kpt · L_kpt` of `raw`.
    pub final_kpt_loss: f64,
}

/// Which flat entries a stage optimizes, split by step size.
fn stage_indices(nj: usize, frames: usize, root_only: bool) -> (Vec<usize>, Vec<usize>) {
    let block = PoseParams::flat_len(nj);
    let mut regular = Vec::new();
    let mut translation = Vec::new();
    for f in 0..frames {
        let o = f * block;
        let rot_end = if root_only { 3 } else { 3 * nj };
        regular.extend(o..o + rot_end);
        translation.extend(o + 3 * nj..o + 3 * nj + 3);
        if !root_only {
            regular.extend(o + 3 * nj + 3..o + 3 * nj + 3 + NUM_SHAPE);
        }
    }
    (regular, translation)
}

/// Stage 1 moves only root rotation and translation; stage 2 moves everything.
/// The temporal term couples the frames, so the whole sequence is solved jointly.
pub fn fit(seq: &FitSequence, t: &BodyTemplate, init: &[PoseParams], w: &FitWeights) -> Result<FitResult> {
    let frames = seq.observations.len();
    if frames == 0 || seq.cameras.len() != frames || init.len() != frames {
        return Err(Error::input("fit needs matching, non-empty observation, camera and initial pose lists"));
    }
    for (i, obs) in seq.observations.iter().enumerate() {
        obs.validate()?;
        if obs.keypoints.iter().all(|k| k[2] == 0.0) {
            return Err(Error::input(format!("frame {i} has no confident keypoint")));
        }
    }
    let nj = t.joint_count();
    let block = PoseParams::flat_len(nj);
    let unflatten = |x: &[f64]| -> Vec<PoseParams> { x.chunks(block).map(|c| PoseParams::from_flat(c, nj)).collect() };
    let mut x: Vec<f64> = init.iter().flat_map(|p| p.to_flat()).collect();
    let initial = objective(seq, t, init, w, None)?;
    let limit = 1e6 * initial.max(f64::MIN_POSITIVE);
    let mut history = Vec::with_capacity(w.stage1_iters + w.stage2_iters);

    for (iters, root_only) in [(w.stage1_iters, true), (w.stage2_iters, false)] {
        let (regular, translation) = stage_indices(nj, frames, root_only);
        let mut s_reg = AdamState::new(regular.len());
        let mut s_tr = AdamState::new(translation.len());
        for _ in 0..iters {
            let mut grad = vec![0.0; x.len()];
            objective(seq, t, &unflatten(&x), w, Some(&mut grad))?;
            for (idx, state, lr) in [
                (&regular, &mut s_reg, w.lr),
                (&translation, &mut s_tr, w.lr * w.translation_scale),
            ] {
                let mut p: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
                let g: Vec<f64> = idx.iter().map(|&i| grad[i]).collect();
                adam_step(&mut p, &g, state, lr);
                for (&i, v) in idx.iter().zip(p) {
                    x[i] = v;
                }
            }
            let value = objective(seq, t, &unflatten(&x), w, None)?;
            if !value.is_finite() || value > limit {
                return Err(Error::numerical(format!("fit diverged: objective {value} from initial {initial}")));
            }
            history.push(value);
        }
    }

    let raw = unflatten(&x);
    let mut kpt = 0.0;
    for (f, p) in raw.iter().enumerate() {
        kpt += w.kpt * kpt_loss(t, p, &seq.observations[f], &seq.cameras[f])?;
    }
    let params = if w.smooth { smooth_params(&raw) } else { raw.clone() };
    Ok(FitResult {
        final_kpt_loss: kpt / frames as f64,
        raw,
        params,
        history,
    })
}

/// Savitzky-Golay (window 9, order 2) on translations and shapes, and on joint
/// rotations in quaternion form after sign continuity.
pub fn smooth_params(seq: &[PoseParams]) -> Vec<PoseParams> {
    smooth_params_with(seq, SMOOTH_WINDOW, SMOOTH_ORDER)
}

pub fn smooth_params_with(seq: &[PoseParams], window: usize, order: usize) -> Vec<PoseParams> {
    let scalar = |s: &[f64]| savgol(s, window, order);
    smooth_each(seq, &|q| savgol_quats(q, window, order), &scalar, &scalar)
}

/// Exponential smoothing with separate coefficients for rotations (as
/// quaternions), root translation and shape.
pub fn momentum_params(seq: &[PoseParams], alpha_rotation: f64, alpha_translation: f64, alpha_shape: f64) -> Vec<PoseParams> {
    let scalar = |alpha: f64| {
        move |s: &[f64]| -> Vec<f64> {
            let rows: Vec<Vec<f64>> = s.iter().map(|v| vec![*v]).collect();
            momentum_smooth(&rows, alpha).into_iter().map(|r| r[0]).collect()
        }
    };
    smooth_each(seq, &|q| momentum_smooth_quats(q, alpha_rotation), &scalar(alpha_translation), &scalar(alpha_shape))
}

type QuatFilter<'a> = &'a dyn Fn(&[Vector4<f64>]) -> Vec<Vector4<f64>>;
type ScalarFilter<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

fn smooth_each(seq: &[PoseParams], rotation: QuatFilter, translation: ScalarFilter, shape: ScalarFilter) -> Vec<PoseParams> {
    if seq.is_empty() {
        return Vec::new();
    }
    let nj = seq[0].joint_rotations.len();
    let mut out = seq.to_vec();
    for j in 0..nj {
        let quats: Vec<_> = seq.iter().map(|p| axis_angle_to_quat(&p.joint_rotations[j])).collect();
        let smoothed = rotation(&quats);
        let mut prev: Option<Vector3<f64>> = None;
        for (p, q) in out.iter_mut().zip(smoothed) {
            let mut v = quat_to_axis_angle(&q);
            // keep the axis-angle branch continuous across the ±π wrap
            if let Some(pr) = prev {
                let th = v.norm();
                if th > 1e-9 {
                    let alt = v * (1.0 - 2.0 * std::f64::consts::PI / th);
                    if (alt - pr).norm() < (v - pr).norm() {
                        v = alt;
                    }
                }
            }
            p.joint_rotations[j] = v;
            prev = Some(v);
        }
    }
    for k in 0..3 {
        let s = translation(&seq.iter().map(|p| p.root_translation[k]).collect::<Vec<_>>());
        for (p, v) in out.iter_mut().zip(s) {
            p.root_translation[k] = v;
        }
    }
    for k in 0..NUM_SHAPE {
        let s = shape(&seq.iter().map(|p| p.shape[k]).collect::<Vec<_>>());
        for (p, v) in out.iter_mut().zip(s) {
            p.shape[k] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avatar::rotation::rodrigues;
    use crate::avatar::{capsule_human, CapsuleParams};
    use crate::fitting::keypoints::project_keypoints;
    use crate::pose_tools::Skeleton2D;
    use crate::splat::Camera;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(frames: usize, seed: u64) -> (BodyTemplate, FitSequence, Vec<PoseParams>) {
        let t = capsule_human(&CapsuleParams { spacing: 0.12, ..Default::default() });
        let cam = Camera::looking_at_origin(128, 128, 180.0, 3.0, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth: Vec<PoseParams> = (0..frames)
            .map(|f| {
                let mut p = PoseParams::zero(16);
                p.joint_rotations[0] = Vector3::new(0.0, 0.3 * f as f64, 0.0);
                for j in 1..16 {
                    p.joint_rotations[j] = Vector3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
                }
                p
            })
            .collect();
        let seq = FitSequence {
            observations: truth
                .iter()
                .map(|p| Skeleton2D::new(project_keypoints(p, &t, &cam).unwrap().iter().map(|q| [q[0], q[1], 1.0]).collect()))
                .collect(),
            cameras: vec![cam; frames],
        };
        (t, seq, truth)
    }

    #[test]
    fn truth_is_a_fixed_point() {
        let (t, seq, truth) = setup(4, 1);
        let w = FitWeights {
            reg: 0.0,
            temp: 0.0,
            smooth: false,
            ..Default::default()
        };
        let r = fit(&seq, &t, &truth, &w).unwrap();
        assert!(r.final_kpt_loss < 1e-12);
        for (a, b) in r.raw.iter().zip(&truth) {
            let d = a.to_flat().iter().zip(b.to_flat()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(d < 1e-6, "drift {d}");
        }
    }

    #[test]
    fn stage_one_recovers_translation() {
        let (t, seq, truth) = setup(3, 2);
        let mut init = truth.clone();
        for p in init.iter_mut() {
            p.root_translation += Vector3::new(0.3, 0.0, 0.0);
        }
        let w = FitWeights {
            stage2_iters: 0,
            smooth: false,
            ..Default::default()
        };
        let r = fit(&seq, &t, &init, &w).unwrap();
        for (a, b) in r.raw.iter().zip(&truth) {
            assert!((a.root_translation - b.root_translation).norm() < 1e-2);
        }
    }

    #[test]
    fn smoothing_keeps_slow_rotation() {
        let seq: Vec<PoseParams> = (0..30)
            .map(|f| {
                let mut p = PoseParams::zero(16);
                p.joint_rotations[0] = Vector3::new(0.0, 0.2 * f as f64, 0.0);
                p
            })
            .collect();
        let s = smooth_params(&seq);
        for (a, b) in s.iter().zip(&seq) {
            let d = rodrigues(&a.joint_rotations[0]) - rodrigues(&b.joint_rotations[0]);
            assert!(d.norm() < 5e-3, "{}", d.norm());
        }
    }

    #[test]
    fn empty_observation_is_rejected() {
        let (t, mut seq, truth) = setup(2, 3);
        for k in seq.observations[1].keypoints.iter_mut() {
            k[2] = 0.0;
        }
        assert!(fit(&seq, &t, &truth, &FitWeights::default()).is_err());
    }
}
