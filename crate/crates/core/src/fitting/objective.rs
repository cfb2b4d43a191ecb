//! Keypoint reprojection, prior and temporal terms with analytic gradients.

use nalgebra::Vector3;

use super::keypoints::{keypoint_attachments, project_point, projection_jacobian};
use crate::avatar::{BodyTemplate, PoseParams, PosedSkeleton, NUM_SHAPE};
use crate::error::Result;
use crate::pose_tools::Skeleton2D;
use crate::splat::Camera;

/// Cost per unit confidence of a keypoint whose 3D point is behind the near plane.
/// It carries no gradient.
pub const BEHIND_PENALTY: f64 = 1e6;

/// `Σᵢ cᵢ‖Π(Kᵢ) − kᵢ‖²`, accumulating `scale·∂/∂params` into `grad` when given.
pub fn kpt_loss_with_grad(
    t: &BodyTemplate,
    p: &PoseParams,
    obs: &Skeleton2D,
    cam: &Camera,
    scale: f64,
    grad: Option<&mut [f64]>,
) -> Result<f64> {
    let sk = PosedSkeleton::new(t, p)?;
    let mut loss = 0.0;
    let mut grad = grad;
    for (i, a) in keypoint_attachments().iter().enumerate() {
        let c = obs.confidence(i);
        if c == 0.0 {
            continue;
        }
        let x = sk.position(a);
        let q = project_point(cam, &x);
        if q[0].is_nan() {
            loss += BEHIND_PENALTY * c;
            continue;
        }
        let k = obs.point(i);
        let r = [q[0] - k[0], q[1] - k[1]];
        loss += c * (r[0] * r[0] + r[1] * r[1]);
        if let Some(g) = grad.as_deref_mut() {
            let jac = projection_jacobian(cam, &x);
            let gx: Vector3<f64> = jac.transpose() * nalgebra::Vector2::new(r[0], r[1]) * (2.0 * c * scale);
            sk.backward(t, p, a, &gx, g);
        }
    }
    Ok(loss)
}

pub fn kpt_loss(t: &BodyTemplate, p: &PoseParams, obs: &Skeleton2D, cam: &Camera) -> Result<f64> {
    kpt_loss_with_grad(t, p, obs, cam, 1.0, None)
}

/// `‖β‖² + Σⱼ‖θⱼ‖²` (prior mean is the zero pose).
pub fn reg_loss(p: &PoseParams) -> f64 {
    p.shape.iter().map(|b| b * b).sum::<f64>() + p.joint_rotations.iter().map(|r| r.norm_squared()).sum::<f64>()
}

fn reg_grad(p: &PoseParams, scale: f64, grad: &mut [f64]) {
    let nj = p.joint_rotations.len();
    for (j, r) in p.joint_rotations.iter().enumerate() {
        for k in 0..3 {
            grad[3 * j + k] += 2.0 * scale * r[k];
        }
    }
    for (k, b) in p.shape.iter().enumerate() {
        grad[3 * nj + 3 + k] += 2.0 * scale * b;
    }
}

/// `Σₜ ‖θₜ − θₜ₊₁‖² + ‖βₜ − βₜ₊₁‖²`.
pub fn temp_loss(seq: &[PoseParams]) -> f64 {
    seq.windows(2)
        .map(|w| {
            let dr: f64 = w[0]
                .joint_rotations
                .iter()
                .zip(&w[1].joint_rotations)
                .map(|(a, b)| (a - b).norm_squared())
                .sum();
            let ds: f64 = w[0].shape.iter().zip(&w[1].shape).map(|(a, b)| (a - b) * (a - b)).sum();
            dr + ds
        })
        .sum()
}

/// Loss weights, iteration counts and step size of the two-stage fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitWeights {
    pub kpt: f64,
    pub reg: f64,
    pub temp: f64,
    pub stage1_iters: usize,
    pub stage2_iters: usize,
    pub lr: f64,
    /// Root translation steps are this multiple of `lr` (a reparameterization of
    /// translation in larger units).
    pub translation_scale: f64,
    /// Apply Savitzky-Golay smoothing to the fitted sequence.
    pub smooth: bool,
}

impl Default for FitWeights {
    fn default() -> Self {
        Self {
            kpt: 1.0,
            reg: 0.001,
            temp: 0.1,
            stage1_iters: 100,
            stage2_iters: 200,
            lr: 1e-3,
            translation_scale: 20.0,
            smooth: true,
        }
    }
}

/// Per-frame observations and cameras.
#[derive(Clone, Debug)]
pub struct FitSequence {
    pub observations: Vec<Skeleton2D>,
    pub cameras: Vec<Camera>,
}

/// Weighted objective over the sequence; `grad` (if given) has one
/// [`PoseParams::to_flat`] block per frame.
pub fn objective(
    seq: &FitSequence,
    t: &BodyTemplate,
    params: &[PoseParams],
    w: &FitWeights,
    mut grad: Option<&mut [f64]>,
) -> Result<f64> {
    let nj = t.joint_count();
    let block = PoseParams::flat_len(nj);
    let mut total = 0.0;
    for (f, p) in params.iter().enumerate() {
        let g = grad.as_deref_mut().map(|g| &mut g[f * block..(f + 1) * block]);
        total += w.kpt * kpt_loss_with_grad(t, p, &seq.observations[f], &seq.cameras[f], w.kpt, g)?;
        total += w.reg * reg_loss(p);
        if let Some(g) = grad.as_deref_mut() {
            reg_grad(p, w.reg, &mut g[f * block..(f + 1) * block]);
        }
    }
    total += w.temp * temp_loss(params);
    if let Some(g) = grad {
        for f in 0..params.len().saturating_sub(1) {
            let (a, b) = (&params[f], &params[f + 1]);
            for j in 0..nj {
                let d = (a.joint_rotations[j] - b.joint_rotations[j]) * (2.0 * w.temp);
                for k in 0..3 {
                    g[f * block + 3 * j + k] += d[k];
                    g[(f + 1) * block + 3 * j + k] -= d[k];
                }
            }
            for k in 0..NUM_SHAPE {
                let d = 2.0 * w.temp * (a.shape[k] - b.shape[k]);
                g[f * block + 3 * nj + 3 + k] += d;
                g[(f + 1) * block + 3 * nj + 3 + k] -= d;
            }
        }
    }
    Ok(total)
}
