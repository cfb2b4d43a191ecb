//! Ground-truth turntable renders of a synthetic subject.

use nalgebra::Vector3;

use super::subject::SyntheticSubject;
use crate::avatar::{forward_kinematics, skin_vertices, PoseParams};
use crate::error::Result;
use crate::fitting::project_keypoints;
use crate::image_io::{ImageBuffer, Mask};
use crate::pose_tools::Skeleton2D;
use crate::splat::sh::rgb_to_dc;
use crate::splat::{logit, render, Camera, GaussianSet, SH_COEFFS};
use crate::trainer::model::INIT_SCALE_FACTOR;

/// Opacity of the ground-truth splats.
pub const GT_OPACITY: f64 = 0.99;

#[derive(Clone, Debug)]
pub struct SynthFrame {
    pub image: ImageBuffer,
    pub mask: Mask,
    pub camera: Camera,
    pub pose: PoseParams,
    pub keypoints: Skeleton2D,
    /// View depth per pixel, NaN off the mask.
    pub depth: Vec<f64>,
}

/// Turntable pose: arms out (the template's rest pose), body turned `angle` radians about +y.
pub fn turntable_pose(subject: &SyntheticSubject, angle: f64) -> PoseParams {
    let mut p = PoseParams::zero(subject.template.joint_count());
    p.joint_rotations[0] = Vector3::new(0.0, angle, 0.0);
    p.shape = subject.shape;
    p
}

/// One small nearly opaque splat per posed vertex, colored by albedo.
pub fn ground_truth_gaussians(subject: &SyntheticSubject, pose: &PoseParams) -> Result<GaussianSet> {
    let t = &subject.template;
    let tf = forward_kinematics(t, pose)?;
    let verts = skin_vertices(t, &pose.shape, &tf);
    let log_scale = (INIT_SCALE_FACTOR * t.mean_edge_length()).ln();
    let mut g = GaussianSet::default();
    for (v, c) in verts.iter().zip(&subject.albedo) {
        let mut sh = [[0.0; 3]; SH_COEFFS];
        sh[0] = c.map(rgb_to_dc);
        g.push(*v, log_scale, sh, logit(GT_OPACITY));
    }
    Ok(g)
}

pub fn render_frame(subject: &SyntheticSubject, pose: &PoseParams, camera: &Camera) -> Result<SynthFrame> {
    let g = ground_truth_gaussians(subject, pose)?;
    let r = render(&g, camera, 0);
    let mut mask = Mask::new(camera.width, camera.height);
    for (m, c) in mask.data.iter_mut().zip(&r.coverage) {
        *m = *c > 0.0;
    }
    let keypoints = Skeleton2D::new(
        project_keypoints(pose, &subject.template, camera)?
            .iter()
            .map(|q| if q[0].is_finite() { [q[0], q[1], 1.0] } else { [0.0, 0.0, 0.0] })
            .collect(),
    );
    Ok(SynthFrame {
        image: r.image,
        mask,
        camera: camera.clone(),
        pose: pose.clone(),
        keypoints,
        depth: r.depth,
    })
}

/// `n_frames` views of one full turn, frame `k` at angle `offset + 2πk/n_frames`.
/// Frames are rendered on parallel threads; the result does not depend on the thread count.
pub fn render_sequence(subject: &SyntheticSubject, n_frames: usize, camera: &Camera, offset: f64) -> Result<Vec<SynthFrame>> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(n_frames.max(1));
    let frame = |k: usize| {
        let angle = offset + std::f64::consts::TAU * k as f64 / n_frames as f64;
        render_frame(subject, &turntable_pose(subject, angle), camera)
    };
    let per_thread = n_frames.div_ceil(threads).max(1);
    let mut slots: Vec<Option<Result<SynthFrame>>> = (0..n_frames).map(|_| None).collect();
    std::thread::scope(|s| {
        for (t, chunk) in slots.chunks_mut(per_thread).enumerate() {
            let base = t * per_thread;
            let frame = &frame;
            s.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(frame(base + i));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every frame rendered")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avatar::CapsuleParams;
    use crate::synth::subject::{make_subject, SubjectParams};

    fn subject() -> SyntheticSubject {
        make_subject(
            5,
            &SubjectParams {
                body: CapsuleParams { spacing: 0.08, ..Default::default() },
                ..Default::default()
            },
        )
    }

    fn camera() -> Camera {
        Camera::looking_at_origin(64, 64, 90.0, 3.0, 0.9)
    }

    #[test]
    fn full_turn_wraps() {
        let s = subject();
        let a = render_frame(&s, &turntable_pose(&s, 0.0), &camera()).unwrap();
        let b = render_frame(&s, &turntable_pose(&s, std::f64::consts::TAU), &camera()).unwrap();
        // Rotating by 2π is not bit-exact, so near-equal depths may sort differently.
        assert!(crate::splat::psnr(&a.image, &b.image) > 50.0);
    }

    #[test]
    fn ground_truth_is_self_consistent() {
        let s = subject();
        let frames = render_sequence(&s, 3, &camera(), 0.3).unwrap();
        for f in &frames {
            assert!(!f.mask.is_empty());
            for (m, d) in f.mask.data.iter().zip(&f.depth) {
                assert_eq!(*m, d.is_finite());
            }
            let kp = project_keypoints(&f.pose, &s.template, &f.camera).unwrap();
            for (a, b) in kp.iter().zip(&f.keypoints.keypoints) {
                assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
            }
        }
    }
}
