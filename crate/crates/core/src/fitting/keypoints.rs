//! Correspondence between body joints and the 17 skeleton keypoints, and projection.

use nalgebra::{Matrix2x3, Vector3};

use crate::avatar::template::joint;
use crate::avatar::{AttachedPoint, BodyTemplate, PoseParams, PosedSkeleton};
use crate::error::Result;
use crate::pose_tools::skeleton::kp;
use crate::pose_tools::NUM_KEYPOINTS;
use crate::splat::raster::NEAR_PLANE;
use crate::splat::Camera;

/// Keypoint `i` sits on joint `KEYPOINT_JOINTS[i].0` at rest offset `.1` from it.
/// Face points ride on the head joint.
pub const KEYPOINT_JOINTS: [(usize, [f64; 3]); NUM_KEYPOINTS] = {
    let mut t = [(0usize, [0.0f64; 3]); NUM_KEYPOINTS];
    t[kp::NOSE] = (joint::HEAD, [0.0, 0.05, 0.095]);
    t[kp::NECK] = (joint::NECK, [0.0; 3]);
    t[kp::R_SHOULDER] = (joint::R_SHOULDER, [0.0; 3]);
    t[kp::R_ELBOW] = (joint::R_ELBOW, [0.0; 3]);
    t[kp::R_WRIST] = (joint::R_WRIST, [0.0; 3]);
    t[kp::L_SHOULDER] = (joint::L_SHOULDER, [0.0; 3]);
    t[kp::L_ELBOW] = (joint::L_ELBOW, [0.0; 3]);
    t[kp::L_WRIST] = (joint::L_WRIST, [0.0; 3]);
    t[kp::R_HIP] = (joint::R_HIP, [0.0; 3]);
    t[kp::R_KNEE] = (joint::R_KNEE, [0.0; 3]);
    t[kp::R_ANKLE] = (joint::R_ANKLE, [0.0; 3]);
    t[kp::L_HIP] = (joint::L_HIP, [0.0; 3]);
    t[kp::L_KNEE] = (joint::L_KNEE, [0.0; 3]);
    t[kp::L_ANKLE] = (joint::L_ANKLE, [0.0; 3]);
    t[kp::R_EYE] = (joint::HEAD, [-0.035, 0.09, 0.085]);
    t[kp::L_EYE] = (joint::HEAD, [0.035, 0.09, 0.085]);
    t[kp::HEAD_TOP] = (joint::HEAD, [0.0, 0.195, 0.0]);
    t
};

pub fn keypoint_attachments() -> Vec<AttachedPoint> {
    KEYPOINT_JOINTS
        .iter()
        .map(|(j, o)| AttachedPoint {
            joint: *j,
            offset: Vector3::new(o[0], o[1], o[2]),
        })
        .collect()
}

/// Posed 3D keypoint positions.
pub fn body_keypoints(t: &BodyTemplate, p: &PoseParams) -> Result<Vec<Vector3<f64>>> {
    let sk = PosedSkeleton::new(t, p)?;
    Ok(keypoint_attachments().iter().map(|a| sk.position(a)).collect())
}

/// Pinhole projection; points at depth ≤ the near plane project to `[NaN, NaN]`.
pub fn project_point(cam: &Camera, p: &Vector3<f64>) -> [f64; 2] {
    let pc = cam.to_camera(p);
    if pc.z <= NEAR_PLANE {
        return [f64::NAN; 2];
    }
    cam.project_camera_point(&pc)
}

/// Jacobian of the pixel position with respect to the world point (in front of the camera).
pub fn projection_jacobian(cam: &Camera, p: &Vector3<f64>) -> Matrix2x3<f64> {
    let pc = cam.to_camera(p);
    let iz = 1.0 / pc.z;
    let d = Matrix2x3::new(
        cam.fx * iz,
        0.0,
        -cam.fx * pc.x * iz * iz,
        0.0,
        cam.fy * iz,
        -cam.fy * pc.y * iz * iz,
    );
    d * cam.rotation
}

/// Projected joint positions, see [`project_point`] for the near-plane sentinel.
pub fn project_joints(p: &PoseParams, t: &BodyTemplate, cam: &Camera) -> Result<Vec<[f64; 2]>> {
    let sk = PosedSkeleton::new(t, p)?;
    Ok((0..t.joint_count())
        .map(|j| {
            project_point(
                cam,
                &sk.position(&AttachedPoint {
                    joint: j,
                    offset: Vector3::zeros(),
                }),
            )
        })
        .collect())
}

/// Projected keypoints in skeleton order.
pub fn project_keypoints(p: &PoseParams, t: &BodyTemplate, cam: &Camera) -> Result<Vec<[f64; 2]>> {
    Ok(body_keypoints(t, p)?.iter().map(|x| project_point(cam, x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avatar::{capsule_human, posed_joints, CapsuleParams};
    use nalgebra::Matrix3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn optical_axis_hits_principal_point() {
        let cam = Camera::identity(64, 48, 100.0);
        let q = project_point(&cam, &Vector3::new(0.0, 0.0, 2.0));
        assert_eq!(q, [cam.cx, cam.cy]);
        let near = project_point(&cam, &Vector3::new(0.0, 0.0, -1.0));
        assert!(near[0].is_nan());
    }

    #[test]
    fn doubling_depth_halves_offset() {
        let cam = Camera::identity(64, 48, 100.0);
        let a = project_point(&cam, &Vector3::new(0.3, -0.2, 2.0));
        let b = project_point(&cam, &Vector3::new(0.3, -0.2, 4.0));
        assert!(((a[0] - cam.cx) - 2.0 * (b[0] - cam.cx)).abs() < 1e-12);
        assert!(((a[1] - cam.cy) - 2.0 * (b[1] - cam.cy)).abs() < 1e-12);
    }

    #[test]
    fn joints_match_explicit_pipeline() {
        let t = capsule_human(&CapsuleParams { spacing: 0.12, ..Default::default() });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p = PoseParams::zero(16);
        for r in p.joint_rotations.iter_mut() {
            *r = Vector3::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
        }
        p.root_translation = Vector3::new(0.1, -0.2, 0.05);
        let cam = Camera::looking_at_origin(128, 128, 180.0, 3.0, 0.9);
        let got = project_joints(&p, &t, &cam).unwrap();
        let world = posed_joints(&t, &p).unwrap();
        let k = Matrix3::new(cam.fx, 0.0, cam.cx, 0.0, cam.fy, cam.cy, 0.0, 0.0, 1.0);
        for (g, w) in got.iter().zip(&world) {
            let h = k * (cam.rotation * w + cam.translation);
            assert!((g[0] - h.x / h.z).abs() < 1e-9 && (g[1] - h.y / h.z).abs() < 1e-9);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cam = Camera::looking_at_origin(128, 128, 180.0, 3.0, 0.9);
        let p = Vector3::new(0.2, 1.1, -0.3);
        let j = projection_jacobian(&cam, &p);
        for k in 0..3 {
            let mut a = p;
            let mut b = p;
            a[k] += 1e-6;
            b[k] -= 1e-6;
            let (pa, pb) = (project_point(&cam, &a), project_point(&cam, &b));
            for r in 0..2 {
                assert!(((pa[r] - pb[r]) / 2e-6 - j[(r, k)]).abs() < 1e-5);
            }
        }
    }
}
