//! 68 face landmarks on the capsule head, with visibility as confidence.

use nalgebra::{Vector2, Vector3};

use super::subject::SyntheticSubject;
use crate::avatar::template::joint;
use crate::avatar::{AttachedPoint, PoseParams, PosedSkeleton};
use crate::error::Result;
use crate::fitting::keypoints::project_point;
use crate::fusion::landmarks::{LandmarkSet, FACE_LANDMARKS};
use crate::splat::Camera;

/// Head sphere center above the head joint, and its radius.
const FACE_CENTER: [f64; 3] = [0.0, 0.05, 0.0];
const FACE_RADIUS: f64 = 0.095;
/// Half-width of the planar layout on the sphere, in radians of arc.
const FACE_SPAN: f64 = 0.75;

fn ellipse(n: usize, c: (f64, f64), r: (f64, f64)) -> impl Iterator<Item = (f64, f64)> {
    (0..n).map(move |k| {
        let a = std::f64::consts::TAU * k as f64 / n as f64;
        (c.0 - r.0 * a.cos(), c.1 + r.1 * a.sin())
    })
}

/// Planar layout in `[-1, 1]²`, x toward the subject's left, y up, in the usual 68-point order.
pub fn face_layout() -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(FACE_LANDMARKS);
    pts.extend((0..17).map(|k| {
        let phi = std::f64::consts::PI * k as f64 / 16.0;
        (-0.9 * phi.cos(), 0.2 - 0.9 * phi.sin())
    }));
    pts.extend((0..5).map(|k| (-0.7 + 0.125 * k as f64, 0.55 - 0.025 * (k as f64 - 2.0).abs())));
    pts.extend((0..5).map(|k| (0.2 + 0.125 * k as f64, 0.55 - 0.025 * (k as f64 - 2.0).abs())));
    pts.extend((0..4).map(|k| (0.0, 0.35 - 0.13 * k as f64)));
    pts.extend((0..5).map(|k| (-0.2 + 0.1 * k as f64, -0.15)));
    pts.extend(ellipse(6, (-0.4, 0.3), (0.15, 0.06)));
    pts.extend(ellipse(6, (0.4, 0.3), (0.15, 0.06)));
    pts.extend(ellipse(12, (0.0, -0.4), (0.35, 0.12)));
    pts.extend(ellipse(8, (0.0, -0.4), (0.25, 0.05)));
    pts
}

/// Head-frame point and outward normal for each landmark.
fn face_points() -> Vec<(Vector3<f64>, Vector3<f64>)> {
    let c = Vector3::from(FACE_CENTER);
    face_layout()
        .into_iter()
        .map(|(u, v)| {
            let (yaw, pitch) = (u * FACE_SPAN, v * FACE_SPAN);
            let n = Vector3::new(yaw.sin() * pitch.cos(), pitch.sin(), yaw.cos() * pitch.cos());
            (c + n * FACE_RADIUS, n)
        })
        .collect()
}

/// Projected landmarks in pixel-index coordinates (pixel `(x, y)` centered at
/// `(x, y)`). Confidence is 1 when the surface faces the camera, 0 otherwise.
pub fn face_landmarks(subject: &SyntheticSubject, pose: &PoseParams, camera: &Camera) -> Result<LandmarkSet> {
    let sk = PosedSkeleton::new(&subject.template, pose)?;
    let head = sk.transforms[joint::HEAD];
    let eye = camera.center();
    let mut points = Vec::with_capacity(FACE_LANDMARKS);
    let mut confidence = Vec::with_capacity(FACE_LANDMARKS);
    for (offset, normal) in face_points() {
        let p = sk.position(&AttachedPoint { joint: joint::HEAD, offset });
        let n = head.linear * normal;
        let q = project_point(camera, &p);
        let seen = q[0].is_finite() && n.dot(&(eye - p)) > 0.0;
        points.push(if q[0].is_finite() { Vector2::new(q[0] - 0.5, q[1] - 0.5) } else { Vector2::zeros() });
        confidence.push(if seen { 1.0 } else { 0.0 });
    }
    Ok(LandmarkSet { points, confidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avatar::CapsuleParams;
    use crate::fusion::procrustes_disparity;
    use crate::synth::{make_subject, turntable_pose, SubjectParams};

    fn subject() -> SyntheticSubject {
        make_subject(2, &SubjectParams { body: CapsuleParams { spacing: 0.1, ..Default::default() }, shape_std: 0.0 })
    }

    #[test]
    fn layout_has_68_distinct_points() {
        let l = face_layout();
        assert_eq!(l.len(), FACE_LANDMARKS);
        for i in 0..l.len() {
            for j in 0..i {
                assert!((l[i].0 - l[j].0).abs() + (l[i].1 - l[j].1).abs() > 1e-6, "{i} {j}");
            }
        }
    }

    #[test]
    fn front_view_is_front_facing_back_view_is_not() {
        let s = subject();
        let cam = Camera::looking_at_origin(128, 128, 180.0, 3.0, 0.9);
        let front = face_landmarks(&s, &turntable_pose(&s, 0.0), &cam).unwrap();
        let back = face_landmarks(&s, &turntable_pose(&s, std::f64::consts::PI), &cam).unwrap();
        assert!(front.is_front_facing());
        assert!(!back.is_front_facing());
        // Small turns keep the landmark shape close to the frontal one.
        let turned = face_landmarks(&s, &turntable_pose(&s, 0.05), &cam).unwrap();
        assert!(procrustes_disparity(&front, &turned).unwrap() < 0.01);
    }
}
