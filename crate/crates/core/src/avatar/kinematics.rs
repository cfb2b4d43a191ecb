//! Forward kinematics, linear blend skinning, and derivatives of attached points.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::rotation::{rodrigues, rodrigues_with_grad};
use super::template::{BodyTemplate, NUM_SHAPE};
use crate::error::{Error, Result};

/// Per-joint axis-angle rotations, root translation and shape coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseParams {
    pub joint_rotations: Vec<Vector3<f64>>,
    pub root_translation: Vector3<f64>,
    pub shape: [f64; NUM_SHAPE],
}

impl PoseParams {
    pub fn zero(joints: usize) -> Self {
        Self {
            joint_rotations: vec![Vector3::zeros(); joints],
            root_translation: Vector3::zeros(),
            shape: [0.0; NUM_SHAPE],
        }
    }

    pub fn validate(&self, joints: usize) -> Result<()> {
        if self.joint_rotations.len() != joints {
            return Err(Error::input(format!(
                "pose has {} joint rotations, template has {joints} joints",
                self.joint_rotations.len()
            )));
        }
        let finite = self.joint_rotations.iter().all(|r| r.iter().all(|x| x.is_finite()))
            && self.root_translation.iter().all(|x| x.is_finite())
            && self.shape.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::input("pose parameters contain non-finite values"));
        }
        Ok(())
    }

    /// Number of scalars in [`PoseParams::to_flat`].
    pub fn flat_len(joints: usize) -> usize {
        3 * joints + 3 + NUM_SHAPE
    }

    /// Rotations, then translation, then shape.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::flat_len(self.joint_rotations.len()));
        for r in &self.joint_rotations {
            out.extend(r.iter());
        }
        out.extend(self.root_translation.iter());
        out.extend(self.shape.iter());
        out
    }

    pub fn from_flat(flat: &[f64], joints: usize) -> Self {
        assert_eq!(flat.len(), Self::flat_len(joints));
        let joint_rotations = (0..joints)
            .map(|j| Vector3::new(flat[3 * j], flat[3 * j + 1], flat[3 * j + 2]))
            .collect();
        let o = 3 * joints;
        Self {
            joint_rotations,
            root_translation: Vector3::new(flat[o], flat[o + 1], flat[o + 2]),
            shape: std::array::from_fn(|k| flat[o + 3 + k]),
        }
    }

    /// Flattened rotations, the offset network input.
    pub fn rotation_features(&self) -> Vec<f64> {
        self.joint_rotations.iter().flat_map(|r| r.iter().copied()).collect()
    }
}

/// World map `x ↦ A·x + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointTransform {
    pub linear: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl JointTransform {
    pub fn identity() -> Self {
        Self {
            linear: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.linear * x + self.translation
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &JointTransform) -> JointTransform {
        JointTransform {
            linear: self.linear * other.linear,
            translation: self.linear * other.translation + self.translation,
        }
    }
}

/// Per-joint world transforms: each child is its parent's transform composed with
/// a rotation about the child's rest position; the root is additionally translated.
pub fn forward_kinematics(t: &BodyTemplate, p: &PoseParams) -> Result<Vec<JointTransform>> {
    p.validate(t.joint_count())?;
    let order = t.topological_order()?;
    let rest = t.rest_joints(&p.shape);
    Ok(fk_with_rest(t, p, &rest, &order))
}

fn fk_with_rest(t: &BodyTemplate, p: &PoseParams, rest: &[Vector3<f64>], order: &[usize]) -> Vec<JointTransform> {
    let mut out = vec![JointTransform::identity(); t.joint_count()];
    for &j in order {
        let r = rodrigues(&p.joint_rotations[j]);
        let local = JointTransform {
            linear: r,
            translation: rest[j] - r * rest[j],
        };
        out[j] = match t.parent(j) {
            Some(par) => out[par].compose(&local),
            None => {
                let mut g = local;
                g.translation += p.root_translation;
                g
            }
        };
    }
    out
}

/// Posed joint positions (each rest joint mapped by its own transform).
pub fn posed_joints(t: &BodyTemplate, p: &PoseParams) -> Result<Vec<Vector3<f64>>> {
    let tf = forward_kinematics(t, p)?;
    let rest = t.rest_joints(&p.shape);
    Ok(tf.iter().zip(&rest).map(|(g, j)| g.apply(j)).collect())
}

/// Linear blend skinning of arbitrary points with per-point weight rows.
pub fn skin_points(points: &[Vector3<f64>], weights: &[Vec<f64>], transforms: &[JointTransform]) -> Vec<Vector3<f64>> {
    points
        .iter()
        .zip(weights)
        .map(|(v, w)| blend(w, transforms).apply(v))
        .collect()
}

/// Weighted sum of joint transforms, the affine map LBS applies to one point.
pub fn blend(weights: &[f64], transforms: &[JointTransform]) -> JointTransform {
    let mut m = JointTransform {
        linear: Matrix3::zeros(),
        translation: Vector3::zeros(),
    };
    for (w, g) in weights.iter().zip(transforms) {
        if *w != 0.0 {
            m.linear += g.linear * *w;
            m.translation += g.translation * *w;
        }
    }
    m
}

/// `v' = Σ_j w_j · T_j(v)` over the template's rest vertices for the pose's shape.
pub fn skin_vertices(t: &BodyTemplate, shape: &[f64; NUM_SHAPE], transforms: &[JointTransform]) -> Vec<Vector3<f64>> {
    skin_points(&t.rest_vertices(shape), &t.skin_weights, transforms)
}

/// Posed position of a point rigidly attached to `joint` at rest offset `offset`
/// from the joint, and its derivatives with respect to all pose parameters.
#[derive(Clone, Debug)]
pub struct AttachedPoint {
    pub joint: usize,
    pub offset: Vector3<f64>,
}

/// Kinematic quantities shared by every attached-point evaluation of one pose.
pub struct PosedSkeleton {
    pub rest: Vec<Vector3<f64>>,
    pub transforms: Vec<JointTransform>,
    rotations: Vec<Matrix3<f64>>,
    rotation_grads: Vec<[Matrix3<f64>; 3]>,
}

impl PosedSkeleton {
    pub fn new(t: &BodyTemplate, p: &PoseParams) -> Result<Self> {
        p.validate(t.joint_count())?;
        let order = t.topological_order()?;
        let rest = t.rest_joints(&p.shape);
        let transforms = fk_with_rest(t, p, &rest, &order);
        let (rotations, rotation_grads) = p.joint_rotations.iter().map(rodrigues_with_grad).unzip();
        Ok(Self {
            rest,
            transforms,
            rotations,
            rotation_grads,
        })
    }

    pub fn position(&self, a: &AttachedPoint) -> Vector3<f64> {
        self.transforms[a.joint].apply(&(self.rest[a.joint] + a.offset))
    }

    /// Accumulates `gᵀ ∂p/∂params` into `grad` (layout of [`PoseParams::to_flat`]).
    pub fn backward(&self, t: &BodyTemplate, p: &PoseParams, a: &AttachedPoint, g: &Vector3<f64>, grad: &mut [f64]) {
        let nj = t.joint_count();
        let pos = self.position(a);
        let root_parent = JointTransform {
            linear: Matrix3::identity(),
            translation: p.root_translation,
        };
        let mut rest_grad = vec![Vector3::zeros(); nj];
        let mut k = a.joint;
        loop {
            let par = t.parent(k).map(|q| self.transforms[q]).unwrap_or(root_parent);
            // ∂p/∂θ_k,i = A_par · ∂R_k/∂θ_i · R_kᵀ · (A_parᵀ (p − b_par) − J_k)
            let w = par.linear.transpose() * (pos - par.translation) - self.rest[k];
            let local = self.rotations[k].transpose() * w;
            let ga = par.linear.transpose() * g;
            for i in 0..3 {
                grad[3 * k + i] += ga.dot(&(self.rotation_grads[k][i] * local));
            }
            // ∂p/∂J_k = A_par (I − R_k), plus A_par R_k for the attachment joint itself
            rest_grad[k] = if k == a.joint {
                ga
            } else {
                ga - self.rotations[k].transpose() * ga
            };
            match t.parent(k) {
                Some(q) => k = q,
                None => break,
            }
        }
        let o = 3 * nj;
        for i in 0..3 {
            grad[o + i] += g[i];
        }
        for (m, rg) in rest_grad.iter().enumerate() {
            if rg.iter().all(|x| *x == 0.0) {
                continue;
            }
            for s in 0..NUM_SHAPE {
                grad[o + 3 + s] += rg.dot(&t.joint_shape_dirs[m][s]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avatar::template::{capsule_human, CapsuleParams};
    use nalgebra::Matrix4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_template() -> BodyTemplate {
        capsule_human(&CapsuleParams {
            spacing: 0.1,
            ..Default::default()
        })
    }

    fn random_pose(rng: &mut ChaCha8Rng, joints: usize, scale: f64) -> PoseParams {
        let mut v = || Vector3::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale), rng.random_range(-scale..scale));
        let joint_rotations = (0..joints).map(|_| v()).collect();
        let root_translation = v();
        PoseParams {
            joint_rotations,
            root_translation,
            shape: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
        }
    }

    fn homogeneous(r: &Matrix3<f64>, t: &Vector3<f64>) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(t);
        m
    }

    #[test]
    fn zero_pose_gives_identity() {
        let t = small_template();
        let tf = forward_kinematics(&t, &PoseParams::zero(16)).unwrap();
        for g in tf {
            assert!((g.linear - Matrix3::identity()).norm() < 1e-15);
            assert!(g.translation.norm() < 1e-15);
        }
        let v = skin_vertices(&t, &[0.0; NUM_SHAPE], &forward_kinematics(&t, &PoseParams::zero(16)).unwrap());
        assert_eq!(v, t.canonical_vertices);
    }

    #[test]
    fn root_rotation_propagates() {
        let t = small_template();
        let mut p = PoseParams::zero(16);
        p.joint_rotations[0] = Vector3::new(0.3, -0.2, 0.9);
        let r = rodrigues(&p.joint_rotations[0]);
        for g in forward_kinematics(&t, &p).unwrap() {
            assert!((g.linear - r).norm() < 1e-12);
        }
    }

    #[test]
    fn chain_matches_homogeneous_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = small_template();
        let p = random_pose(&mut rng, 16, 1.0);
        let tf = forward_kinematics(&t, &p).unwrap();
        let rest = t.rest_joints(&p.shape);
        // pelvis → l_hip → l_knee → l_ankle composed by hand
        let local = |j: usize| {
            let r = rodrigues(&p.joint_rotations[j]);
            homogeneous(&Matrix3::identity(), &rest[j]) * homogeneous(&r, &Vector3::zeros()) * homogeneous(&Matrix3::identity(), &-rest[j])
        };
        let root = homogeneous(&Matrix3::identity(), &p.root_translation) * local(0);
        let chain = root * local(10) * local(11) * local(12);
        let got = homogeneous(&tf[12].linear, &tf[12].translation);
        assert!((chain - got).abs().max() < 1e-9);
    }

    #[test]
    fn lbs_translation_and_blend() {
        let pts = vec![Vector3::new(1.0, 2.0, 3.0), Vector3::new(-1.0, 0.5, 0.0)];
        let shift = Vector3::new(0.2, -0.4, 1.0);
        let moved = JointTransform {
            linear: Matrix3::identity(),
            translation: shift,
        };
        let tf = [JointTransform::identity(), moved];
        let full = skin_points(&pts, &[vec![0.0, 1.0], vec![0.0, 1.0]], &tf);
        let half = skin_points(&pts, &[vec![0.5, 0.5], vec![0.5, 0.5]], &tf);
        for i in 0..2 {
            assert!((full[i] - pts[i] - shift).norm() < 1e-15);
            assert!((half[i] - pts[i] - shift * 0.5).norm() < 1e-15);
        }
    }

    #[test]
    fn lbs_is_rigid_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = small_template();
        let p = random_pose(&mut rng, 16, 0.5);
        let tf = forward_kinematics(&t, &p).unwrap();
        let g = JointTransform {
            linear: rodrigues(&Vector3::new(0.4, 1.1, -0.3)),
            translation: Vector3::new(1.0, 2.0, -0.5),
        };
        let moved: Vec<_> = tf.iter().map(|x| g.compose(x)).collect();
        let a = skin_vertices(&t, &p.shape, &tf);
        let b = skin_vertices(&t, &p.shape, &moved);
        for (x, y) in a.iter().zip(&b) {
            assert!((g.apply(x) - y).norm() < 1e-12);
        }
    }

    #[test]
    fn attached_point_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = small_template();
        for &joint in &[0usize, 3, 6, 12, 9] {
            let p = random_pose(&mut rng, 16, 0.8);
            let a = AttachedPoint {
                joint,
                offset: Vector3::new(0.05, -0.02, 0.03),
            };
            let g = Vector3::new(0.3, -1.2, 0.7);
            let sk = PosedSkeleton::new(&t, &p).unwrap();
            let mut grad = vec![0.0; PoseParams::flat_len(16)];
            sk.backward(&t, &p, &a, &g, &mut grad);
            let flat = p.to_flat();
            let f = |x: &[f64]| {
                let q = PoseParams::from_flat(x, 16);
                g.dot(&PosedSkeleton::new(&t, &q).unwrap().position(&a))
            };
            for i in 0..flat.len() {
                let h = 1e-6;
                let mut xp = flat.clone();
                let mut xm = flat.clone();
                xp[i] += h;
                xm[i] -= h;
                let num = (f(&xp) - f(&xm)) / (2.0 * h);
                assert!((num - grad[i]).abs() < 1e-6, "joint {joint} param {i}: {num} vs {}", grad[i]);
            }
        }
    }

    #[test]
    fn posed_joints_at_zero_pose_are_rest() {
        let t = small_template();
        let j = posed_joints(&t, &PoseParams::zero(16)).unwrap();
        assert_eq!(j, t.joints);
    }

    #[test]
    fn flat_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_pose(&mut rng, 16, 1.0);
        assert_eq!(PoseParams::from_flat(&p.to_flat(), 16), p);
    }
}
