//! Articulated capsule body: template, kinematics, skinning, pose-dependent
//! offsets and the Laplacian regularizer.

pub mod kinematics;
pub mod laplacian;
pub mod offset_net;
pub mod rotation;
pub mod template;

use nalgebra::Vector3;

pub use kinematics::{forward_kinematics, posed_joints, skin_points, skin_vertices, AttachedPoint, JointTransform, PoseParams, PosedSkeleton};
pub use laplacian::{laplacian, laplacian_loss, Adjacency};
pub use offset_net::OffsetNet;
pub use template::{capsule_human, BodyTemplate, CapsuleParams, NUM_SHAPE};

use crate::error::{Error, Result};

/// Skinned template vertices plus the network's pose-dependent offsets, both in posed space.
pub fn deformed_positions(t: &BodyTemplate, p: &PoseParams, net: &OffsetNet) -> Result<Vec<Vector3<f64>>> {
    if net.input_dim != 3 * t.joint_count() || net.vertices != t.vertex_count() {
        return Err(Error::input("offset network dimensions do not match the template"));
    }
    let tf = forward_kinematics(t, p)?;
    let skinned = skin_vertices(t, &p.shape, &tf);
    let offsets = net.forward(&p.rotation_features());
    Ok(skinned.iter().zip(&offsets).map(|(v, o)| v + o).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn template() -> BodyTemplate {
        capsule_human(&CapsuleParams { spacing: 0.12, ..Default::default() })
    }

    #[test]
    fn zero_net_gives_skinned_vertices() {
        let t = template();
        let net = OffsetNet::zeros(48, t.vertex_count());
        assert_eq!(deformed_positions(&t, &PoseParams::zero(16), &net).unwrap(), t.canonical_vertices);
        let mut p = PoseParams::zero(16);
        p.joint_rotations[5] = Vector3::new(0.0, 0.0, 0.8);
        let tf = forward_kinematics(&t, &p).unwrap();
        assert_eq!(deformed_positions(&t, &p, &net).unwrap(), skin_vertices(&t, &p.shape, &tf));
    }

    #[test]
    fn net_gradient_through_deformation() {
        let t = template();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut net = OffsetNet::new(48, t.vertex_count(), &mut rng);
        for x in net.params.iter_mut() {
            *x += rng.random_range(-0.2..0.2);
        }
        let mut p = PoseParams::zero(16);
        for r in p.joint_rotations.iter_mut() {
            *r = Vector3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        }
        let up: Vec<Vector3<f64>> = (0..t.vertex_count())
            .map(|_| Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let loss = |n: &OffsetNet| -> f64 { deformed_positions(&t, &p, n).unwrap().iter().zip(&up).map(|(a, b)| a.dot(b)).sum() };
        let (_, tape) = net.forward_with_tape(&p.rotation_features());
        let mut g = vec![0.0; net.params.len()];
        net.backward(&tape, &up, &mut g);
        for i in (0..net.params.len()).step_by(97) {
            let h = 1e-4;
            let mut a = net.clone();
            let mut b = net.clone();
            a.params[i] += h;
            b.params[i] -= h;
            let num = (loss(&a) - loss(&b)) / (2.0 * h);
            let den = num.abs().max(g[i].abs()).max(1e-8);
            assert!((num - g[i]).abs() / den < 1e-3, "param {i}: {num} vs {}", g[i]);
        }
    }
}
