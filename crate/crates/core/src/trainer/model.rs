//! Trainable avatar: canonical Gaussians bound to template vertices plus the
//! offset network, its posing, and the checkpoint file format.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::avatar::kinematics::blend;
use crate::avatar::offset_net::NetTape;
use crate::avatar::{forward_kinematics, BodyTemplate, JointTransform, OffsetNet, PoseParams, NUM_SHAPE};
use crate::error::{Error, Result};
use crate::splat::gaussian::{read_f32, read_u32, read_u64};
use crate::splat::{logit, GaussianSet, SH_COEFFS};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"AVCK";
pub const CHECKPOINT_VERSION: u32 = 1;

pub const INIT_OPACITY: f64 = 0.1;

/// Splat standard deviation as a fraction of the template's mean edge length.
pub const INIT_SCALE_FACTOR: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct AvatarModel {
    pub template: BodyTemplate,
    /// Canonical-space Gaussians.
    pub gaussians: GaussianSet,
    /// Template vertex each Gaussian takes skin weights and offsets from.
    pub anchors: Vec<u32>,
    pub net: OffsetNet,
    /// Resolved training configuration as `key = value` lines.
    pub config_echo: String,
}

/// Gaussians placed for one pose, with what the backward pass needs.
pub struct PosedAvatar {
    pub gaussians: GaussianSet,
    /// Linear part of each vertex's blended skinning transform.
    pub vertex_linear: Vec<Matrix3<f64>>,
    pub transforms: Vec<JointTransform>,
    pub offsets: Vec<Vector3<f64>>,
    pub tape: NetTape,
}

/// Offset-network input: joint rotations with the root entry zeroed, so global
/// orientation does not deform the body.
pub fn net_features(p: &PoseParams) -> Vec<f64> {
    let mut f = p.rotation_features();
    f[..3].fill(0.0);
    f
}

impl AvatarModel {
    /// One Gaussian per rest vertex (for `shape`), low opacity, grey color, zero offsets.
    pub fn initialize(template: &BodyTemplate, shape: &[f64; NUM_SHAPE], seed: u64) -> Result<Self> {
        template.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rest = template.rest_vertices(shape);
        let log_scale = (INIT_SCALE_FACTOR * template.mean_edge_length()).ln();
        let mut gaussians = GaussianSet::default();
        for v in rest {
            gaussians.push(v, log_scale, [[0.0; 3]; SH_COEFFS], logit(INIT_OPACITY));
        }
        let n = template.vertex_count();
        Ok(Self {
            template: template.clone(),
            gaussians,
            anchors: (0..n as u32).collect(),
            net: OffsetNet::new(3 * template.joint_count(), n, &mut rng),
            config_echo: String::new(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        self.gaussians.validate()?;
        self.net.validate()?;
        let n = self.template.vertex_count();
        if self.anchors.len() != self.gaussians.len() || self.anchors.iter().any(|a| *a as usize >= n) {
            return Err(Error::input("Gaussian anchors do not match the template"));
        }
        if self.net.input_dim != 3 * self.template.joint_count() || self.net.vertices != n {
            return Err(Error::input("offset network dimensions do not match the template"));
        }
        Ok(())
    }

    pub fn pose(&self, p: &PoseParams) -> Result<PosedAvatar> {
        let transforms = forward_kinematics(&self.template, p)?;
        let blends: Vec<JointTransform> = self.template.skin_weights.iter().map(|w| blend(w, &transforms)).collect();
        let (offsets, tape) = self.net.forward_with_tape(&net_features(p));
        let mut gaussians = self.gaussians.clone();
        for (pos, a) in gaussians.positions.iter_mut().zip(&self.anchors) {
            let a = *a as usize;
            *pos = blends[a].apply(pos) + offsets[a];
        }
        Ok(PosedAvatar {
            gaussians,
            vertex_linear: blends.iter().map(|b| b.linear).collect(),
            transforms,
            offsets,
            tape,
        })
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        self.gaussians.write_to(w)?;
        w.write_all(&(self.anchors.len() as u64).to_le_bytes())?;
        for a in &self.anchors {
            w.write_all(&a.to_le_bytes())?;
        }
        w.write_all(&(self.net.input_dim as u32).to_le_bytes())?;
        w.write_all(&(self.net.hidden as u32).to_le_bytes())?;
        w.write_all(&(self.net.vertices as u64).to_le_bytes())?;
        w.write_all(&(self.net.params.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.net.params.len() * 4);
        for p in &self.net.params {
            buf.extend_from_slice(&(*p as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
        for text in [&self.config_echo, &self.template.to_text()] {
            w.write_all(&(text.len() as u64).to_le_bytes())?;
            w.write_all(text.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|e| Error::input(format!("truncated checkpoint: {e}")))?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::input("not an avatar checkpoint (bad magic)"));
        }
        let version = read_u32(r)?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::input(format!("unsupported checkpoint version {version}")));
        }
        let gaussians = GaussianSet::read_from(r)?;
        let n = read_u64(r)? as usize;
        let anchors = (0..n).map(|_| read_u32(r)).collect::<Result<Vec<_>>>()?;
        let input_dim = read_u32(r)? as usize;
        let hidden = read_u32(r)? as usize;
        let vertices = read_u64(r)? as usize;
        let count = read_u64(r)? as usize;
        if count != OffsetNet::param_count(input_dim, hidden, vertices) {
            return Err(Error::input("checkpoint network block has inconsistent size"));
        }
        let params = (0..count).map(|_| read_f32(r)).collect::<Result<Vec<_>>>()?;
        let mut texts = Vec::new();
        for _ in 0..2 {
            let len = read_u64(r)? as usize;
            let mut bytes = vec![0u8; len];
            r.read_exact(&mut bytes)
                .map_err(|e| Error::input(format!("truncated checkpoint: {e}")))?;
            texts.push(String::from_utf8(bytes).map_err(|_| Error::input("checkpoint text block is not UTF-8"))?);
        }
        let template = BodyTemplate::from_text(&texts[1])?;
        let model = Self {
            template,
            gaussians,
            anchors,
            net: OffsetNet {
                input_dim,
                hidden,
                vertices,
                params,
            },
            config_echo: texts.swap_remove(0),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(&mut bytes.as_slice())
    }

    /// The model as stored on disk (all floats rounded through `f32`).
    pub fn quantized(&self) -> Self {
        let mut m = self.clone();
        m.gaussians = self.gaussians.quantized_f32();
        for p in &mut m.net.params {
            *p = *p as f32 as f64;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avatar::{capsule_human, skin_vertices, CapsuleParams};

    fn template() -> BodyTemplate {
        capsule_human(&CapsuleParams {
            spacing: 0.12,
            ..Default::default()
        })
    }

    #[test]
    fn initial_pose_matches_skinned_template() {
        let t = template();
        let m = AvatarModel::initialize(&t, &[0.0; NUM_SHAPE], 1).unwrap();
        let mut p = PoseParams::zero(16);
        p.joint_rotations[0] = Vector3::new(0.0, 1.0, 0.0);
        p.joint_rotations[8] = Vector3::new(0.0, 0.0, 0.7);
        let posed = m.pose(&p).unwrap();
        let tf = forward_kinematics(&t, &p).unwrap();
        let want = skin_vertices(&t, &p.shape, &tf);
        for (a, b) in posed.gaussians.positions.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn checkpoint_roundtrip() {
        let t = template();
        let mut m = AvatarModel::initialize(&t, &[0.0; NUM_SHAPE], 2).unwrap();
        m.config_echo = "seed = 2\n".into();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let back = AvatarModel::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, m.quantized());
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn bad_magic_is_rejected() {
        assert!(AvatarModel::read_from(&mut &b"GSAV\x01\x00\x00\x00"[..]).is_err());
    }
}
