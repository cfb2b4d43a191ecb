//! On-disk synthetic dataset layout.
//!
//! ```text
//! frames/NNNN.png  masks/NNNN.png  depth/NNNN.png  landmarks/NNNN.json
//! poses.jsonl  keypoints.jsonl  cameras.jsonl  template.mesh
//! heldout/     same layout for novel views (no depth or keypoints)
//! ```

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::sequence::{render_sequence, SynthFrame};
use super::landmarks::face_landmarks;
use super::subject::{make_subject, SubjectParams, SyntheticSubject};
use crate::avatar::{BodyTemplate, CapsuleParams, PoseParams};
use crate::error::{Error, Result};
use crate::image_io::{save_depth_png, ImageBuffer, Mask};
use crate::pose_tools::{read_skeletons, write_skeletons, Skeleton2D};
use crate::splat::{Camera, CameraRecord};
use crate::trainer::FrameSample;

pub const HELDOUT_DIR: &str = "heldout";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub frame: usize,
    #[serde(flatten)]
    pub pose: PoseParams,
}

/// Generation settings for `synth`.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub frames: usize,
    pub heldout: usize,
    pub width: usize,
    pub height: usize,
    pub focal: f64,
    pub distance: f64,
    pub camera_height: f64,
    pub spacing: f64,
    pub shape_std: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            frames: 189,
            heldout: 4,
            width: 128,
            height: 128,
            focal: 180.0,
            distance: 3.0,
            camera_height: 0.9,
            spacing: CapsuleParams::default().spacing,
            shape_std: 0.5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub const KEYS: [&'static str; 10] = [
        "frames",
        "heldout",
        "width",
        "height",
        "focal",
        "distance",
        "camera_height",
        "spacing",
        "shape_std",
        "seed",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::config(format!("invalid value {value:?} for {key}")))
        }
        match key {
            "frames" => self.frames = num(key, value)?,
            "heldout" => self.heldout = num(key, value)?,
            "width" => self.width = num(key, value)?,
            "height" => self.height = num(key, value)?,
            "focal" => self.focal = num(key, value)?,
            "distance" => self.distance = num(key, value)?,
            "camera_height" => self.camera_height = num(key, value)?,
            "spacing" => self.spacing = num(key, value)?,
            "shape_std" => self.shape_std = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::config(format!("unknown synth key {key:?}"))),
        }
        Ok(())
    }

    /// `key = value` lines in [`SynthConfig::KEYS`] order.
    pub fn to_kv(&self) -> String {
        let values = [
            self.frames.to_string(),
            self.heldout.to_string(),
            self.width.to_string(),
            self.height.to_string(),
            format!("{:?}", self.focal),
            format!("{:?}", self.distance),
            format!("{:?}", self.camera_height),
            format!("{:?}", self.spacing),
            format!("{:?}", self.shape_std),
            self.seed.to_string(),
        ];
        Self::KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.width == 0 || self.height == 0 {
            return Err(Error::config("frames, width and height must be positive"));
        }
        if !(self.focal > 0.0 && self.distance > 0.0 && self.spacing > 0.0 && self.shape_std >= 0.0) {
            return Err(Error::config("focal, distance and spacing must be positive, shape_std non-negative"));
        }
        Ok(())
    }

    pub fn camera(&self) -> Camera {
        Camera::looking_at_origin(self.width, self.height, self.focal, self.distance, self.camera_height)
    }

    pub fn subject_params(&self) -> SubjectParams {
        SubjectParams {
            body: CapsuleParams {
                spacing: self.spacing,
                ..Default::default()
            },
            shape_std: self.shape_std,
        }
    }
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })
        })
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r).expect("serializable"));
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn frame_name(i: usize) -> String {
    format!("{i:04}.png")
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

/// Writes frames, masks, poses and cameras; depth, keypoints and face
/// landmarks only when `full`.
pub fn write_frames(dir: &Path, subject: &SyntheticSubject, frames: &[SynthFrame], full: bool) -> Result<()> {
    let mut subdirs = vec!["frames", "masks"];
    if full {
        subdirs.extend(["depth", "landmarks"]);
    }
    for s in &subdirs {
        create_dir(&dir.join(s))?;
    }
    let mut poses = Vec::new();
    let mut cams = Vec::new();
    let mut kps = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        f.image.save_png(dir.join("frames").join(frame_name(i)))?;
        f.mask.save_png(dir.join("masks").join(frame_name(i)))?;
        if full {
            save_depth_png(&f.depth, f.camera.width, f.camera.height, dir.join("depth").join(frame_name(i)))?;
            face_landmarks(subject, &f.pose, &f.camera)?.save(&dir.join("landmarks").join(format!("{i:04}.json")))?;
        }
        poses.push(PoseRecord {
            frame: i,
            pose: f.pose.clone(),
        });
        cams.push(CameraRecord::from_camera(i, &f.camera));
        kps.push((i, f.keypoints.clone()));
    }
    write_jsonl(&dir.join("poses.jsonl"), &poses)?;
    write_jsonl(&dir.join("cameras.jsonl"), &cams)?;
    if full {
        write_skeletons(&dir.join("keypoints.jsonl"), &kps)?;
    }
    Ok(())
}

/// Renders a subject and writes the training sequence plus held-out views.
/// Held-out view `k` sits halfway between training views, at `2πk/heldout + π/frames`.
pub fn generate_dataset(dir: &Path, cfg: &SynthConfig) -> Result<()> {
    cfg.validate()?;
    let subject = make_subject(cfg.seed, &cfg.subject_params());
    let cam = cfg.camera();
    create_dir(dir)?;
    let frames = render_sequence(&subject, cfg.frames, &cam, 0.0)?;
    write_frames(dir, &subject, &frames, true)?;
    let tpath = dir.join("template.mesh");
    std::fs::write(&tpath, subject.template.to_text()).map_err(|e| Error::io(&tpath, e))?;
    if cfg.heldout > 0 {
        let held = render_sequence(&subject, cfg.heldout, &cam, std::f64::consts::PI / cfg.frames as f64)?;
        write_frames(&dir.join(HELDOUT_DIR), &subject, &held, false)?;
    }
    Ok(())
}

pub fn read_template(path: &Path) -> Result<BodyTemplate> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    BodyTemplate::from_text(&text)
}

pub fn read_poses(path: &Path) -> Result<Vec<PoseParams>> {
    Ok(read_jsonl::<PoseRecord>(path)?.into_iter().map(|r| r.pose).collect())
}

pub fn read_cameras(path: &Path) -> Result<Vec<Camera>> {
    read_jsonl::<CameraRecord>(path)?.iter().map(|r| {
        let c = r.to_camera();
        c.validate()?;
        Ok(c)
    }).collect()
}

/// A loaded view sequence (training or held-out).
#[derive(Clone, Debug)]
pub struct Dataset {
    pub root: PathBuf,
    pub samples: Vec<FrameSample>,
    /// Empty when the directory has no keypoint file.
    pub keypoints: Vec<Skeleton2D>,
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let poses = read_poses(&dir.join("poses.jsonl"))?;
    let cameras = read_cameras(&dir.join("cameras.jsonl"))?;
    if poses.len() != cameras.len() {
        return Err(Error::input(format!(
            "{}: {} poses but {} cameras",
            dir.display(),
            poses.len(),
            cameras.len()
        )));
    }
    let mut samples = Vec::with_capacity(poses.len());
    for (i, (pose, camera)) in poses.into_iter().zip(cameras).enumerate() {
        let image = ImageBuffer::from_png(dir.join("frames").join(frame_name(i)))?;
        let mask = Mask::from_png(dir.join("masks").join(frame_name(i)))?;
        if image.width != camera.width || image.height != camera.height || mask.width != image.width || mask.height != image.height {
            return Err(Error::input(format!("frame {i}: image, mask and camera sizes disagree")));
        }
        samples.push(FrameSample { image, mask, camera, pose });
    }
    let kp_path = dir.join("keypoints.jsonl");
    let keypoints = if kp_path.exists() {
        let ks = read_skeletons(&kp_path)?;
        if ks.len() != samples.len() {
            return Err(Error::input("keypoint count does not match frame count"));
        }
        ks.into_iter().map(|(_, s)| s).collect()
    } else {
        Vec::new()
    };
    Ok(Dataset {
        root: dir.to_path_buf(),
        samples,
        keypoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            frames: 3,
            heldout: 2,
            width: 48,
            height: 48,
            focal: 70.0,
            spacing: 0.1,
            ..Default::default()
        };
        generate_dataset(dir.path(), &cfg).unwrap();
        let ds = read_dataset(dir.path()).unwrap();
        assert_eq!(ds.samples.len(), 3);
        assert_eq!(ds.keypoints.len(), 3);
        let held = read_dataset(&dir.path().join(HELDOUT_DIR)).unwrap();
        assert_eq!(held.samples.len(), 2);
        assert!(held.keypoints.is_empty());
        let t = read_template(&dir.path().join("template.mesh")).unwrap();
        let subject = make_subject(cfg.seed, &cfg.subject_params());
        assert_eq!(t.vertex_count(), subject.template.vertex_count());
        assert_eq!(ds.samples[1].pose.shape, subject.shape);
        assert!(!ds.samples[0].mask.is_empty());
    }

    #[test]
    fn unknown_key_rejected() {
        let mut c = SynthConfig::default();
        assert!(c.set("frame_count", "3").is_err());
        c.set("frames", "7").unwrap();
        assert_eq!(c.frames, 7);
        assert_eq!(c.to_kv().lines().count(), SynthConfig::KEYS.len());
    }
}
