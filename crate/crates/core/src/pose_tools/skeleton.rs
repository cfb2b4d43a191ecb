//! 17-point 2D body skeleton and its JSON-lines form.
//!
//! | index | point          | index | point      |
//! |-------|----------------|-------|------------|
//! | 0     | nose           | 9     | right knee |
//! | 1     | neck           | 10    | right ankle|
//! | 2     | right shoulder | 11    | left hip   |
//! | 3     | right elbow    | 12    | left knee  |
//! | 4     | right wrist    | 13    | left ankle |
//! | 5     | left shoulder  | 14    | right eye  |
//! | 6     | left elbow     | 15    | left eye   |
//! | 7     | left wrist     | 16    | head top   |
//! | 8     | right hip      |       |            |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_KEYPOINTS: usize = 17;

pub mod kp {
    pub const NOSE: usize = 0;
    pub const NECK: usize = 1;
    pub const R_SHOULDER: usize = 2;
    pub const R_ELBOW: usize = 3;
    pub const R_WRIST: usize = 4;
    pub const L_SHOULDER: usize = 5;
    pub const L_ELBOW: usize = 6;
    pub const L_WRIST: usize = 7;
    pub const R_HIP: usize = 8;
    pub const R_KNEE: usize = 9;
    pub const R_ANKLE: usize = 10;
    pub const L_HIP: usize = 11;
    pub const L_KNEE: usize = 12;
    pub const L_ANKLE: usize = 13;
    pub const R_EYE: usize = 14;
    pub const L_EYE: usize = 15;
    pub const HEAD_TOP: usize = 16;
}

/// Keypoints as `[x, y, confidence]` in pixels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skeleton2D {
    pub keypoints: Vec<[f64; 3]>,
}

impl Skeleton2D {
    pub fn new(keypoints: Vec<[f64; 3]>) -> Self {
        Self { keypoints }
    }

    pub fn validate(&self) -> Result<()> {
        if self.keypoints.len() != NUM_KEYPOINTS {
            return Err(Error::input(format!(
                "skeleton has {} keypoints, expected {NUM_KEYPOINTS}",
                self.keypoints.len()
            )));
        }
        for (i, k) in self.keypoints.iter().enumerate() {
            if !k.iter().all(|v| v.is_finite()) || !(0.0..=1.0).contains(&k[2]) {
                return Err(Error::input(format!("keypoint {i} is not finite or has confidence outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.keypoints[i][0], self.keypoints[i][1]]
    }

    pub fn confidence(&self, i: usize) -> f64 {
        self.keypoints[i][2]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonRecord {
    pub frame: usize,
    pub keypoints: Vec<[f64; 3]>,
}

/// Reads `{frame, keypoints}` lines; blank lines are skipped.
pub fn read_skeletons(path: &Path) -> Result<Vec<(usize, Skeleton2D)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: SkeletonRecord = serde_json::from_str(line).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        let s = Skeleton2D::new(rec.keypoints);
        s.validate()?;
        out.push((rec.frame, s));
    }
    Ok(out)
}

pub fn skeletons_to_jsonl(skeletons: &[(usize, Skeleton2D)]) -> String {
    let mut s = String::new();
    for (frame, sk) in skeletons {
        let rec = SkeletonRecord {
            frame: *frame,
            keypoints: sk.keypoints.clone(),
        };
        s.push_str(&serde_json::to_string(&rec).expect("serializable"));
        s.push('\n');
    }
    s
}

pub fn write_skeletons(path: &Path, skeletons: &[(usize, Skeleton2D)]) -> Result<()> {
    std::fs::write(path, skeletons_to_jsonl(skeletons)).map_err(|e| Error::io(path, e))
}
