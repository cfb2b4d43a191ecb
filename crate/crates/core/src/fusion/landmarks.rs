//! Landmark sets in pixel coordinates (pixel `(x, y)` has its center at `(x, y)`).

use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index ranges of the two eye groups in the 68-point face layout.
pub const EYE_GROUPS: [std::ops::Range<usize>; 2] = [36..42, 42..48];
pub const FACE_LANDMARKS: usize = 68;
/// Mean eye-group confidence needed to call a face front-facing.
pub const EYE_CONFIDENCE: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkSet {
    pub points: Vec<Vector2<f64>>,
    /// Detection confidence per point, 1 when the source had none.
    pub confidence: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawPoint {
    Plain([f64; 2]),
    Scored([f64; 3]),
}

impl LandmarkSet {
    pub fn new(points: Vec<Vector2<f64>>) -> Self {
        let confidence = vec![1.0; points.len()];
        Self { points, confidence }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vector2<f64> {
        self.points.iter().sum::<Vector2<f64>>() / self.points.len().max(1) as f64
    }

    /// True when at least one eye group is present with mean confidence ≥ 0.5.
    pub fn is_front_facing(&self) -> bool {
        EYE_GROUPS.iter().any(|g| {
            g.end <= self.len() && self.confidence[g.clone()].iter().sum::<f64>() / g.len() as f64 >= EYE_CONFIDENCE
        })
    }

    /// Parses a JSON array of `[x, y]` or `[x, y, confidence]` entries.
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let raw: Vec<RawPoint> = serde_json::from_str(text)?;
        let (points, confidence) = raw
            .into_iter()
            .map(|r| match r {
                RawPoint::Plain([x, y]) => (Vector2::new(x, y), 1.0),
                RawPoint::Scored([x, y, c]) => (Vector2::new(x, y), c),
            })
            .unzip();
        Ok(Self { points, confidence })
    }

    pub fn to_json(&self) -> String {
        let raw: Vec<RawPoint> = self
            .points
            .iter()
            .zip(&self.confidence)
            .map(|(p, c)| RawPoint::Scored([p.x, p.y, *c]))
            .collect();
        serde_json::to_string(&raw).expect("serializable")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let set = Self::from_json(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            line: 1,
            source,
        })?;
        if set.points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(Error::input(format!("{}: non-finite landmark", path.display())));
        }
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_accepts_both_forms() {
        let s = LandmarkSet::from_json("[[1, 2], [3.5, 4, 0.25]]").unwrap();
        assert_eq!(s.points, vec![Vector2::new(1.0, 2.0), Vector2::new(3.5, 4.0)]);
        assert_eq!(s.confidence, vec![1.0, 0.25]);
        assert_eq!(LandmarkSet::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn one_visible_eye_is_enough() {
        let mut s = LandmarkSet::new(vec![Vector2::zeros(); FACE_LANDMARKS]);
        for c in &mut s.confidence {
            *c = 0.0;
        }
        assert!(!s.is_front_facing());
        for i in 42..48 {
            s.confidence[i] = 0.5;
        }
        assert!(s.is_front_facing());
        s.confidence[42] = 0.49;
        assert!(!s.is_front_facing());
        assert!(!LandmarkSet::new(vec![Vector2::zeros(); 10]).is_front_facing());
    }
}
