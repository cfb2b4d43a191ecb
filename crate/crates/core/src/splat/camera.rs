use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole camera with a rigid world-to-camera transform.
///
/// Camera space is +z forward, +y down in the image. Pixel `(x, y)` samples
/// the image-plane point `(x + 0.5, y + 0.5)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    /// Camera at the origin looking down +z with the principal point at the image center.
    pub fn identity(width: usize, height: usize, focal: f64) -> Self {
        Self {
            fx: focal,
            fy: focal,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
            width,
            height,
        }
    }

    /// Camera on the world +z axis at `distance`, looking back at the origin, world +y up.
    pub fn looking_at_origin(width: usize, height: usize, focal: f64, distance: f64, height_offset: f64) -> Self {
        let rotation = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
        // camera center c = (0, h, d); t = -R c
        let center = Vector3::new(0.0, height_offset, distance);
        Self {
            rotation,
            translation: -(rotation * center),
            ..Self::identity(width, height, focal)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::input(format!("camera focal lengths must be positive, got ({}, {})", self.fx, self.fy)));
        }
        let err = (self.rotation.transpose() * self.rotation - Matrix3::identity()).abs().max();
        if !(err < 1e-6) {
            return Err(Error::input(format!("camera rotation is not orthonormal (error {err:e})")));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::input("camera image size must be nonzero"));
        }
        Ok(())
    }

    /// Mean focal length used for isotropic screen-space footprints.
    #[inline]
    pub fn focal(&self) -> f64 {
        0.5 * (self.fx + self.fy)
    }

    #[inline]
    pub fn to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }

    /// Projects a camera-space point to pixel coordinates. No near-plane test.
    #[inline]
    pub fn project_camera_point(&self, pc: &Vector3<f64>) -> [f64; 2] {
        [self.fx * pc.x / pc.z + self.cx, self.fy * pc.y / pc.z + self.cy]
    }

    /// Applies a rigid world transform `x -> r x + t` to the scene, returning
    /// the camera that sees the transformed scene exactly as this one saw the original.
    pub fn moved_with_scene(&self, r: &Matrix3<f64>, t: &Vector3<f64>) -> Camera {
        let rotation = self.rotation * r.transpose();
        let translation = self.translation - rotation * t;
        Camera {
            rotation,
            translation,
            ..self.clone()
        }
    }
}

/// Serialized camera record (one JSON object per line in `cameras.jsonl`).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CameraRecord {
    pub frame: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    /// Row-major 3×3 world-to-camera rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl CameraRecord {
    pub fn from_camera(frame: usize, cam: &Camera) -> Self {
        let r = &cam.rotation;
        Self {
            frame,
            fx: cam.fx,
            fy: cam.fy,
            cx: cam.cx,
            cy: cam.cy,
            width: cam.width,
            height: cam.height,
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: [cam.translation.x, cam.translation.y, cam.translation.z],
        }
    }

    pub fn to_camera(&self) -> Camera {
        let r = &self.rotation;
        Camera {
            fx: self.fx,
            fy: self.fy,
            cx: self.cx,
            cy: self.cy,
            rotation: Matrix3::new(
                r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
            ),
            translation: Vector3::from(self.translation),
            width: self.width,
            height: self.height,
        }
    }
}
