//! Projection, front-to-back compositing and its analytic backward pass.
//!
//! Splats are sorted globally by view depth and splatted one after another
//! into per-pixel color/transmittance buffers, which is exactly per-pixel
//! front-to-back compositing. The footprint is a Gaussian in pixel space with
//! a C1 taper that reaches zero at 3σ so that the truncation does not create
//! jumps in the rendered image.

use std::cmp::Ordering;

use nalgebra::Vector3;

use super::camera::Camera;
use super::gaussian::{sigmoid, GaussianSet, ShCoeffs};
use super::sh::{basis_with_grad, coeff_count, MAX_SH_DEGREE, SH_COEFFS};
use crate::image_io::ImageBuffer;

pub const NEAR_PLANE: f64 = 0.01;
pub const CUTOFF_SIGMA: f64 = 3.0;

const CUTOFF_Q: f64 = CUTOFF_SIGMA * CUTOFF_SIGMA;
// exp(-CUTOFF_Q / 2)
const TAIL: f64 = 0.011_108_996_538_242_306;
const KERNEL_NORM: f64 = 1.0 - TAIL * (1.0 + CUTOFF_Q / 2.0);

/// Footprint weight as a function of `q = d² / σ²` and its derivative in `q`.
///
/// `exp(-q/2)` minus its first-order expansion at the cutoff, renormalized so
/// that the weight is 1 at the center.
#[inline]
pub fn footprint(q: f64) -> (f64, f64) {
    if q >= CUTOFF_Q {
        return (0.0, 0.0);
    }
    let e = (-0.5 * q).exp();
    let k = (e - TAIL * (1.0 + 0.5 * (CUTOFF_Q - q))) / KERNEL_NORM;
    let dk = 0.5 * (TAIL - e) / KERNEL_NORM;
    (k.max(0.0), dk)
}

/// A Gaussian after projection to the image plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Splat2D {
    pub index: usize,
    pub mean: [f64; 2],
    pub std: f64,
    pub depth: f64,
}

/// Projects every splat in front of the near plane.
pub fn project(g: &GaussianSet, cam: &Camera) -> Vec<Splat2D> {
    let f = cam.focal();
    g.positions
        .iter()
        .enumerate()
        .filter_map(|(index, p)| {
            let pc = cam.to_camera(p);
            if !(pc.z > NEAR_PLANE) {
                return None;
            }
            Some(Splat2D {
                index,
                mean: cam.project_camera_point(&pc),
                std: f * g.log_scales[index].exp() / pc.z,
                depth: pc.z,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
struct Projected {
    splat: Splat2D,
    cam_point: Vector3<f64>,
    opacity: f64,
    color_raw: [f64; 3],
    color: [f64; 3],
    /// Unnormalized view vector `p - camera_center`.
    view: Vector3<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    pixel: u32,
    slot: u32,
    alpha: f64,
    trans: f64,
}

/// Forward render with everything needed for the backward pass.
#[derive(Clone, Debug)]
pub struct Rendered {
    /// Output image, clamped to [0, 1].
    pub image: ImageBuffer,
    /// Unclamped composited color.
    pub raw: Vec<f64>,
    /// Accumulated opacity `1 - T` per pixel.
    pub coverage: Vec<f64>,
    /// Alpha-weighted mean view depth; NaN where nothing was hit.
    pub depth: Vec<f64>,
    pub sh_degree: usize,
    splats: Vec<Projected>,
    entries: Vec<Entry>,
}

/// Gradients of a scalar loss with respect to every splat parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianGrads {
    pub positions: Vec<Vector3<f64>>,
    pub log_scales: Vec<f64>,
    pub sh_coeffs: Vec<ShCoeffs>,
    pub opacity_logits: Vec<f64>,
    /// Gradient with respect to the projected pixel-space mean.
    pub mean2d: Vec<[f64; 2]>,
    /// Whether the splat touched at least one pixel.
    pub visible: Vec<bool>,
}

impl GaussianGrads {
    pub fn zeros(n: usize) -> Self {
        Self {
            positions: vec![Vector3::zeros(); n],
            log_scales: vec![0.0; n],
            sh_coeffs: vec![[[0.0; 3]; SH_COEFFS]; n],
            opacity_logits: vec![0.0; n],
            mean2d: vec![[0.0; 2]; n],
            visible: vec![false; n],
        }
    }
}

fn compare_splats(a: &Projected, b: &Projected) -> Ordering {
    a.splat
        .depth
        .total_cmp(&b.splat.depth)
        .then(a.splat.mean[0].total_cmp(&b.splat.mean[0]))
        .then(a.splat.mean[1].total_cmp(&b.splat.mean[1]))
        .then(a.splat.std.total_cmp(&b.splat.std))
        .then(a.opacity.total_cmp(&b.opacity))
        .then(a.color_raw[0].total_cmp(&b.color_raw[0]))
        .then(a.color_raw[1].total_cmp(&b.color_raw[1]))
        .then(a.color_raw[2].total_cmp(&b.color_raw[2]))
        .then(a.splat.index.cmp(&b.splat.index))
}

#[inline]
fn pixel_range(center: f64, reach: f64, size: usize) -> Option<(usize, usize)> {
    let lo = (center - reach - 0.5).ceil().max(0.0);
    let hi = (center + reach - 0.5).floor().min(size as f64 - 1.0);
    if !(lo <= hi) {
        return None;
    }
    Some((lo as usize, hi as usize))
}

/// Renders the scene. `sh_degree` is clamped to 3. Background is black.
pub fn render(g: &GaussianSet, cam: &Camera, sh_degree: usize) -> Rendered {
    let sh_degree = sh_degree.min(MAX_SH_DEGREE);
    let center = cam.center();
    let mut splats: Vec<Projected> = project(g, cam)
        .into_iter()
        .map(|splat| {
            let p = g.positions[splat.index];
            let view = p - center;
            let dir = view / view.norm();
            let (basis, _) = basis_with_grad(&dir);
            let coeffs = &g.sh_coeffs[splat.index];
            let mut color_raw = [0.5; 3];
            for (k, b) in basis.iter().enumerate().take(coeff_count(sh_degree)) {
                for c in 0..3 {
                    color_raw[c] += b * coeffs[k][c];
                }
            }
            Projected {
                splat,
                cam_point: cam.to_camera(&p),
                opacity: sigmoid(g.opacity_logits[splat.index]),
                color: color_raw.map(|v| v.max(0.0)),
                color_raw,
                view,
            }
        })
        .collect();
    splats.sort_by(compare_splats);

    let (w, h) = (cam.width, cam.height);
    let mut raw = vec![0.0; w * h * 3];
    let mut trans = vec![1.0; w * h];
    let mut depth_acc = vec![0.0; w * h];
    let mut entries = Vec::new();

    for (slot, s) in splats.iter().enumerate() {
        let [u, v] = s.splat.mean;
        let sigma = s.splat.std;
        if !(sigma > 0.0) || s.opacity <= 0.0 {
            continue;
        }
        let reach = CUTOFF_SIGMA * sigma;
        let (Some((x0, x1)), Some((y0, y1))) = (pixel_range(u, reach, w), pixel_range(v, reach, h)) else {
            continue;
        };
        let inv_var = 1.0 / (sigma * sigma);
        for y in y0..=y1 {
            let dy = y as f64 + 0.5 - v;
            for x in x0..=x1 {
                let dx = x as f64 + 0.5 - u;
                let q = (dx * dx + dy * dy) * inv_var;
                let (k, _) = footprint(q);
                let alpha = s.opacity * k;
                if alpha <= 0.0 {
                    continue;
                }
                let pix = y * w + x;
                let t = trans[pix];
                let wgt = alpha * t;
                for c in 0..3 {
                    raw[pix * 3 + c] += s.color[c] * wgt;
                }
                depth_acc[pix] += s.splat.depth * wgt;
                trans[pix] = t * (1.0 - alpha);
                entries.push(Entry {
                    pixel: pix as u32,
                    slot: slot as u32,
                    alpha,
                    trans: t,
                });
            }
        }
    }

    let coverage: Vec<f64> = trans.iter().map(|t| 1.0 - t).collect();
    let depth = depth_acc
        .iter()
        .zip(&coverage)
        .map(|(d, a)| if *a > 0.0 { d / a } else { f64::NAN })
        .collect();
    let mut image = ImageBuffer {
        width: w,
        height: h,
        data: raw.clone(),
    };
    image.clamp01();
    Rendered {
        image,
        raw,
        coverage,
        depth,
        sh_degree,
        splats,
        entries,
    }
}

/// Renders the scene to an image in [0, 1].
pub fn rasterize(g: &GaussianSet, cam: &Camera, sh_degree: usize) -> ImageBuffer {
    render(g, cam, sh_degree).image
}

impl Rendered {
    /// Backpropagates `grad_image` (dL/d output pixel) to splat parameters.
    ///
    /// Pixels whose unclamped value lies outside [0, 1] pass no gradient,
    /// matching the output clamp.
    pub fn backward(&self, g: &GaussianSet, cam: &Camera, grad_image: &ImageBuffer) -> GaussianGrads {
        let n = g.len();
        let (w, h) = (cam.width, cam.height);
        assert_eq!((grad_image.width, grad_image.height), (w, h), "gradient image size mismatch");
        let mut grads = GaussianGrads::zeros(n);

        let gpix: Vec<f64> = grad_image
            .data
            .iter()
            .zip(&self.raw)
            .map(|(gv, rv)| if (0.0..=1.0).contains(rv) { *gv } else { 0.0 })
            .collect();

        let m = self.splats.len();
        let mut d_color = vec![[0.0; 3]; m];
        let mut d_mean = vec![[0.0; 2]; m];
        let mut d_std = vec![0.0; m];
        let mut d_opacity = vec![0.0; m];
        let mut touched = vec![false; m];
        let mut behind = vec![0.0; w * h * 3];

        for e in self.entries.iter().rev() {
            let pix = e.pixel as usize;
            let slot = e.slot as usize;
            let s = &self.splats[slot];
            touched[slot] = true;
            let gp = &gpix[pix * 3..pix * 3 + 3];
            let b = &mut behind[pix * 3..pix * 3 + 3];
            let wgt = e.alpha * e.trans;
            let mut d_alpha = 0.0;
            for c in 0..3 {
                d_color[slot][c] += gp[c] * wgt;
                d_alpha += gp[c] * e.trans * (s.color[c] - b[c]);
                b[c] = s.color[c] * e.alpha + (1.0 - e.alpha) * b[c];
            }
            if d_alpha == 0.0 {
                continue;
            }
            let [u, v] = s.splat.mean;
            let sigma = s.splat.std;
            let x = (pix % w) as f64 + 0.5;
            let y = (pix / w) as f64 + 0.5;
            let inv_var = 1.0 / (sigma * sigma);
            let q = ((x - u) * (x - u) + (y - v) * (y - v)) * inv_var;
            let (k, dk) = footprint(q);
            d_opacity[slot] += d_alpha * k;
            let d_q = d_alpha * s.opacity * dk;
            d_mean[slot][0] += d_q * (-2.0 * (x - u) * inv_var);
            d_mean[slot][1] += d_q * (-2.0 * (y - v) * inv_var);
            d_std[slot] += d_q * (-2.0 * q / sigma);
        }

        let rt = cam.rotation.transpose();
        for (slot, s) in self.splats.iter().enumerate() {
            if !touched[slot] {
                continue;
            }
            let i = s.splat.index;
            grads.visible[i] = true;
            grads.mean2d[i] = d_mean[slot];
            grads.opacity_logits[i] = d_opacity[slot] * s.opacity * (1.0 - s.opacity);

            let pc = s.cam_point;
            let z = pc.z;
            let sigma = s.splat.std;
            grads.log_scales[i] = d_std[slot] * sigma;
            let [du, dv] = d_mean[slot];
            let d_cam = Vector3::new(
                du * cam.fx / z,
                dv * cam.fy / z,
                -d_std[slot] * sigma / z - du * cam.fx * pc.x / (z * z) - dv * cam.fy * pc.y / (z * z),
            );
            let mut d_pos = rt * d_cam;

            // color through SH, including its dependence on the view direction
            let dc = d_color[slot];
            let dc: [f64; 3] = std::array::from_fn(|c| if s.color_raw[c] >= 0.0 { dc[c] } else { 0.0 });
            if dc.iter().any(|v| *v != 0.0) {
                let norm = s.view.norm();
                let dir = s.view / norm;
                let (basis, bgrad) = basis_with_grad(&dir);
                let coeffs = &g.sh_coeffs[i];
                let mut d_dir = Vector3::zeros();
                for k in 0..coeff_count(self.sh_degree) {
                    for c in 0..3 {
                        grads.sh_coeffs[i][k][c] = basis[k] * dc[c];
                        let wk = coeffs[k][c] * dc[c];
                        d_dir += Vector3::new(bgrad[k][0], bgrad[k][1], bgrad[k][2]) * wk;
                    }
                }
                d_pos += (d_dir - dir * dir.dot(&d_dir)) / norm;
            }
            grads.positions[i] = d_pos;
        }
        grads
    }
}

/// Gradients of the scalar loss whose derivative with respect to the rendered image is `grad_image`.
pub fn rasterize_backward(
    g: &GaussianSet,
    cam: &Camera,
    sh_degree: usize,
    grad_image: &ImageBuffer,
) -> GaussianGrads {
    render(g, cam, sh_degree).backward(g, cam, grad_image)
}
