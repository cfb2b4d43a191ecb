//! Similarity transforms between landmark sets, warping and compositing.

use nalgebra::{Matrix2, Matrix2x3, Vector2};

use super::landmarks::LandmarkSet;
use crate::error::{Error, Result};
use crate::image_io::{ImageBuffer, Mask};

/// 2×3 matrix acting on pixel coordinates: `p ↦ A·p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineTransform(pub Matrix2x3<f64>);

impl AffineTransform {
    pub fn identity() -> Self {
        Self(Matrix2x3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0))
    }

    /// `scale·R(angle)` followed by a shift.
    pub fn similarity(scale: f64, angle: f64, shift: Vector2<f64>) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix2x3::new(scale * c, -scale * s, shift.x, scale * s, scale * c, shift.y))
    }

    pub fn linear(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn shift(&self) -> Vector2<f64> {
        self.0.column(2).into_owned()
    }

    pub fn apply(&self, p: &Vector2<f64>) -> Vector2<f64> {
        self.linear() * p + self.shift()
    }

    pub fn inverse(&self) -> Result<Self> {
        let a = self.linear();
        let det = a.determinant();
        if !(det.abs() > 1e-12) || !det.is_finite() {
            return Err(Error::numerical("affine transform has a singular linear part"));
        }
        let inv = a.try_inverse().ok_or_else(|| Error::numerical("affine transform has a singular linear part"))?;
        let t = -(inv * self.shift());
        let mut m = Matrix2x3::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&inv);
        m.set_column(2, &t);
        Ok(Self(m))
    }
}

/// Least-squares similarity mapping `src` onto `dst`.
///
/// With centered points as complex numbers the optimal `z = s·e^{iθ}` is
/// `Σ conj(p)·q / Σ |p|²`.
pub fn estimate_partial_affine(src: &LandmarkSet, dst: &LandmarkSet) -> Result<AffineTransform> {
    if src.len() != dst.len() || src.len() < 2 {
        return Err(Error::input("partial affine needs two or more corresponding points"));
    }
    let (cs, cd) = (src.centroid(), dst.centroid());
    let (mut re, mut im, mut den) = (0.0, 0.0, 0.0);
    for (p, q) in src.points.iter().zip(&dst.points) {
        let (p, q) = (p - cs, q - cd);
        re += p.x * q.x + p.y * q.y;
        im += p.x * q.y - p.y * q.x;
        den += p.norm_squared();
    }
    if !(den > 1e-18) {
        return Err(Error::input("source landmarks are all identical"));
    }
    let (a, b) = (re / den, im / den);
    let lin = Matrix2::new(a, -b, b, a);
    let t = cd - lin * cs;
    Ok(AffineTransform(Matrix2x3::new(a, -b, t.x, b, a, t.y)))
}

/// Bilinear sample with zero outside the image.
fn sample(img: &ImageBuffer, x: f64, y: f64) -> [f64; 3] {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let mut out = [0.0; 3];
    for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
        for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
            let w = wx * wy;
            if w == 0.0 {
                continue;
            }
            let (xi, yi) = (x0 as i64 + dx, y0 as i64 + dy);
            if xi < 0 || yi < 0 || xi >= img.width as i64 || yi >= img.height as i64 {
                continue;
            }
            let p = img.get(xi as usize, yi as usize);
            for c in 0..3 {
                out[c] += w * p[c];
            }
        }
    }
    out
}

/// Output pixel `p` takes the input at `M⁻¹·p`.
pub fn warp_affine(img: &ImageBuffer, m: &AffineTransform, width: usize, height: usize) -> Result<ImageBuffer> {
    let inv = m.inverse()?;
    let mut out = ImageBuffer::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let s = inv.apply(&Vector2::new(x as f64, y as f64));
            out.set(x, y, sample(img, s.x, s.y));
        }
    }
    Ok(out)
}

/// `mask ⊙ warp(face, m) + (1 − mask) ⊙ bg`.
pub fn composite(face: &ImageBuffer, m: &AffineTransform, mask: &Mask, bg: &ImageBuffer) -> Result<ImageBuffer> {
    if mask.width != bg.width || mask.height != bg.height {
        return Err(Error::input("mask and background sizes differ"));
    }
    let warped = warp_affine(face, m, bg.width, bg.height)?;
    let mut out = bg.clone();
    for y in 0..bg.height {
        for x in 0..bg.width {
            if mask.get(x, y) {
                out.set(x, y, warped.get(x, y));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, Vector4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(rng: &mut ChaCha8Rng, n: usize) -> LandmarkSet {
        LandmarkSet::new((0..n).map(|_| Vector2::new(rng.random_range(0.0..60.0), rng.random_range(0.0..60.0))).collect())
    }

    fn residual(m: &AffineTransform, src: &LandmarkSet, dst: &LandmarkSet) -> f64 {
        src.points.iter().zip(&dst.points).map(|(p, q)| (m.apply(p) - q).norm_squared()).sum()
    }

    fn smooth_image(w: usize, h: usize) -> ImageBuffer {
        let mut img = ImageBuffer::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
                img.set(x, y, [0.5 + 0.4 * (3.0 * u).sin() * (2.0 * v).cos(), u * v, 0.5 + 0.3 * (4.0 * v).sin()]);
            }
        }
        img
    }

    #[test]
    fn identity_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_set(&mut rng, 10);
        let m = estimate_partial_affine(&s, &s).unwrap();
        assert!((m.0 - AffineTransform::identity().0).abs().max() < 1e-12);
    }

    #[test]
    fn recovers_quarter_turn_and_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let src = random_set(&mut rng, 12);
        let c = src.centroid();
        let dst = LandmarkSet::new(
            src.points
                .iter()
                .map(|p| {
                    let d = p - c;
                    c + Vector2::new(-d.y, d.x) + Vector2::new(1.0, 2.0)
                })
                .collect(),
        );
        let m = estimate_partial_affine(&src, &dst).unwrap();
        assert!((m.linear() - Matrix2::new(0.0, -1.0, 1.0, 0.0)).abs().max() < 1e-12);
        assert!(residual(&m, &src, &dst) < 1e-9);
    }

    #[test]
    fn matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let src = random_set(&mut rng, 15);
            let dst = random_set(&mut rng, 15);
            let m = estimate_partial_affine(&src, &dst).unwrap();
            // Unknowns (a, b, tx, ty): x' = a x − b y + tx, y' = b x + a y + ty.
            let mut ata = Matrix4::zeros();
            let mut atb = Vector4::zeros();
            for (p, q) in src.points.iter().zip(&dst.points) {
                let rows = [(Vector4::new(p.x, -p.y, 1.0, 0.0), q.x), (Vector4::new(p.y, p.x, 0.0, 1.0), q.y)];
                for (r, v) in rows {
                    ata += r * r.transpose();
                    atb += r * v;
                }
            }
            let z = ata.lu().solve(&atb).unwrap();
            let oracle = AffineTransform(Matrix2x3::new(z[0], -z[1], z[2], z[1], z[0], z[3]));
            assert!((residual(&m, &src, &dst) - residual(&oracle, &src, &dst)).abs() < 1e-9);
            assert!((m.0 - oracle.0).abs().max() < 1e-9);
        }
    }

    #[test]
    fn coincident_source_rejected() {
        let src = LandmarkSet::new(vec![Vector2::new(3.0, 3.0); 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(estimate_partial_affine(&src, &random_set(&mut rng, 4)).is_err());
    }

    #[test]
    fn identity_warp_is_exact() {
        let img = smooth_image(20, 16);
        assert_eq!(warp_affine(&img, &AffineTransform::identity(), 20, 16).unwrap(), img);
    }

    #[test]
    fn integer_shift_is_exact() {
        let img = smooth_image(20, 16);
        let m = AffineTransform::similarity(1.0, 0.0, Vector2::new(3.0, -2.0));
        let out = warp_affine(&img, &m, 20, 16).unwrap();
        for y in 0..16 {
            for x in 0..20 {
                let (sx, sy) = (x as i64 - 3, y as i64 + 2);
                let want = if sx >= 0 && sy < 16 { img.get(sx as usize, sy as usize) } else { [0.0; 3] };
                assert_eq!(out.get(x, y), want);
            }
        }
    }

    #[test]
    fn warp_round_trip_on_smooth_image() {
        let img = smooth_image(64, 64);
        // Mild zoom and turn about the image center so the content stays in frame.
        let c = Vector2::new(31.5, 31.5);
        let spin = AffineTransform::similarity(1.1, 0.2, Vector2::zeros());
        let m = AffineTransform::similarity(1.1, 0.2, c - spin.apply(&c) + Vector2::new(-1.5, 1.0));
        let back = warp_affine(&warp_affine(&img, &m, 64, 64).unwrap(), &m.inverse().unwrap(), 64, 64).unwrap();
        let mut worst = 0.0f64;
        // Compare only where the forward warp kept the content inside the frame.
        for y in 14..50 {
            for x in 14..50 {
                for c in 0..3 {
                    worst = worst.max((back.get(x, y)[c] - img.get(x, y)[c]).abs());
                }
            }
        }
        assert!(worst < 0.02, "{worst}");
    }

    #[test]
    fn singular_warp_fails() {
        let m = AffineTransform(Matrix2x3::new(1.0, 2.0, 0.0, 2.0, 4.0, 0.0));
        assert!(warp_affine(&ImageBuffer::new(4, 4), &m, 4, 4).is_err());
    }

    #[test]
    fn composite_cases() {
        let face = ImageBuffer::filled(8, 8, [1.0, 0.0, 0.0]);
        let bg = ImageBuffer::filled(8, 8, [0.0, 0.0, 1.0]);
        let id = AffineTransform::identity();
        assert_eq!(composite(&face, &id, &Mask::new(8, 8), &bg).unwrap(), bg);
        assert_eq!(composite(&face, &id, &Mask::full(8, 8), &bg).unwrap(), face);
        let mut half = Mask::new(8, 8);
        for y in 0..8 {
            for x in 0..4 {
                half.set(x, y, true);
            }
        }
        let out = composite(&face, &id, &half, &bg).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(out.get(x, y), if x < 4 { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] });
            }
        }
    }
}
