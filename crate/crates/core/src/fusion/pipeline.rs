//! The full face fusion chain: gate, align, mask, blend.

use super::affine::{estimate_partial_affine, warp_affine, AffineTransform};
use super::hull::convex_hull_mask;
use super::landmarks::LandmarkSet;
use super::poisson::poisson_blend;
use super::procrustes::{gate, procrustes_disparity};
use crate::error::{Error, Result};
use crate::image_io::{ImageBuffer, Mask};

#[derive(Clone, Debug, PartialEq)]
pub enum FuseStatus {
    Fused { disparity: f64 },
    /// Neither eye group of the rendered head was confidently detected.
    NotFrontFacing,
    /// Landmarks span no area, or the hull misses the image interior.
    Degenerate,
    /// Disparity at or above the threshold.
    Gated { disparity: f64 },
}

#[derive(Clone, Debug)]
pub struct FuseOutcome {
    /// The blended frame, or the untouched original when fusion was skipped.
    pub image: ImageBuffer,
    pub status: FuseStatus,
    pub transform: Option<AffineTransform>,
    pub mask: Option<Mask>,
}

/// Blends the rendered `head` into `orig` when the two landmark sets agree.
pub fn fuse_face(orig: &ImageBuffer, head: &ImageBuffer, l_orig: &LandmarkSet, l_head: &LandmarkSet, threshold: f64) -> Result<FuseOutcome> {
    if l_orig.len() != l_head.len() {
        return Err(Error::input(format!("landmark counts differ: {} vs {}", l_orig.len(), l_head.len())));
    }
    let skipped = |status| FuseOutcome {
        image: orig.clone(),
        status,
        transform: None,
        mask: None,
    };
    if !l_head.is_front_facing() {
        return Ok(skipped(FuseStatus::NotFrontFacing));
    }
    let disparity = match procrustes_disparity(l_orig, l_head) {
        Ok(d) => d,
        Err(Error::Input(_)) => return Ok(skipped(FuseStatus::Degenerate)),
        Err(e) => return Err(e),
    };
    if !gate(disparity, threshold) {
        return Ok(skipped(FuseStatus::Gated { disparity }));
    }
    let m = estimate_partial_affine(l_head, l_orig)?;
    let warped = warp_affine(head, &m, orig.width, orig.height)?;
    let hull = convex_hull_mask(&l_orig.points, orig.width, orig.height);
    let mut mask = hull.mask;
    // The blend needs a Dirichlet ring, so the outermost pixels never join the region.
    for y in 0..mask.height {
        for x in 0..mask.width {
            if x == 0 || y == 0 || x + 1 == mask.width || y + 1 == mask.height {
                mask.set(x, y, false);
            }
        }
    }
    if hull.collinear || mask.is_empty() {
        return Ok(skipped(FuseStatus::Degenerate));
    }
    let image = poisson_blend(&warped, orig, &mask)?;
    Ok(FuseOutcome {
        image,
        status: FuseStatus::Fused { disparity },
        transform: Some(m),
        mask: Some(mask),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::landmarks::FACE_LANDMARKS;
    use nalgebra::Vector2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn face(rng: &mut ChaCha8Rng, center: Vector2<f64>, radius: f64) -> LandmarkSet {
        LandmarkSet::new(
            (0..FACE_LANDMARKS)
                .map(|i| {
                    let a = i as f64 * 0.7;
                    let r = radius * (0.3 + 0.7 * ((i * 37 % 68) as f64 / 68.0)) + rng.random_range(-0.01..0.01);
                    center + Vector2::new(a.cos(), a.sin()) * r
                })
                .collect(),
        )
    }

    #[test]
    fn similar_faces_are_fused() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l_orig = face(&mut rng, Vector2::new(32.0, 30.0), 18.0);
        let m = AffineTransform::similarity(0.8, 0.3, Vector2::new(3.0, -2.0));
        let l_head = LandmarkSet::new(l_orig.points.iter().map(|p| m.apply(p)).collect());
        let orig = ImageBuffer::filled(64, 64, [0.2, 0.2, 0.2]);
        let head = ImageBuffer::filled(64, 64, [0.9, 0.5, 0.4]);
        let out = fuse_face(&orig, &head, &l_orig, &l_head, 0.01).unwrap();
        assert!(matches!(out.status, FuseStatus::Fused { .. }));
        let back = out.transform.unwrap().apply(&l_head.points[5]);
        assert!((back - l_orig.points[5]).norm() < 1e-9);
        assert_eq!(out.image.get(0, 0), orig.get(0, 0));
    }

    #[test]
    fn skip_reasons() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l_orig = face(&mut rng, Vector2::new(32.0, 32.0), 15.0);
        let other = face(&mut rng, Vector2::new(32.0, 32.0), 15.0);
        let mut l_head = LandmarkSet::new(l_orig.points.iter().rev().copied().collect());
        let img = ImageBuffer::new(64, 64);
        let out = fuse_face(&img, &img, &l_orig, &l_head, 0.01).unwrap();
        assert!(matches!(out.status, FuseStatus::Gated { .. }));
        for c in &mut l_head.confidence {
            *c = 0.1;
        }
        assert_eq!(fuse_face(&img, &img, &l_orig, &l_head, 0.01).unwrap().status, FuseStatus::NotFrontFacing);
        let line = LandmarkSet::new((0..FACE_LANDMARKS).map(|i| Vector2::new(i as f64, 1.0)).collect());
        assert_eq!(fuse_face(&img, &img, &line, &other, 0.01).unwrap().status, FuseStatus::Degenerate);
    }
}
