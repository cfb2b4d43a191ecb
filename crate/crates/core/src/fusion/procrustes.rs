//! Shape disparity after removing translation, scale and rotation.

use nalgebra::{Matrix2, Vector2};

use super::landmarks::LandmarkSet;
use crate::error::{Error, Result};

pub const DEFAULT_GATE: f64 = 0.01;

/// Centered copy scaled to unit Frobenius norm.
fn normalize(pts: &[Vector2<f64>]) -> Result<Vec<Vector2<f64>>> {
    let c = pts.iter().sum::<Vector2<f64>>() / pts.len() as f64;
    let centered: Vec<Vector2<f64>> = pts.iter().map(|p| p - c).collect();
    let norm = centered.iter().map(|p| p.norm_squared()).sum::<f64>().sqrt();
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &centered {
        sxx += p.x * p.x;
        sxy += p.x * p.y;
        syy += p.y * p.y;
    }
    // Collinear sets have a rank-one scatter matrix.
    if !(norm > 1e-12) || (sxx * syy - sxy * sxy) <= 1e-12 * (sxx + syy) * (sxx + syy) {
        return Err(Error::input("degenerate landmark set (coincident or collinear points)"));
    }
    Ok(centered.into_iter().map(|p| p / norm).collect())
}

/// RMS distance between the two normalized sets after the best orthogonal
/// alignment of `b` onto `a`. Symmetric in its arguments.
pub fn procrustes_disparity(a: &LandmarkSet, b: &LandmarkSet) -> Result<f64> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(Error::input(format!(
            "landmark sets need equal sizes of at least 3, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (normalize(&a.points)?, normalize(&b.points)?);
    // Best rotation and best reflection of `b` onto `a`, each in closed form.
    let (mut e, mut f, mut g, mut k) = (0.0, 0.0, 0.0, 0.0);
    for (p, q) in na.iter().zip(&nb) {
        e += p.x * q.x + p.y * q.y;
        f += p.y * q.x - p.x * q.y;
        g += p.x * q.x - p.y * q.y;
        k += p.x * q.y + p.y * q.x;
    }
    let (rot, refl) = (e.hypot(f), g.hypot(k));
    let map = if rot >= refl {
        let (c, s) = if rot > 0.0 { (e / rot, f / rot) } else { (1.0, 0.0) };
        Matrix2::new(c, -s, s, c)
    } else {
        Matrix2::new(g / refl, k / refl, k / refl, -g / refl)
    };
    // Summing explicit residuals avoids the cancellation in 2 - 2·trace.
    let sq: f64 = na.iter().zip(&nb).map(|(p, q)| (p - map * q).norm_squared()).sum();
    Ok((sq / a.len() as f64).sqrt())
}

/// Fusion proceeds only when the disparity is strictly below the threshold.
pub fn gate(disparity: f64, threshold: f64) -> bool {
    disparity < threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(rng: &mut ChaCha8Rng, n: usize) -> LandmarkSet {
        LandmarkSet::new((0..n).map(|_| Vector2::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))).collect())
    }

    // Independent version: explicit SVD of the cross-covariance.
    fn dense(a: &LandmarkSet, b: &LandmarkSet) -> f64 {
        let prep = |s: &LandmarkSet| {
            let c = s.centroid();
            let m = nalgebra::DMatrix::from_fn(s.len(), 2, |i, j| s.points[i][j] - c[j]);
            let n = m.norm();
            m / n
        };
        let (ma, mb) = (prep(a), prep(b));
        let svd = (mb.transpose() * &ma).svd(true, true);
        let r = svd.u.unwrap() * svd.v_t.unwrap();
        let diff = ma - mb * r;
        (diff.norm_squared() / a.len() as f64).sqrt()
    }

    #[test]
    fn identical_sets_have_zero_disparity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_set(&mut rng, 20);
        assert!(procrustes_disparity(&a, &a).unwrap() < 1e-9);
    }

    #[test]
    fn similarity_images_have_zero_disparity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_set(&mut rng, 30);
        let r = Rotation2::new(1.1);
        let b = LandmarkSet::new(a.points.iter().map(|p| r * p * 2.5 + Vector2::new(-4.0, 9.0)).collect());
        assert!(procrustes_disparity(&a, &b).unwrap() < 1e-9);
    }

    #[test]
    fn matches_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_set(&mut rng, 68);
            let b = LandmarkSet::new(a.points.iter().map(|p| Matrix2::new(1.0, 0.2, -0.1, 0.9) * p + Vector2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect());
            let d = procrustes_disparity(&a, &b).unwrap();
            assert!((d - dense(&a, &b)).abs() < 1e-9, "{d} vs {}", dense(&a, &b));
        }
    }

    #[test]
    fn degenerate_sets_rejected() {
        let line = LandmarkSet::new((0..5).map(|i| Vector2::new(i as f64, 2.0 * i as f64)).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ok = random_set(&mut rng, 5);
        assert!(procrustes_disparity(&line, &ok).is_err());
        assert!(procrustes_disparity(&ok, &random_set(&mut rng, 6)).is_err());
    }

    #[test]
    fn gate_boundary_skips() {
        assert!(gate(0.005, DEFAULT_GATE));
        assert!(!gate(0.02, DEFAULT_GATE));
        assert!(!gate(0.01, DEFAULT_GATE));
    }

    proptest! {
        #[test]
        fn symmetric(seed in 0u64..1000, n in 3usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_set(&mut rng, n);
            let b = random_set(&mut rng, n);
            let (ab, ba) = (procrustes_disparity(&a, &b).unwrap(), procrustes_disparity(&b, &a).unwrap());
            prop_assert!((ab - ba).abs() < 1e-12);
        }
    }
}
