//! Temporal smoothing: Savitzky-Golay, quaternion sign continuity, exponential momentum.

use nalgebra::{DMatrix, DVector, Vector4};

/// Least-squares polynomial smoothing. Each output sample is the value at the
/// center of a degree-`order` fit over the `window` samples around it; near the
/// ends the window is truncated to the available samples and the degree is
/// lowered if fewer than `order + 1` remain.
pub fn savgol(series: &[f64], window: usize, order: usize) -> Vec<f64> {
    assert!(window % 2 == 1, "savgol window must be odd");
    assert!(order < window, "savgol order must be below the window length");
    let n = series.len();
    let half = window / 2;
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let lo = t.saturating_sub(half);
        let hi = (t + half).min(n - 1);
        let m = hi - lo + 1;
        let deg = order.min(m - 1);
        // Vandermonde in x = i - t, so the fitted value at t is the constant term
        let a = DMatrix::from_fn(m, deg + 1, |r, c| ((lo + r) as f64 - t as f64).powi(c as i32));
        let b = DVector::from_fn(m, |r, _| series[lo + r]);
        let coef = a.svd(true, true).solve(&b, 1e-14).expect("SVD solve");
        out.push(coef[0]);
    }
    out
}

/// Flips quaternions so consecutive ones lie in the same hemisphere.
pub fn quat_continuity(quats: &[Vector4<f64>]) -> Vec<Vector4<f64>> {
    let mut out: Vec<Vector4<f64>> = Vec::with_capacity(quats.len());
    for q in quats {
        match out.last() {
            Some(prev) if prev.dot(q) < 0.0 => out.push(-q),
            _ => out.push(*q),
        }
    }
    out
}

/// `y₀ = x₀`, `yₜ = α·yₜ₋₁ + (1 − α)·xₜ`, per column.
pub fn momentum_smooth(series: &[Vec<f64>], alpha: f64) -> Vec<Vec<f64>> {
    assert!(alpha > 0.0 && alpha <= 1.0, "momentum coefficient must lie in (0, 1]");
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(series.len());
    for x in series {
        let y = match out.last() {
            None => x.clone(),
            Some(prev) => prev.iter().zip(x).map(|(p, v)| alpha * p + (1.0 - alpha) * v).collect(),
        };
        out.push(y);
    }
    out
}

/// Momentum smoothing of rotations in quaternion form after the sign fix, renormalized.
pub fn momentum_smooth_quats(quats: &[Vector4<f64>], alpha: f64) -> Vec<Vector4<f64>> {
    let fixed = quat_continuity(quats);
    let rows: Vec<Vec<f64>> = fixed.iter().map(|q| q.iter().copied().collect()).collect();
    momentum_smooth(&rows, alpha)
        .iter()
        .map(|r| Vector4::new(r[0], r[1], r[2], r[3]).normalize())
        .collect()
}

/// Savitzky-Golay applied per quaternion component after the sign fix, renormalized.
pub fn savgol_quats(quats: &[Vector4<f64>], window: usize, order: usize) -> Vec<Vector4<f64>> {
    let fixed = quat_continuity(quats);
    let comps: Vec<Vec<f64>> = (0..4)
        .map(|c| savgol(&fixed.iter().map(|q| q[c]).collect::<Vec<_>>(), window, order))
        .collect();
    (0..quats.len())
        .map(|t| Vector4::new(comps[0][t], comps[1][t], comps[2][t], comps[3][t]).normalize())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reproduces_quadratics_everywhere() {
        let y: Vec<f64> = (0..30).map(|t| 0.3 * (t * t) as f64 - 2.0 * t as f64 + 7.0).collect();
        let s = savgol(&y, 9, 2);
        for (a, b) in y.iter().zip(&s) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_is_unchanged_even_when_short() {
        for n in 1..12 {
            let y = vec![4.5; n];
            assert!(savgol(&y, 9, 2).iter().all(|v| (v - 4.5).abs() < 1e-12));
        }
    }

    #[test]
    fn reduces_noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut wins = 0;
        for _ in 0..100 {
            let noise: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = noise.iter().enumerate().map(|(t, e)| 0.1 * t as f64 + e).collect();
            let s = savgol(&y, 9, 2);
            let var = |v: &[f64]| {
                let r: Vec<f64> = v.iter().enumerate().map(|(t, x)| x - 0.1 * t as f64).collect();
                let m = r.iter().sum::<f64>() / r.len() as f64;
                r.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / r.len() as f64
            };
            if var(&s) < var(&y) {
                wins += 1;
            }
        }
        assert_eq!(wins, 100);
    }

    #[test]
    fn continuity_flips_opposite_hemisphere() {
        let a = Vector4::new(1.0, 0.0, 0.0, 0.0);
        let b = Vector4::new(-0.99, 0.1, 0.0, 0.0).normalize();
        let out = quat_continuity(&[a, b]);
        assert_eq!(out[1], -b);
        assert!(out[0].dot(&out[1]) > 0.0);
    }

    #[test]
    fn momentum_step_response() {
        let k = 3;
        let xs: Vec<Vec<f64>> = (0..12).map(|t| vec![if t >= k { 1.0 } else { 0.0 }]).collect();
        let ys = momentum_smooth(&xs, 0.6);
        for t in k..12 {
            let want = 1.0 - 0.6f64.powi((t - k + 1) as i32);
            assert!((ys[t][0] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn momentum_without_memory_and_constants() {
        let xs: Vec<Vec<f64>> = (0..20).map(|t| vec![(t as f64).sin(), 2.0]).collect();
        let ys = momentum_smooth(&xs, 1e-9);
        for (x, y) in xs.iter().zip(&ys) {
            assert!((x[0] - y[0]).abs() < 1e-6);
            assert_eq!(y[1], 2.0);
        }
        let cs = vec![vec![0.7, -1.0]; 9];
        assert_eq!(momentum_smooth(&cs, 0.6), cs);
    }

    proptest! {
        #[test]
        fn savgol_is_linear(
            a in prop::collection::vec(-10.0f64..10.0, 1..40),
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b: Vec<f64> = a.iter().map(|_| rng.random_range(-10.0..10.0)).collect();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let (sa, sb, ss) = (savgol(&a, 9, 2), savgol(&b, 9, 2), savgol(&sum, 9, 2));
            for i in 0..a.len() {
                prop_assert!((ss[i] - sa[i] - sb[i]).abs() < 1e-9);
            }
        }

        #[test]
        fn continuity_postconditions(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..30)) {
            let qs: Vec<Vector4<f64>> = raw
                .iter()
                .map(|(w, x, y, z)| Vector4::new(*w, *x, *y, *z + 1e-3).normalize())
                .collect();
            let out = quat_continuity(&qs);
            for (o, q) in out.iter().zip(&qs) {
                prop_assert!(o == q || *o == -q);
            }
            for w in out.windows(2) {
                prop_assert!(w[0].dot(&w[1]) >= 0.0);
            }
        }
    }
}
