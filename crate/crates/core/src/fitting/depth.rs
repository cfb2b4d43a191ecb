use crate::error::{Error, Result};
use crate::image_io::Mask;

fn fg_stats(d: &[f64], fg: &Mask) -> Result<(f64, f64)> {
    let vals: Vec<f64> = d.iter().zip(&fg.data).filter(|(_, m)| **m).map(|(v, _)| *v).collect();
    if vals.is_empty() {
        return Err(Error::input("depth alignment needs a non-empty foreground"));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("depth is not finite on the foreground"));
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Affinely maps `pred` so its foreground mean and standard deviation equal those of `reference`:
/// `(pred − μ_pred)·σ_ref/σ_pred + μ_ref`, applied to every pixel.
pub fn align_depth(pred: &[f64], reference: &[f64], fg: &Mask) -> Result<Vec<f64>> {
    if pred.len() != fg.data.len() || reference.len() != fg.data.len() {
        return Err(Error::input("depth maps and mask differ in size"));
    }
    let (mp, sp) = fg_stats(pred, fg)?;
    let (mr, sr) = fg_stats(reference, fg)?;
    if sp == 0.0 {
        return Err(Error::numerical("predicted depth has zero variance on the foreground"));
    }
    let k = sr / sp;
    Ok(pred.iter().map(|v| (v - mp) * k + mr).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mask(n: usize) -> Mask {
        let mut m = Mask::new(n, 1);
        for i in 0..n {
            m.set(i, 0, i % 3 != 0);
        }
        m
    }

    #[test]
    fn identity_and_affine_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r: Vec<f64> = (0..40).map(|_| rng.random_range(1.0..4.0)).collect();
        let m = mask(40);
        let same = align_depth(&r, &r, &m).unwrap();
        for (a, b) in same.iter().zip(&r) {
            assert!((a - b).abs() < 1e-12);
        }
        let p: Vec<f64> = r.iter().map(|v| 2.0 * v + 5.0).collect();
        let out = align_depth(&p, &r, &m).unwrap();
        for i in 0..40 {
            if m.data[i] {
                assert!((out[i] - r[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn statistics_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r: Vec<f64> = (0..50).map(|_| rng.random_range(1.0..4.0)).collect();
        let p: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..9.0)).collect();
        let m = mask(50);
        let out = align_depth(&p, &r, &m).unwrap();
        let (a, b) = (fg_stats(&out, &m).unwrap(), fg_stats(&r, &m).unwrap());
        assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
    }

    #[test]
    fn flat_prediction_is_an_error() {
        let m = mask(10);
        assert!(align_depth(&[2.0; 10], &[1.0; 10], &m).is_err());
    }
}
