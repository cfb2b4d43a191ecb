//! Gradient-domain blending by red-black over-relaxed Gauss-Seidel.

use crate::error::{Error, Result};
use crate::image_io::{ImageBuffer, Mask};

pub const SOR_OMEGA: f64 = 1.9;
/// Stop once the largest equation residual falls below this.
pub const SOLVE_TOLERANCE: f64 = 1e-9;
/// Lower bound on the sweep cap, which otherwise scales with the region size.
pub const MIN_SWEEPS: usize = 1000;

struct Unknown {
    pixel: usize,
    neighbors: [usize; 4],
    red: bool,
}

fn unknowns(mask: &Mask) -> Result<Vec<Unknown>> {
    let (w, h) = (mask.width, mask.height);
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                return Err(Error::input("blend mask touches the image border"));
            }
            let p = y * w + x;
            out.push(Unknown {
                pixel: p,
                neighbors: [p - 1, p + 1, p - w, p + w],
                red: (x + y) % 2 == 0,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::input("blend mask is empty"));
    }
    Ok(out)
}

fn laplacian_at(f: &[f64], u: &Unknown) -> f64 {
    4.0 * f[u.pixel] - u.neighbors.iter().map(|&n| f[n]).sum::<f64>()
}

/// Largest |Δresult − Δsrc| over masked pixels, all channels.
pub fn poisson_residual(result: &ImageBuffer, src: &ImageBuffer, mask: &Mask) -> Result<f64> {
    let us = unknowns(mask)?;
    let mut worst = 0.0f64;
    for c in 0..3 {
        let (f, g) = (result.channel(c), src.channel(c));
        for u in &us {
            worst = worst.max((laplacian_at(&f, u) - laplacian_at(&g, u)).abs());
        }
    }
    Ok(worst)
}

fn solve_channel(us: &[Unknown], f: &mut [f64], g: &[f64], cap: usize) -> Result<()> {
    let rhs: Vec<f64> = us.iter().map(|u| laplacian_at(g, u)).collect();
    let residual = |f: &[f64]| us.iter().zip(&rhs).fold(0.0f64, |m, (u, b)| m.max((laplacian_at(f, u) - b).abs()));
    for sweep in 0..=cap {
        if sweep % 10 == 0 && residual(f) < SOLVE_TOLERANCE {
            return Ok(());
        }
        for red in [true, false] {
            for (u, b) in us.iter().zip(&rhs) {
                if u.red != red {
                    continue;
                }
                let gs = (u.neighbors.iter().map(|&n| f[n]).sum::<f64>() + b) / 4.0;
                f[u.pixel] += SOR_OMEGA * (gs - f[u.pixel]);
            }
        }
    }
    if residual(f) < SOLVE_TOLERANCE {
        return Ok(());
    }
    Err(Error::numerical(format!("Poisson solve did not converge in {cap} sweeps")))
}

/// Inside the mask the result has the 4-neighbor Laplacian of `src`; elsewhere it is `dst`.
pub fn poisson_blend(src: &ImageBuffer, dst: &ImageBuffer, mask: &Mask) -> Result<ImageBuffer> {
    if !src.same_size(dst) || mask.width != dst.width || mask.height != dst.height {
        return Err(Error::input("source, destination and mask sizes differ"));
    }
    let us = unknowns(mask)?;
    let cap = (10 * us.len()).max(MIN_SWEEPS);
    let solved: Vec<Result<Vec<f64>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..3)
            .map(|c| {
                let us = &us;
                s.spawn(move || {
                    let mut f = dst.channel(c);
                    solve_channel(us, &mut f, &src.channel(c), cap).map(|_| f)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let mut out = dst.clone();
    for (c, ch) in solved.into_iter().enumerate() {
        let ch = ch?;
        for u in &us {
            out.data[u.pixel * 3 + c] = ch[u.pixel];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ImageBuffer {
        let mut img = ImageBuffer::new(w, h);
        for v in &mut img.data {
            *v = rng.random();
        }
        img
    }

    fn rect_mask(w: usize, h: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> Mask {
        let mut m = Mask::new(w, h);
        for y in y0..=y1 {
            for x in x0..=x1 {
                m.set(x, y, true);
            }
        }
        m
    }

    #[test]
    fn matching_source_leaves_destination() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dst = random_image(&mut rng, 16, 16);
        let mut src = random_image(&mut rng, 16, 16);
        let mask = rect_mask(16, 16, 4, 4, 11, 10);
        // Equal on the region and its one-pixel ring.
        for y in 3..=11 {
            for x in 3..=12 {
                src.set(x, y, dst.get(x, y));
            }
        }
        assert_eq!(poisson_blend(&src, &dst, &mask).unwrap(), dst);
    }

    #[test]
    fn constant_inputs_give_destination() {
        let src = ImageBuffer::filled(12, 12, [0.2, 0.3, 0.4]);
        let dst = ImageBuffer::filled(12, 12, [0.9, 0.1, 0.5]);
        assert_eq!(poisson_blend(&src, &dst, &rect_mask(12, 12, 2, 2, 9, 9)).unwrap(), dst);
    }

    #[test]
    fn agrees_with_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (w, h) = (12, 12);
        let src = random_image(&mut rng, w, h);
        let dst = random_image(&mut rng, w, h);
        let mask = rect_mask(w, h, 2, 2, 9, 9);
        let out = poisson_blend(&src, &dst, &mask).unwrap();
        let us = unknowns(&mask).unwrap();
        let index: std::collections::HashMap<usize, usize> = us.iter().enumerate().map(|(i, u)| (u.pixel, i)).collect();
        for c in 0..3 {
            let (f, g) = (dst.channel(c), src.channel(c));
            let mut a = DMatrix::zeros(us.len(), us.len());
            let mut b = DVector::zeros(us.len());
            for (i, u) in us.iter().enumerate() {
                a[(i, i)] = 4.0;
                b[i] = laplacian_at(&g, u);
                for &n in &u.neighbors {
                    match index.get(&n) {
                        Some(&j) => a[(i, j)] = -1.0,
                        None => b[i] += f[n],
                    }
                }
            }
            let x = a.lu().solve(&b).unwrap();
            for (i, u) in us.iter().enumerate() {
                assert!((out.data[u.pixel * 3 + c] - x[i]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn residual_small_and_outside_untouched() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let src = random_image(&mut rng, 32, 32);
        let dst = random_image(&mut rng, 32, 32);
        let mut mask = Mask::new(32, 32);
        for y in 1..31 {
            for x in 1..31 {
                let (dx, dy) = (x as f64 - 15.5, y as f64 - 15.5);
                mask.set(x, y, dx * dx + dy * dy < 150.0);
            }
        }
        let out = poisson_blend(&src, &dst, &mask).unwrap();
        assert!(poisson_residual(&out, &src, &mask).unwrap() < 1e-6);
        for y in 0..32 {
            for x in 0..32 {
                if !mask.get(x, y) {
                    assert_eq!(out.get(x, y), dst.get(x, y));
                }
            }
        }
    }

    #[test]
    fn border_and_empty_masks_rejected() {
        let img = ImageBuffer::new(8, 8);
        assert!(poisson_blend(&img, &img, &rect_mask(8, 8, 0, 2, 3, 4)).is_err());
        assert!(poisson_blend(&img, &img, &Mask::new(8, 8)).is_err());
        let single = rect_mask(8, 8, 3, 3, 3, 3);
        assert!(poisson_blend(&ImageBuffer::filled(8, 8, [1.0; 3]), &img, &single).is_ok());
    }
}
