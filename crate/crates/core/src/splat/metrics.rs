//! PSNR and windowed SSIM (11×11 Gaussian window, σ = 1.5, K1 = 0.01, K2 = 0.03, range 1).
//!
//! SSIM is averaged over all window positions fully inside the image ("valid"
//! windows) and over the three channels. Images smaller than 11 pixels in a
//! dimension use the largest odd window that fits.

use crate::image_io::ImageBuffer;

pub const SSIM_RADIUS: usize = 5;
pub const SSIM_SIGMA: f64 = 1.5;
const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

/// Peak signal-to-noise ratio in dB for unit dynamic range; `+inf` for identical images.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    assert!(a.same_size(b), "psnr: image sizes differ");
    let mse = a.data.iter().zip(&b.data).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.data.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

pub fn ssim(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    ssim_with_grad(a, b, false).0
}

/// Normalized 1-D Gaussian taps for the window radius that fits the image.
pub fn window_taps(width: usize, height: usize) -> Vec<f64> {
    let r = SSIM_RADIUS.min((width.min(height).saturating_sub(1)) / 2);
    let taps: Vec<f64> = (0..=2 * r)
        .map(|i| {
            let d = i as f64 - r as f64;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / s).collect()
}

/// Separable valid-mode correlation.
fn filter_valid(plane: &[f64], w: usize, h: usize, taps: &[f64]) -> (Vec<f64>, usize, usize) {
    let k = taps.len();
    let (ow, oh) = (w + 1 - k, h + 1 - k);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = taps.iter().zip(&row[x..x + k]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(j, t)| t * tmp[(y + j) * ow + x]).sum();
        }
    }
    (out, ow, oh)
}

/// Adjoint of [`filter_valid`]: scatters a valid-size map back onto the full plane.
fn filter_valid_adjoint(map: &[f64], ow: usize, oh: usize, taps: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut tmp = vec![0.0; ow * h];
    for y in 0..oh {
        for x in 0..ow {
            let m = map[y * ow + x];
            for (j, t) in taps.iter().enumerate() {
                tmp[(y + j) * ow + x] += t * m;
            }
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..ow {
            let m = tmp[y * ow + x];
            for (i, t) in taps.iter().enumerate() {
                out[y * w + x + i] += t * m;
            }
        }
    }
    out
}

/// Mean SSIM of one channel and, optionally, its gradient with respect to `x`.
pub fn ssim_plane(x: &[f64], y: &[f64], w: usize, h: usize, want_grad: bool) -> (f64, Option<Vec<f64>>) {
    let taps = window_taps(w, h);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let (mx, ow, oh) = filter_valid(x, w, h, &taps);
    let (my, _, _) = filter_valid(y, w, h, &taps);
    let (exx, _, _) = filter_valid(&xx, w, h, &taps);
    let (eyy, _, _) = filter_valid(&yy, w, h, &taps);
    let (exy, _, _) = filter_valid(&xy, w, h, &taps);
    let count = (ow * oh) as f64;

    let mut total = 0.0;
    let (mut g_mx, mut g_exx, mut g_exy) = if want_grad {
        (vec![0.0; ow * oh], vec![0.0; ow * oh], vec![0.0; ow * oh])
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };
    for i in 0..ow * oh {
        let (ux, uy) = (mx[i], my[i]);
        let a1 = 2.0 * ux * uy + C1;
        let a2 = 2.0 * (exy[i] - ux * uy) + C2;
        let b1 = ux * ux + uy * uy + C1;
        let b2 = (exx[i] - ux * ux) + (eyy[i] - uy * uy) + C2;
        let s = a1 * a2 / (b1 * b2);
        total += s;
        if want_grad {
            let inv = 1.0 / (b1 * b2 * count);
            g_mx[i] = (2.0 * uy * a2 - 2.0 * uy * a1) * inv - s / count * (2.0 * ux / b1 - 2.0 * ux / b2);
            g_exx[i] = -s / (b2 * count);
            g_exy[i] = 2.0 * a1 * inv;
        }
    }
    let mean = total / count;
    if !want_grad {
        return (mean, None);
    }
    let d_mx = filter_valid_adjoint(&g_mx, ow, oh, &taps, w, h);
    let d_exx = filter_valid_adjoint(&g_exx, ow, oh, &taps, w, h);
    let d_exy = filter_valid_adjoint(&g_exy, ow, oh, &taps, w, h);
    let grad = (0..w * h)
        .map(|q| d_mx[q] + 2.0 * x[q] * d_exx[q] + y[q] * d_exy[q])
        .collect();
    (mean, Some(grad))
}

/// Channel-averaged SSIM and, optionally, its gradient with respect to `a`.
pub fn ssim_with_grad(a: &ImageBuffer, b: &ImageBuffer, want_grad: bool) -> (f64, Option<ImageBuffer>) {
    assert!(a.same_size(b), "ssim: image sizes differ");
    let (w, h) = (a.width, a.height);
    let mut grad = want_grad.then(|| ImageBuffer::new(w, h));
    let mut total = 0.0;
    for c in 0..3 {
        let (s, gp) = ssim_plane(&a.channel(c), &b.channel(c), w, h, want_grad);
        total += s / 3.0;
        if let (Some(g), Some(gp)) = (grad.as_mut(), gp) {
            for (q, v) in gp.iter().enumerate() {
                g.data[q * 3 + c] = v / 3.0;
            }
        }
    }
    (total, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> ImageBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut img = ImageBuffer::new(w, h);
        for v in &mut img.data {
            *v = rng.random::<f64>();
        }
        img
    }

    /// Direct per-window SSIM with an explicit 2-D window.
    fn ssim_oracle(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
        let (w, h) = (a.width, a.height);
        let r = 5usize;
        let mut win = vec![vec![0.0; 11]; 11];
        let mut sum = 0.0;
        for (i, row) in win.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let di = i as f64 - 5.0;
                let dj = j as f64 - 5.0;
                *v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
                sum += *v;
            }
        }
        let mut total = 0.0;
        let mut n = 0.0;
        for c in 0..3 {
            for cy in r..h - r {
                for cx in r..w - r {
                    let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    for i in 0..11 {
                        for j in 0..11 {
                            let wt = win[i][j] / sum;
                            let xv = a.get(cx + j - r, cy + i - r)[c];
                            let yv = b.get(cx + j - r, cy + i - r)[c];
                            mx += wt * xv;
                            my += wt * yv;
                        }
                    }
                    for i in 0..11 {
                        for j in 0..11 {
                            let wt = win[i][j] / sum;
                            let xv = a.get(cx + j - r, cy + i - r)[c] - mx;
                            let yv = b.get(cx + j - r, cy + i - r)[c] - my;
                            sxx += wt * xv * xv;
                            syy += wt * yv * yv;
                            sxy += wt * xv * yv;
                        }
                    }
                    total += ((2.0 * mx * my + C1) * (2.0 * sxy + C2)) / ((mx * mx + my * my + C1) * (sxx + syy + C2));
                    n += 1.0;
                }
            }
        }
        total / n
    }

    #[test]
    fn identical_images_have_unit_ssim_and_infinite_psnr() {
        let a = random_image(20, 17, 1);
        assert_eq!(ssim(&a, &a), 1.0);
        assert_eq!(psnr(&a, &a), f64::INFINITY);
    }

    #[test]
    fn psnr_closed_form() {
        let a = ImageBuffer::new(8, 8);
        let b = ImageBuffer::filled(8, 8, [0.1; 3]);
        assert!((psnr(&a, &b) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn ssim_matches_direct_window_oracle() {
        for seed in 0..3 {
            let a = random_image(23, 19, seed);
            let b = random_image(23, 19, seed + 100);
            assert!((ssim(&a, &b) - ssim_oracle(&a, &b)).abs() < 1e-6);
        }
    }

    #[test]
    fn ssim_gradient_matches_finite_differences() {
        let a = random_image(14, 13, 5);
        let b = random_image(14, 13, 6);
        let (_, g) = ssim_with_grad(&a, &b, true);
        let g = g.unwrap();
        let h = 1e-5;
        for idx in [0usize, 7, 100, 301, 545] {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap.data[idx] += h;
            am.data[idx] -= h;
            let fd = (ssim(&ap, &b) - ssim(&am, &b)) / (2.0 * h);
            assert!((fd - g.data[idx]).abs() < 1e-8 + 1e-4 * fd.abs(), "idx {idx}: {fd} vs {}", g.data[idx]);
        }
    }

    #[test]
    fn small_images_use_shrunken_window() {
        assert_eq!(window_taps(4, 30).len(), 3);
        let a = random_image(4, 4, 9);
        let b = random_image(4, 4, 10);
        assert!(ssim(&a, &b).is_finite());
    }
}
