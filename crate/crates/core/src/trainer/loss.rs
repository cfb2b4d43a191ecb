//! Masked photometric training loss and its gradient with respect to the render.

use crate::image_io::{ImageBuffer, Mask};
use crate::splat::metrics::ssim_with_grad;

/// A differentiable image-similarity term evaluated on foreground pixels.
pub trait Perceptual {
    /// Loss and gradient with respect to `render`.
    fn loss_with_grad(&self, render: &ImageBuffer, target: &ImageBuffer, mask: &Mask) -> (f64, ImageBuffer);
}

/// L1 distance between `factor`× average-pooled masked images, averaged over
/// pooled cells that contain foreground. Partial cells at the right/bottom edge are dropped.
#[derive(Clone, Copy, Debug)]
pub struct PooledL1 {
    pub factor: usize,
}

impl Default for PooledL1 {
    fn default() -> Self {
        Self { factor: 4 }
    }
}

impl Perceptual for PooledL1 {
    fn loss_with_grad(&self, render: &ImageBuffer, target: &ImageBuffer, mask: &Mask) -> (f64, ImageBuffer) {
        let f = self.factor.max(1);
        let (w, h) = (render.width, render.height);
        let (pw, ph) = (w / f, h / f);
        let mut grad = ImageBuffer::new(w, h);
        let norm = 1.0 / (f * f) as f64;
        let mut cells = Vec::new();
        for cy in 0..ph {
            for cx in 0..pw {
                let mut any = false;
                let mut diff = [0.0; 3];
                for y in cy * f..(cy + 1) * f {
                    for x in cx * f..(cx + 1) * f {
                        if !mask.get(x, y) {
                            continue;
                        }
                        any = true;
                        let (r, t) = (render.get(x, y), target.get(x, y));
                        for c in 0..3 {
                            diff[c] += (r[c] - t[c]) * norm;
                        }
                    }
                }
                if any {
                    cells.push((cx, cy, diff));
                }
            }
        }
        if cells.is_empty() {
            return (0.0, grad);
        }
        let denom = 3.0 * cells.len() as f64;
        let mut loss = 0.0;
        for (cx, cy, diff) in cells {
            let mut sign = [0.0; 3];
            for c in 0..3 {
                loss += diff[c].abs() / denom;
                sign[c] = if diff[c] > 0.0 {
                    1.0
                } else if diff[c] < 0.0 {
                    -1.0
                } else {
                    0.0
                };
            }
            for y in cy * f..(cy + 1) * f {
                for x in cx * f..(cx + 1) * f {
                    if mask.get(x, y) {
                        let i = grad.idx(x, y);
                        for c in 0..3 {
                            grad.data[i + c] = sign[c] * norm / denom;
                        }
                    }
                }
            }
        }
        (loss, grad)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub rgb: f64,
    pub ssim: f64,
    pub perceptual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub rgb: f64,
    pub ssim: f64,
    pub perceptual: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            rgb: 0.8,
            ssim: 0.2,
            perceptual: 0.2,
        }
    }
}

fn masked(img: &ImageBuffer, mask: &Mask) -> ImageBuffer {
    let mut out = img.clone();
    for (q, m) in mask.data.iter().enumerate() {
        if !m {
            out.data[q * 3..q * 3 + 3].fill(0.0);
        }
    }
    out
}

/// `w_rgb·L1 + w_ssim·(1 − SSIM) + w_perc·perceptual`, restricted to the mask.
///
/// L1 is the mean absolute difference over foreground pixels and channels.
/// SSIM compares the masked images cropped to the mask's bounding box. An empty
/// mask yields zero loss.
pub fn total_loss(
    render: &ImageBuffer,
    target: &ImageBuffer,
    mask: &Mask,
    weights: &LossWeights,
    perceptual: &dyn Perceptual,
) -> (LossParts, ImageBuffer) {
    assert!(render.same_size(target), "loss: render and target sizes differ");
    assert_eq!((mask.width, mask.height), (render.width, render.height), "loss: mask size differs");
    let mut grad = ImageBuffer::new(render.width, render.height);
    let count = mask.count();
    if count == 0 {
        return (LossParts::default(), grad);
    }

    let denom = 3.0 * count as f64;
    let mut l1 = 0.0;
    for (q, m) in mask.data.iter().enumerate() {
        if !m {
            continue;
        }
        for c in 0..3 {
            let d = render.data[q * 3 + c] - target.data[q * 3 + c];
            l1 += d.abs() / denom;
            let s = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            grad.data[q * 3 + c] += weights.rgb * s / denom;
        }
    }

    let mut ssim_term = 0.0;
    if weights.ssim != 0.0 {
        let (x0, y0, x1, y1) = mask.bbox().expect("mask is non-empty");
        let (cw, ch) = (x1 - x0 + 1, y1 - y0 + 1);
        let a = masked(render, mask).crop(x0, y0, cw, ch);
        let b = masked(target, mask).crop(x0, y0, cw, ch);
        let (s, g) = ssim_with_grad(&a, &b, true);
        ssim_term = 1.0 - s;
        let g = g.unwrap();
        for y in 0..ch {
            for x in 0..cw {
                if !mask.get(x0 + x, y0 + y) {
                    continue;
                }
                let (src, dst) = (g.idx(x, y), grad.idx(x0 + x, y0 + y));
                for c in 0..3 {
                    grad.data[dst + c] -= weights.ssim * g.data[src + c];
                }
            }
        }
    }

    let mut perc = 0.0;
    if weights.perceptual != 0.0 {
        let (p, g) = perceptual.loss_with_grad(render, target, mask);
        perc = p;
        for (d, s) in grad.data.iter_mut().zip(&g.data) {
            *d += weights.perceptual * s;
        }
    }

    let total = weights.rgb * l1 + weights.ssim * ssim_term + weights.perceptual * perc;
    (
        LossParts {
            total,
            rgb: l1,
            ssim: ssim_term,
            perceptual: perc,
        },
        grad,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ImageBuffer {
        let mut img = ImageBuffer::new(w, h);
        for v in &mut img.data {
            *v = rng.random::<f64>();
        }
        img
    }

    fn blob_mask(w: usize, h: usize) -> Mask {
        let mut m = Mask::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = (x as f64 - 10.0, y as f64 - 12.0);
                m.set(x, y, dx * dx + dy * dy < 64.0);
            }
        }
        m
    }

    #[test]
    fn identical_images_have_zero_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_image(&mut rng, 24, 24);
        let (parts, _) = total_loss(&a, &a, &blob_mask(24, 24), &LossWeights::default(), &PooledL1::default());
        assert_eq!(parts.total, 0.0);
    }

    #[test]
    fn constant_offset_rgb_only() {
        let a = ImageBuffer::filled(16, 16, [0.3; 3]);
        let b = ImageBuffer::filled(16, 16, [0.4; 3]);
        let w = LossWeights {
            ssim: 0.0,
            perceptual: 0.0,
            ..Default::default()
        };
        let (parts, _) = total_loss(&a, &b, &Mask::full(16, 16), &w, &PooledL1::default());
        assert!((parts.total - 0.08).abs() < 1e-12);
    }

    #[test]
    fn background_is_ignored() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_image(&mut rng, 24, 24);
        let mut b = a.clone();
        let mask = blob_mask(24, 24);
        for y in 0..24 {
            for x in 0..24 {
                if !mask.get(x, y) {
                    b.set(x, y, [rng.random(), rng.random(), rng.random()]);
                }
            }
        }
        let (parts, grad) = total_loss(&a, &b, &mask, &LossWeights::default(), &PooledL1::default());
        assert_eq!(parts.total, 0.0);
        for (q, m) in mask.data.iter().enumerate() {
            for c in 0..3 {
                let g = grad.data[q * 3 + c];
                assert!(if *m { g.abs() < 1e-12 } else { g == 0.0 });
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_image(&mut rng, 24, 24);
        let b = random_image(&mut rng, 24, 24);
        let mask = blob_mask(24, 24);
        let w = LossWeights::default();
        let p = PooledL1::default();
        let (_, grad) = total_loss(&a, &b, &mask, &w, &p);
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for q in (0..a.data.len()).step_by(7) {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap.data[q] += h;
            am.data[q] -= h;
            let num = (total_loss(&ap, &b, &mask, &w, &p).0.total - total_loss(&am, &b, &mask, &w, &p).0.total) / (2.0 * h);
            let den = num.abs().max(grad.data[q].abs()).max(1e-6);
            worst = worst.max((num - grad.data[q]).abs() / den);
        }
        assert!(worst < 1e-3, "worst relative error {worst}");
    }
}
