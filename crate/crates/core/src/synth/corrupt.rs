//! Seeded image degradations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::image_io::{ImageBuffer, Mask};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Corruption {
    /// Separable Gaussian blur with clamped borders.
    Blur { sigma: f64 },
    /// Additive Gaussian noise (not clamped).
    Noise { sigma: f64 },
    /// Replaces a random axis-aligned rectangle, `fraction` of each side long,
    /// with a smooth random color gradient.
    RegionReplace { fraction: f64 },
}

/// Applies `kind`; region replacement also returns the mask of replaced pixels.
pub fn corrupt(img: &ImageBuffer, kind: Corruption, seed: u64) -> (ImageBuffer, Option<Mask>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        Corruption::Blur { sigma } => (blur(img, sigma), None),
        Corruption::Noise { sigma } => {
            let mut out = img.clone();
            if sigma > 0.0 {
                let n = Normal::new(0.0, sigma).unwrap();
                for v in &mut out.data {
                    *v += n.sample(&mut rng);
                }
            }
            (out, None)
        }
        Corruption::RegionReplace { fraction } => {
            let (w, h) = (img.width, img.height);
            let rw = ((w as f64 * fraction).round() as usize).min(w);
            let rh = ((h as f64 * fraction).round() as usize).min(h);
            let mut mask = Mask::new(w, h);
            let mut out = img.clone();
            if rw == 0 || rh == 0 {
                return (out, Some(mask));
            }
            let x0 = rng.random_range(0..=w - rw);
            let y0 = rng.random_range(0..=h - rh);
            let c0: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>());
            let c1: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>());
            for y in y0..y0 + rh {
                for x in x0..x0 + rw {
                    let s = (x - x0) as f64 / rw.max(2).saturating_sub(1) as f64;
                    out.set(x, y, std::array::from_fn(|c| c0[c] * (1.0 - s) + c1[c] * s));
                    mask.set(x, y, true);
                }
            }
            (out, Some(mask))
        }
    }
}

fn blur(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    if sigma <= 0.0 {
        return img.clone();
    }
    let r = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = taps.iter().sum();
    let (w, h) = (img.width as isize, img.height as isize);
    let pass = |src: &ImageBuffer, horizontal: bool| {
        let mut out = ImageBuffer::new(src.width, src.height);
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0.0; 3];
                for (k, t) in taps.iter().enumerate() {
                    let o = k as isize - r;
                    let (sx, sy) = if horizontal {
                        ((x + o).clamp(0, w - 1), y)
                    } else {
                        (x, (y + o).clamp(0, h - 1))
                    };
                    let p = src.get(sx as usize, sy as usize);
                    for c in 0..3 {
                        acc[c] += t * p[c];
                    }
                }
                out.set(x as usize, y as usize, acc.map(|a| a / norm));
            }
        }
        out
    };
    pass(&pass(img, true), false)
}
