//! Convex hull of landmarks rasterized to a mask.

use nalgebra::Vector2;

use crate::image_io::Mask;

fn cross(o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Monotone-chain hull, counter-clockwise in a y-up frame, without collinear points.
pub fn convex_hull(points: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut pts: Vec<Vector2<f64>> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vector2<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vector2<f64>>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

#[derive(Clone, Debug, PartialEq)]
pub struct HullMask {
    pub mask: Mask,
    /// Set when the points span no area; the mask is then empty.
    pub collinear: bool,
}

/// Marks every pixel whose center lies inside the hull or on its boundary.
pub fn convex_hull_mask(points: &[Vector2<f64>], width: usize, height: usize) -> HullMask {
    let hull = convex_hull(points);
    let mut mask = Mask::new(width, height);
    if hull.len() < 3 {
        return HullMask { mask, collinear: true };
    }
    const EPS: f64 = 1e-9;
    let (ymin, ymax) = hull.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    let y0 = (ymin - EPS).ceil().max(0.0) as usize;
    let y1 = (ymax + EPS).floor().min(height as f64 - 1.0);
    if y1 < 0.0 {
        return HullMask { mask, collinear: false };
    }
    for y in y0..=y1 as usize {
        let yf = y as f64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..hull.len() {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            let (emin, emax) = (a.y.min(b.y), a.y.max(b.y));
            if yf < emin - EPS || yf > emax + EPS {
                continue;
            }
            if (b.y - a.y).abs() < EPS {
                lo = lo.min(a.x.min(b.x));
                hi = hi.max(a.x.max(b.x));
            } else {
                let t = ((yf - a.y) / (b.y - a.y)).clamp(0.0, 1.0);
                let x = a.x + t * (b.x - a.x);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        if lo > hi {
            continue;
        }
        let x0 = (lo - EPS).ceil().max(0.0);
        let x1 = (hi + EPS).floor().min(width as f64 - 1.0);
        if x1 < x0 {
            continue;
        }
        for x in x0 as usize..=x1 as usize {
            mask.set(x, y, true);
        }
    }
    HullMask { mask, collinear: false }
}
