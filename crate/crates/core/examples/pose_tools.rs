//! Rescales a source skeleton to a reference body, smooths a jittery keypoint
//! track and splits a long sequence into crossfaded windows.
//!
//! cargo run --release --example pose_tools

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splat_avatar::pose_tools::{apply_scales, compute_scales, savgol, sliding_windows, Skeleton2D, PARTS};

fn skeleton(stretch: f64) -> Skeleton2D {
    let pts = [
        [50.0, 20.0],
        [50.0, 35.0],
        [40.0, 36.0],
        [30.0, 37.0],
        [20.0, 38.0],
        [60.0, 36.0],
        [70.0, 37.0],
        [80.0, 38.0],
        [45.0, 65.0],
        [45.0, 85.0],
        [45.0, 105.0],
        [55.0, 65.0],
        [55.0, 85.0],
        [55.0, 105.0],
        [47.0, 17.0],
        [53.0, 17.0],
        [50.0, 8.0],
    ];
    Skeleton2D::new(pts.iter().map(|p| [50.0 + stretch * (p[0] - 50.0), 60.0 + stretch * (p[1] - 60.0), 0.9]).collect())
}

fn main() {
    let reference = skeleton(1.25);
    let source = skeleton(1.0);
    let scales = compute_scales(&reference, &source);
    for (part, (v, ok)) in PARTS.iter().zip(scales.values.iter().zip(scales.defined)) {
        println!("{:<10} scale {v:.3}{}", part.name(), if ok { "" } else { " (fallback)" });
    }
    let aligned = apply_scales(&source, &scales);
    let forearm = |s: &Skeleton2D| (s.point(4)[0] - s.point(3)[0]).hypot(s.point(4)[1] - s.point(3)[1]);
    println!("right forearm: source {:.2}, aligned {:.2}, reference {:.2}", forearm(&source), forearm(&aligned), forearm(&reference));

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let clean: Vec<f64> = (0..40).map(|t| 30.0 + 0.5 * t as f64 - 0.01 * (t * t) as f64).collect();
    let noisy: Vec<f64> = clean.iter().map(|v| v + rng.random_range(-1.5..1.5)).collect();
    let smooth = savgol(&noisy, 9, 2);
    let err = |s: &[f64]| (s.iter().zip(&clean).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / s.len() as f64).sqrt();
    println!("keypoint track rms error: noisy {:.3} px, smoothed {:.3} px", err(&noisy), err(&smooth));

    let w = sliding_windows(50, 16, 4);
    for (span, weights) in w.spans.iter().zip(&w.weights) {
        println!("window {:>2}..{:<2} first weight {:.2}", span.0, span.1, weights[0]);
    }
}
