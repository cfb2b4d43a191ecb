//! Trains an avatar on a synthetic turntable and scores it on held-out views.
//!
//! cargo run --release --example train_avatar -- [frames] [iterations]

use std::time::Instant;

use splat_avatar::error::Result;
use splat_avatar::splat::{psnr, render, ssim};
use splat_avatar::synth::{make_subject, render_sequence, SynthConfig};
use splat_avatar::trainer::{train, FrameSample, PooledL1, TrainConfig};

fn main() -> Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let frames = args.first().copied().unwrap_or(36);
    let iterations = args.get(1).copied().unwrap_or(5000);

    let synth = SynthConfig { frames, ..Default::default() };
    let subject = make_subject(synth.seed, &synth.subject_params());
    let cam = synth.camera();
    let samples: Vec<FrameSample> = render_sequence(&subject, frames, &cam, 0.0)?
        .into_iter()
        .map(|f| FrameSample { image: f.image, mask: f.mask, camera: f.camera, pose: f.pose })
        .collect();
    let held = render_sequence(&subject, 4, &cam, std::f64::consts::PI / frames as f64)?;

    let cfg = TrainConfig { iterations: Some(iterations), ..Default::default() };
    let start = Instant::now();
    let out = train(&samples, &subject.template, &cfg, &PooledL1::default())?;
    println!("trained {iterations} iterations in {:.1}s", start.elapsed().as_secs_f64());
    if let Some(last) = out.log.last() {
        println!("final loss {:.5}, {} gaussians", last.total, last.n_gaussians);
    }
    for e in &out.events {
        println!("densify@{}: {} -> {} (pruned {}, cloned {})", e.iteration, e.before, e.after, e.pruned, e.cloned);
    }

    let (mut p_sum, mut s_sum) = (0.0, 0.0);
    for f in &held {
        let posed = out.model.pose(&f.pose)?;
        let img = render(&posed.gaussians, &f.camera, 3).image;
        let (p, s) = (psnr(&img, &f.image), ssim(&img, &f.image));
        println!("held-out view: psnr {p:.2} dB, ssim {s:.4}");
        p_sum += p;
        s_sum += s;
    }
    println!("mean psnr {:.2} dB, mean ssim {:.4}", p_sum / held.len() as f64, s_sum / held.len() as f64);
    Ok(())
}
