//! Blends a sharp rendered head into a blurred frame of the synthetic subject.
//!
//! cargo run --release --example fuse_face -- [out_dir]

use std::path::PathBuf;

use nalgebra::Vector2;
use splat_avatar::fusion::{fuse_face, warp_affine, AffineTransform, FuseStatus, LandmarkSet, DEFAULT_GATE};
use splat_avatar::splat::psnr;
use splat_avatar::synth::{corrupt, face_landmarks, make_subject, render_frame, turntable_pose, Corruption, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fuse_out".into()));
    std::fs::create_dir_all(&out)?;
    let cfg = SynthConfig { width: 256, height: 256, focal: 360.0, ..Default::default() };
    let subject = make_subject(1, &cfg.subject_params());
    let pose = turntable_pose(&subject, 0.0);
    let clean = render_frame(&subject, &pose, &cfg.camera())?;
    let landmarks = face_landmarks(&subject, &pose, &cfg.camera())?;

    // The "rendered head" arrives at another scale and offset, like a separate head render.
    let m = AffineTransform::similarity(1.2, 0.05, Vector2::new(-15.0, 4.0));
    let head = warp_affine(&clean.image, &m, cfg.width, cfg.height)?;
    let head_landmarks = LandmarkSet::new(landmarks.points.iter().map(|p| m.apply(p)).collect());

    let (blurred, _) = corrupt(&clean.image, Corruption::Blur { sigma: 2.0 }, 0);
    let fused = fuse_face(&blurred, &head, &landmarks, &head_landmarks, DEFAULT_GATE)?;
    match &fused.status {
        FuseStatus::Fused { disparity } => println!("fused, landmark disparity {disparity:.2e}"),
        other => println!("skipped: {other:?}"),
    }
    if let Some((x0, y0, x1, y1)) = fused.mask.as_ref().and_then(|m| m.bbox()) {
        let crop = |img: &splat_avatar::image_io::ImageBuffer| img.crop(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
        let gt = crop(&clean.image);
        println!("face region psnr vs clean: blurred {:.2} dB, fused {:.2} dB", psnr(&crop(&blurred), &gt), psnr(&crop(&fused.image), &gt));
    }
    blurred.save_png(out.join("blurred.png"))?;
    head.save_png(out.join("head.png"))?;
    fused.image.save_png(out.join("fused.png"))?;
    if let Some(mask) = &fused.mask {
        mask.save_png(out.join("mask.png"))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
