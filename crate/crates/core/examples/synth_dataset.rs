//! Writes a small synthetic turntable dataset and reads it back.
//!
//! cargo run --release --example synth_dataset -- [out_dir]

use std::path::PathBuf;

use splat_avatar::error::Result;
use splat_avatar::synth::{generate_dataset, read_dataset, SynthConfig};

fn main() -> Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "synth_out".into()));
    let cfg = SynthConfig { frames: 12, width: 96, height: 96, focal: 135.0, ..Default::default() };
    generate_dataset(&out, &cfg)?;
    let data = read_dataset(&out)?;
    let coverage: f64 = data.samples.iter().map(|s| s.mask.count() as f64 / s.mask.data.len() as f64).sum::<f64>() / data.samples.len() as f64;
    println!("{} frames in {}, mean foreground {:.1}%", data.samples.len(), out.display(), 100.0 * coverage);
    Ok(())
}
