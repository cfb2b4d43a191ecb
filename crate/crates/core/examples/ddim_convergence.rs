//! Error of the DDIM sampler against the exact sampling flow on Gaussian toy
//! data, for a few step counts, with and without the zero-SNR rescale.
//!
//! cargo run --release --example ddim_convergence

use splat_avatar::diffusion::{convergence_table, Prediction};
use splat_avatar::error::Result;

fn main() -> Result<()> {
    let steps = [5, 10, 20, 50, 100, 250];
    for (zero_snr, kind) in [(false, Prediction::Epsilon), (false, Prediction::V), (true, Prediction::V)] {
        println!("zero_snr={zero_snr} prediction={kind:?}");
        for (s, e) in convergence_table(&steps, 0.5, zero_snr, kind, 0, 256)? {
            println!("  {s:>4} steps: max error {e:.3e}");
        }
    }
    Ok(())
}
