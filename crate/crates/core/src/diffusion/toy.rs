//! Gaussian toy data where the optimal denoiser and the sampler's trajectory
//! are known in closed form.
//!
//! For `x₀ ~ N(0, s²)` and `z = √ᾱ·x₀ + √(1−ᾱ)·ε`, the posterior means are
//! `E[ε|z] = √(1−ᾱ)·z / V` and `E[x₀|z] = √ᾱ·s²·z / V` with `V = ᾱ·s² + 1 − ᾱ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ddim::{ddim_sample, timesteps, Denoiser, Prediction, SamplerConfig};
use super::schedule::NoiseSchedule;
use crate::error::Result;

/// Exact posterior-mean predictor for Gaussian data with standard deviation `data_std`.
#[derive(Clone, Debug)]
pub struct GaussianDenoiser<'a> {
    pub data_std: f64,
    pub schedule: &'a NoiseSchedule,
    pub kind: Prediction,
}

fn variance(alpha_bar: f64, s: f64) -> f64 {
    alpha_bar * s * s + 1.0 - alpha_bar
}

impl Denoiser for GaussianDenoiser<'_> {
    fn predict(&self, z: &[f64], t: usize, _conditional: bool) -> Vec<f64> {
        let a = self.schedule.alpha_bars[t];
        let v = variance(a, self.data_std);
        let (ra, rs) = (a.sqrt(), (1.0 - a).sqrt());
        let gain = match self.kind {
            Prediction::Epsilon => rs / v,
            // √ᾱ·E[ε] − √(1−ᾱ)·E[x₀]
            Prediction::V => ra * rs * (1.0 - self.data_std * self.data_std) / v,
        };
        z.iter().map(|x| gain * x).collect()
    }
}

/// Per-step multiplier of an exact-predictor DDIM update between two levels.
pub fn step_gain(alpha_bar: f64, alpha_bar_prev: f64, data_std: f64) -> f64 {
    let s2 = data_std * data_std;
    ((alpha_bar_prev * alpha_bar).sqrt() * s2 + ((1.0 - alpha_bar_prev) * (1.0 - alpha_bar)).sqrt()) / variance(alpha_bar, data_std)
}

/// Product of step gains along the sampler's timesteps: `z₀ = gain·z_T`.
pub fn trajectory_gain(schedule: &NoiseSchedule, steps: usize, data_std: f64) -> f64 {
    let ts = timesteps(schedule.len(), steps);
    ts.iter()
        .enumerate()
        .map(|(k, &t)| {
            let prev = ts.get(k + 1).map_or(1.0, |&p| schedule.alpha_bars[p]);
            step_gain(schedule.alpha_bars[t], prev, data_std)
        })
        .product()
}

/// Exact solution of the deterministic sampling flow: `z₀ = z_T·s/√V_T`.
pub fn continuous_gain(alpha_bar_top: f64, data_std: f64) -> f64 {
    data_std / variance(alpha_bar_top, data_std).sqrt()
}

/// Max abs gap between sampled and continuous-limit `z₀` over a seeded batch, per step count.
pub fn convergence_table(step_counts: &[usize], data_std: f64, zero_snr: bool, kind: Prediction, seed: u64, batch: usize) -> Result<Vec<(usize, f64)>> {
    let base = NoiseSchedule::default();
    let schedule = if zero_snr { base.rescale_zero_snr() } else { base.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z_t: Vec<f64> = (0..batch).map(|_| StandardNormal.sample(&mut rng)).collect();
    let den = GaussianDenoiser {
        data_std,
        schedule: &schedule,
        kind,
    };
    let limit = continuous_gain(*schedule.alpha_bars.last().unwrap(), data_std);
    step_counts
        .iter()
        .map(|&steps| {
            let cfg = SamplerConfig {
                steps,
                guidance: 0.0,
                prediction: kind,
                zero_snr,
            };
            let z0 = ddim_sample(&den, &cfg, &base, &z_t)?;
            let err = z0.iter().zip(&z_t).fold(0.0f64, |m, (a, z)| m.max((a - limit * z).abs()));
            Ok((steps, err))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_follows_closed_form() {
        let base = NoiseSchedule::default();
        let z = [1.3, -0.4, 2.2];
        for (zero_snr, kind) in [(false, Prediction::Epsilon), (false, Prediction::V), (true, Prediction::V)] {
            let s = if zero_snr { base.rescale_zero_snr() } else { base.clone() };
            let den = GaussianDenoiser { data_std: 0.5, schedule: &s, kind };
            for steps in [20, 50] {
                let cfg = SamplerConfig { steps, guidance: 0.0, prediction: kind, zero_snr };
                let out = ddim_sample(&den, &cfg, &base, &z).unwrap();
                let g = trajectory_gain(&s, steps, 0.5);
                for (o, z) in out.iter().zip(&z) {
                    assert!((o - g * z).abs() < 1e-6, "{zero_snr} {kind:?} {steps}: {o} vs {}", g * z);
                }
            }
        }
    }

    #[test]
    fn error_shrinks_with_more_steps() {
        for zero_snr in [false, true] {
            let t = convergence_table(&[10, 20, 50], 0.5, zero_snr, Prediction::V, 3, 16).unwrap();
            assert!(t[0].1 > t[1].1 && t[1].1 > t[2].1, "{t:?}");
        }
    }

    #[test]
    fn guidance_is_inert_for_an_unconditional_model() {
        let s = NoiseSchedule::default();
        let den = GaussianDenoiser { data_std: 0.8, schedule: &s, kind: Prediction::Epsilon };
        let z = [0.5];
        let a = ddim_sample(&den, &SamplerConfig { guidance: 3.5, ..Default::default() }, &s, &z).unwrap();
        let b = ddim_sample(&den, &SamplerConfig { guidance: 0.0, ..Default::default() }, &s, &z).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);
    }
}
