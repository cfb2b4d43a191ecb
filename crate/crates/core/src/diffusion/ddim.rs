//! Deterministic DDIM sampling with ε or v targets and classifier-free guidance.

use super::schedule::NoiseSchedule;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prediction {
    Epsilon,
    V,
}

impl std::str::FromStr for Prediction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epsilon" => Ok(Prediction::Epsilon),
            "v" => Ok(Prediction::V),
            _ => Err(Error::config(format!("prediction must be epsilon or v, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub steps: usize,
    pub guidance: f64,
    pub prediction: Prediction,
    /// Rescale the schedule to zero terminal SNR before sampling.
    pub zero_snr: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            steps: 20,
            guidance: 3.5,
            prediction: Prediction::Epsilon,
            zero_snr: false,
        }
    }
}

/// `(1 + w)·cond − w·uncond`, evaluated as `cond + w·(cond − uncond)` so equal
/// inputs come back bit-exact.
pub fn cfg(cond: &[f64], uncond: &[f64], w: f64) -> Vec<f64> {
    cond.iter().zip(uncond).map(|(c, u)| c + w * (c - u)).collect()
}

/// `v = √ᾱ·ε − √(1−ᾱ)·x₀` with `x₀` recovered from `z` and `ε`.
pub fn eps_to_v(z: &[f64], eps: &[f64], alpha_bar: f64) -> Vec<f64> {
    let (a, s) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    z.iter().zip(eps).map(|(z, e)| (e - s * z) / a).collect()
}

/// `ε = √ᾱ·v + √(1−ᾱ)·z`.
pub fn v_to_eps(z: &[f64], v: &[f64], alpha_bar: f64) -> Vec<f64> {
    let (a, s) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    z.iter().zip(v).map(|(z, v)| a * v + s * z).collect()
}

/// One η = 0 update from cumulative level `alpha_bar` to `alpha_bar_prev`.
pub fn ddim_update(z: &[f64], pred: &[f64], alpha_bar: f64, alpha_bar_prev: f64, kind: Prediction) -> Result<Vec<f64>> {
    if z.len() != pred.len() {
        return Err(Error::input("latent and prediction lengths differ"));
    }
    let (a, s) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    let (ap, sp) = (alpha_bar_prev.sqrt(), (1.0 - alpha_bar_prev).sqrt());
    let out = match kind {
        Prediction::Epsilon => {
            if alpha_bar <= 0.0 {
                return Err(Error::numerical("clean estimate undefined at zero signal with epsilon prediction"));
            }
            z.iter().zip(pred).map(|(z, e)| ap * (z - s * e) / a + sp * e).collect()
        }
        Prediction::V => z
            .iter()
            .zip(pred)
            .map(|(z, v)| {
                let x0 = a * z - s * v;
                let eps = a * v + s * z;
                ap * x0 + sp * eps
            })
            .collect(),
    };
    Ok(out)
}

/// Step from timestep `t` to `t_prev`; `None` means the clean end (`ᾱ = 1`).
pub fn ddim_step(z: &[f64], pred: &[f64], t: usize, t_prev: Option<usize>, s: &NoiseSchedule, kind: Prediction) -> Result<Vec<f64>> {
    if t >= s.len() || t_prev.is_some_and(|p| p >= t) {
        return Err(Error::input(format!("invalid step {t} -> {t_prev:?}")));
    }
    let prev = t_prev.map_or(1.0, |p| s.alpha_bars[p]);
    ddim_update(z, pred, s.alpha_bars[t], prev, kind)
}

/// `steps` timesteps evenly spaced from `T − 1` down to 0, rounded.
pub fn timesteps(train_steps: usize, steps: usize) -> Vec<usize> {
    if steps == 1 {
        return vec![train_steps - 1];
    }
    let last = (train_steps - 1) as f64;
    (0..steps)
        .map(|k| (last * (1.0 - k as f64 / (steps - 1) as f64)).round() as usize)
        .collect()
}

pub trait Denoiser {
    /// Prediction at timestep `t`, conditional or unconditional.
    fn predict(&self, z: &[f64], t: usize, conditional: bool) -> Vec<f64>;
}

impl<F: Fn(&[f64], usize, bool) -> Vec<f64>> Denoiser for F {
    fn predict(&self, z: &[f64], t: usize, conditional: bool) -> Vec<f64> {
        self(z, t, conditional)
    }
}

/// Runs the sampler from `z_t` at the top timestep down to the clean end.
/// The unconditional branch is skipped when the guidance weight is zero.
pub fn ddim_sample(denoiser: &dyn Denoiser, cfg_: &SamplerConfig, schedule: &NoiseSchedule, z_t: &[f64]) -> Result<Vec<f64>> {
    if cfg_.steps == 0 || cfg_.steps > schedule.len() {
        return Err(Error::config(format!("steps must lie in 1..={}", schedule.len())));
    }
    let rescaled;
    let s = if cfg_.zero_snr {
        rescaled = schedule.rescale_zero_snr();
        &rescaled
    } else {
        schedule
    };
    let ts = timesteps(s.len(), cfg_.steps);
    let mut z = z_t.to_vec();
    for (k, &t) in ts.iter().enumerate() {
        let cond = denoiser.predict(&z, t, true);
        let pred = if cfg_.guidance != 0.0 {
            cfg(&cond, &denoiser.predict(&z, t, false), cfg_.guidance)
        } else {
            cond
        };
        z = ddim_step(&z, &pred, t, ts.get(k + 1).copied(), s, cfg_.prediction)?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical(format!("non-finite latent at timestep {t}")));
        }
    }
    Ok(z)
}
