//! Noise schedules.

use crate::error::{Error, Result};

pub const TRAIN_STEPS: usize = 1000;
pub const BETA_START: f64 = 0.00085;
pub const BETA_END: f64 = 0.012;

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSchedule {
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Cumulative products of `alphas`.
    pub alpha_bars: Vec<f64>,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self::scaled_linear(TRAIN_STEPS, BETA_START, BETA_END).expect("valid default schedule")
    }
}

impl NoiseSchedule {
    /// Betas linear in `√β` from `beta_start` to `beta_end`, both endpoints exact.
    pub fn scaled_linear(steps: usize, beta_start: f64, beta_end: f64) -> Result<Self> {
        if steps < 2 || !(0.0 < beta_start && beta_start <= beta_end && beta_end < 1.0) {
            return Err(Error::config(format!(
                "need at least 2 steps and 0 < beta_start <= beta_end < 1, got {steps}, {beta_start}, {beta_end}"
            )));
        }
        let (a, b) = (beta_start.sqrt(), beta_end.sqrt());
        let mut betas: Vec<f64> = (0..steps)
            .map(|i| {
                let r = a + (i as f64 / (steps - 1) as f64) * (b - a);
                r * r
            })
            .collect();
        // Pin the ends so sqrt/square rounding cannot move them.
        betas[0] = beta_start;
        betas[steps - 1] = beta_end;
        Ok(Self::from_betas(betas))
    }

    pub fn from_betas(betas: Vec<f64>) -> Self {
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let alpha_bars = alphas
            .iter()
            .scan(1.0, |acc, a| {
                *acc *= a;
                Some(*acc)
            })
            .collect();
        Self { betas, alphas, alpha_bars }
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// Shifts and stretches `√ᾱ` so the last step is pure noise while the first is kept.
    pub fn rescale_zero_snr(&self) -> Self {
        let roots: Vec<f64> = self.alpha_bars.iter().map(|a| a.sqrt()).collect();
        let (first, last) = (roots[0], roots[roots.len() - 1]);
        let alpha_bars: Vec<f64> = roots
            .iter()
            .enumerate()
            .map(|(i, r)| match i {
                0 => self.alpha_bars[0],
                i if i + 1 == roots.len() => 0.0,
                _ => {
                    let s = (r - last) * first / (first - last);
                    s * s
                }
            })
            .collect();
        let alphas: Vec<f64> = alpha_bars
            .iter()
            .enumerate()
            .map(|(i, a)| if i == 0 { *a } else { a / alpha_bars[i - 1] })
            .collect();
        let betas = alphas.iter().map(|a| 1.0 - a).collect();
        Self { betas, alphas, alpha_bars }
    }
}
