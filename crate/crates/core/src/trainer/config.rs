use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Loss weights, learning rates and schedules for avatar training.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lambda_rgb: f64,
    pub lambda_ssim: f64,
    pub lambda_perc: f64,
    /// Weight of the mesh Laplacian regularizer on the posed Gaussians.
    pub lambda_lap: f64,
    pub lr_position_init: f64,
    pub lr_position_final: f64,
    pub lr_position_steps: usize,
    pub lr_opacity: f64,
    pub lr_scale: f64,
    pub lr_feature: f64,
    pub lr_net: f64,
    pub densify_start: usize,
    pub densify_end: usize,
    pub densify_interval: usize,
    /// Mean screen-space positional gradient norm (normalized device units) that triggers cloning.
    pub densify_grad_threshold: f64,
    pub prune_opacity: f64,
    /// Upper bound on the Gaussian count as a multiple of the template vertex count.
    pub max_gaussians_factor: f64,
    /// `None` means five passes over the frames.
    pub iterations: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda_rgb: 0.8,
            lambda_ssim: 0.2,
            lambda_perc: 0.2,
            lambda_lap: 10.0,
            lr_position_init: 1.6e-4,
            lr_position_final: 1.6e-6,
            lr_position_steps: 30_000,
            lr_opacity: 0.05,
            lr_scale: 0.005,
            lr_feature: 0.0025,
            lr_net: 1e-3,
            densify_start: 500,
            densify_end: 15_000,
            densify_interval: 100,
            densify_grad_threshold: 2e-4,
            prune_opacity: 0.005,
            max_gaussians_factor: 2.0,
            iterations: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn iterations_for(&self, frames: usize) -> usize {
        self.iterations.unwrap_or(5 * frames)
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("lr_position_init", self.lr_position_init),
            ("lr_position_final", self.lr_position_final),
            ("lr_opacity", self.lr_opacity),
            ("lr_scale", self.lr_scale),
            ("lr_feature", self.lr_feature),
            ("lr_net", self.lr_net),
        ];
        for (name, v) in rates {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        let weights = [
            ("lambda_rgb", self.lambda_rgb),
            ("lambda_ssim", self.lambda_ssim),
            ("lambda_perc", self.lambda_perc),
            ("lambda_lap", self.lambda_lap),
        ];
        for (name, v) in weights {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.densify_start >= self.densify_end {
            return Err(Error::config("densify_start must be below densify_end"));
        }
        if self.densify_interval == 0 || self.lr_position_steps == 0 {
            return Err(Error::config("densify_interval and lr_position_steps must be positive"));
        }
        if !(0.0..1.0).contains(&self.prune_opacity) {
            return Err(Error::config("prune_opacity must lie in [0, 1)"));
        }
        if self.max_gaussians_factor < 1.0 {
            return Err(Error::config("max_gaussians_factor must be at least 1"));
        }
        Ok(())
    }

    /// Sets one field from its textual `key = value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::config(format!("invalid value {value:?} for {key}")))
        }
        match key {
            "lambda_rgb" => self.lambda_rgb = num(key, value)?,
            "lambda_ssim" => self.lambda_ssim = num(key, value)?,
            "lambda_perc" => self.lambda_perc = num(key, value)?,
            "lambda_lap" => self.lambda_lap = num(key, value)?,
            "lr_position_init" => self.lr_position_init = num(key, value)?,
            "lr_position_final" => self.lr_position_final = num(key, value)?,
            "lr_position_steps" => self.lr_position_steps = num(key, value)?,
            "lr_opacity" => self.lr_opacity = num(key, value)?,
            "lr_scale" => self.lr_scale = num(key, value)?,
            "lr_feature" => self.lr_feature = num(key, value)?,
            "lr_net" => self.lr_net = num(key, value)?,
            "densify_start" => self.densify_start = num(key, value)?,
            "densify_end" => self.densify_end = num(key, value)?,
            "densify_interval" => self.densify_interval = num(key, value)?,
            "densify_grad_threshold" => self.densify_grad_threshold = num(key, value)?,
            "prune_opacity" => self.prune_opacity = num(key, value)?,
            "max_gaussians_factor" => self.max_gaussians_factor = num(key, value)?,
            "iterations" => {
                self.iterations = if value == "auto" { None } else { Some(num(key, value)?) };
            }
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::config(format!("unknown train key {key:?}"))),
        }
        Ok(())
    }

    pub const KEYS: [&'static str; 19] = [
        "lambda_rgb",
        "lambda_ssim",
        "lambda_perc",
        "lambda_lap",
        "lr_position_init",
        "lr_position_final",
        "lr_position_steps",
        "lr_opacity",
        "lr_scale",
        "lr_feature",
        "lr_net",
        "densify_start",
        "densify_end",
        "densify_interval",
        "densify_grad_threshold",
        "prune_opacity",
        "max_gaussians_factor",
        "iterations",
        "seed",
    ];

    /// `key = value` lines in [`TrainConfig::KEYS`] order.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let iterations = self.iterations.map_or("auto".to_string(), |n| n.to_string());
        let values: [String; 19] = [
            format!("{:?}", self.lambda_rgb),
            format!("{:?}", self.lambda_ssim),
            format!("{:?}", self.lambda_perc),
            format!("{:?}", self.lambda_lap),
            format!("{:?}", self.lr_position_init),
            format!("{:?}", self.lr_position_final),
            self.lr_position_steps.to_string(),
            format!("{:?}", self.lr_opacity),
            format!("{:?}", self.lr_scale),
            format!("{:?}", self.lr_feature),
            format!("{:?}", self.lr_net),
            self.densify_start.to_string(),
            self.densify_end.to_string(),
            self.densify_interval.to_string(),
            format!("{:?}", self.densify_grad_threshold),
            format!("{:?}", self.prune_opacity),
            format!("{:?}", self.max_gaussians_factor),
            iterations,
            self.seed.to_string(),
        ];
        for (k, v) in Self::KEYS.iter().zip(values) {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = TrainConfig::default();
        c.validate().unwrap();
        assert_eq!((c.lambda_rgb, c.lambda_ssim, c.lambda_perc), (0.8, 0.2, 0.2));
        assert_eq!(c.iterations_for(36), 180);
    }

    #[test]
    fn kv_roundtrip() {
        let mut c = TrainConfig {
            iterations: Some(77),
            seed: 9,
            lr_net: 3.5e-4,
            ..Default::default()
        };
        let text = c.to_kv();
        let mut back = TrainConfig::default();
        for line in text.lines() {
            let (k, v) = line.split_once(" = ").unwrap();
            back.set(k, v).unwrap();
        }
        assert_eq!(back, c);
        c.iterations = None;
        assert!(c.to_kv().contains("iterations = auto"));
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = TrainConfig::default();
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("lr_net", "fast").is_err());
        c.densify_start = 20_000;
        assert!(c.validate().is_err());
        let c = TrainConfig {
            lr_scale: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
