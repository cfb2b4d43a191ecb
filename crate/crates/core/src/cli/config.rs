//! `key = value` run configuration shared by all commands.

use std::path::Path;
use std::str::FromStr;

use crate::diffusion::Prediction;
use crate::error::{Error, Result};
use crate::fitting::FitWeights;
use crate::fusion::DEFAULT_GATE;
use crate::synth::SynthConfig;
use crate::trainer::TrainConfig;

/// A command configuration settable from text.
pub trait KeyValues {
    fn set(&mut self, key: &str, value: &str) -> Result<()>;
    /// Resolved configuration as `key = value` lines.
    fn to_kv(&self) -> String;
    fn validate(&self) -> Result<()>;
}

pub fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value {value:?} for {key}")))
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::config(format!("line {}: expected key = value", i + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::config(format!("line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Applies the file, then `--set key=value` overrides, then `--seed`, and validates.
pub fn resolve<C: KeyValues>(mut cfg: C, file: Option<&Path>, sets: &[String], seed: Option<u64>) -> Result<C> {
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (k, v) in parse_config_text(&text)? {
            cfg.set(&k, &v)?;
        }
    }
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override {s:?} is not key=value")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = seed {
        cfg.set("seed", &seed.to_string())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn kv_lines(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

impl KeyValues for TrainConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        TrainConfig::set(self, key, value)
    }
    fn to_kv(&self) -> String {
        TrainConfig::to_kv(self)
    }
    fn validate(&self) -> Result<()> {
        TrainConfig::validate(self)
    }
}

impl KeyValues for SynthConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        SynthConfig::set(self, key, value)
    }
    fn to_kv(&self) -> String {
        SynthConfig::to_kv(self)
    }
    fn validate(&self) -> Result<()> {
        SynthConfig::validate(self)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlignConfig {
    /// Recompute scales for every source frame instead of once from the first.
    pub per_frame: bool,
}

impl KeyValues for AlignConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "per_frame" => self.per_frame = parse_value(key, value)?,
            _ => return Err(Error::config(format!("unknown align-pose key {key:?}"))),
        }
        Ok(())
    }
    fn to_kv(&self) -> String {
        kv_lines(&[("per_frame", self.per_frame.to_string())])
    }
    fn validate(&self) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothMethod {
    Savgol,
    Momentum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothConfig {
    pub method: SmoothMethod,
    pub window: usize,
    pub order: usize,
    pub alpha_rotation: f64,
    pub alpha_translation: f64,
    pub alpha_shape: f64,
}

impl Default for SmoothConfig {
    fn default() -> Self {
        Self {
            method: SmoothMethod::Savgol,
            window: 9,
            order: 2,
            alpha_rotation: 0.6,
            alpha_translation: 0.6,
            alpha_shape: 0.6,
        }
    }
}

impl KeyValues for SmoothConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "method" => {
                self.method = match value {
                    "savgol" => SmoothMethod::Savgol,
                    "momentum" => SmoothMethod::Momentum,
                    _ => return Err(Error::config(format!("method must be savgol or momentum, got {value:?}"))),
                }
            }
            "window" => self.window = parse_value(key, value)?,
            "order" => self.order = parse_value(key, value)?,
            "alpha_rotation" => self.alpha_rotation = parse_value(key, value)?,
            "alpha_translation" => self.alpha_translation = parse_value(key, value)?,
            "alpha_shape" => self.alpha_shape = parse_value(key, value)?,
            _ => return Err(Error::config(format!("unknown smooth key {key:?}"))),
        }
        Ok(())
    }
    fn to_kv(&self) -> String {
        let method = match self.method {
            SmoothMethod::Savgol => "savgol",
            SmoothMethod::Momentum => "momentum",
        };
        kv_lines(&[
            ("method", method.to_string()),
            ("window", self.window.to_string()),
            ("order", self.order.to_string()),
            ("alpha_rotation", format!("{:?}", self.alpha_rotation)),
            ("alpha_translation", format!("{:?}", self.alpha_translation)),
            ("alpha_shape", format!("{:?}", self.alpha_shape)),
        ])
    }
    fn validate(&self) -> Result<()> {
        if self.window % 2 == 0 || self.order >= self.window {
            return Err(Error::config("window must be odd and larger than order"));
        }
        for (k, a) in [
            ("alpha_rotation", self.alpha_rotation),
            ("alpha_translation", self.alpha_translation),
            ("alpha_shape", self.alpha_shape),
        ] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::config(format!("{k} must lie in (0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuseConfig {
    pub threshold: f64,
}

impl Default for FuseConfig {
    fn default() -> Self {
        Self { threshold: DEFAULT_GATE }
    }
}

impl KeyValues for FuseConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "threshold" => self.threshold = parse_value(key, value)?,
            _ => return Err(Error::config(format!("unknown fuse key {key:?}"))),
        }
        Ok(())
    }
    fn to_kv(&self) -> String {
        kv_lines(&[("threshold", format!("{:?}", self.threshold))])
    }
    fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::config("threshold must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub weights: FitWeights,
    /// Standard deviation of the noise added to the initial rotations and translations.
    pub init_noise: f64,
    /// Fit only the first `frames` frames; 0 means all.
    pub frames: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            weights: FitWeights::default(),
            init_noise: 0.0,
            frames: 0,
            seed: 0,
        }
    }
}

impl KeyValues for FitConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let w = &mut self.weights;
        match key {
            "lambda_kpt" => w.kpt = parse_value(key, value)?,
            "lambda_reg" => w.reg = parse_value(key, value)?,
            "lambda_temp" => w.temp = parse_value(key, value)?,
            "stage1_iters" => w.stage1_iters = parse_value(key, value)?,
            "stage2_iters" => w.stage2_iters = parse_value(key, value)?,
            "lr" => w.lr = parse_value(key, value)?,
            "translation_scale" => w.translation_scale = parse_value(key, value)?,
            "smooth" => w.smooth = parse_value(key, value)?,
            "init_noise" => self.init_noise = parse_value(key, value)?,
            "frames" => self.frames = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            _ => return Err(Error::config(format!("unknown fit key {key:?}"))),
        }
        Ok(())
    }
    fn to_kv(&self) -> String {
        let w = &self.weights;
        kv_lines(&[
            ("lambda_kpt", format!("{:?}", w.kpt)),
            ("lambda_reg", format!("{:?}", w.reg)),
            ("lambda_temp", format!("{:?}", w.temp)),
            ("stage1_iters", w.stage1_iters.to_string()),
            ("stage2_iters", w.stage2_iters.to_string()),
            ("lr", format!("{:?}", w.lr)),
            ("translation_scale", format!("{:?}", w.translation_scale)),
            ("smooth", w.smooth.to_string()),
            ("init_noise", format!("{:?}", self.init_noise)),
            ("frames", self.frames.to_string()),
            ("seed", self.seed.to_string()),
        ])
    }
    fn validate(&self) -> Result<()> {
        let w = &self.weights;
        if !(w.lr > 0.0 && w.translation_scale > 0.0) {
            return Err(Error::config("lr and translation_scale must be positive"));
        }
        if !(w.kpt >= 0.0 && w.reg >= 0.0 && w.temp >= 0.0 && self.init_noise >= 0.0) {
            return Err(Error::config("loss weights and init_noise must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    pub sh_degree: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { sh_degree: 3 }
    }
}

impl KeyValues for RenderConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "sh_degree" => self.sh_degree = parse_value(key, value)?,
            _ => return Err(Error::config(format!("unknown render key {key:?}"))),
        }
        Ok(())
    }
    fn to_kv(&self) -> String {
        kv_lines(&[("sh_degree", self.sh_degree.to_string())])
    }
    fn validate(&self) -> Result<()> {
        if self.sh_degree > 3 {
            return Err(Error::config("sh_degree must be at most 3"));
        }
        Ok(())
    }
}

/// `eval` has no tunables; any key is rejected.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalConfig;

impl KeyValues for EvalConfig {
    fn set(&mut self, key: &str, _value: &str) -> Result<()> {
        Err(Error::config(format!("unknown eval key {key:?}")))
    }
    fn to_kv(&self) -> String {
        String::new()
    }
    fn validate(&self) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoConfig {
    pub steps: Vec<usize>,
    pub data_std: f64,
    pub prediction: Prediction,
    pub zero_snr: bool,
    pub batch: usize,
    pub seed: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            steps: vec![5, 10, 20, 50, 100],
            data_std: 0.5,
            prediction: Prediction::V,
            zero_snr: true,
            batch: 64,
            seed: 0,
        }
    }
}

impl KeyValues for DemoConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "steps" => {
                self.steps = value
                    .split(',')
                    .map(|s| parse_value(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "data_std" => self.data_std = parse_value(key, value)?,
            "prediction" => self.prediction = value.parse()?,
            "zero_snr" => self.zero_snr = parse_value(key, value)?,
            "batch" => self.batch = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            _ => return Err(Error::config(format!("unknown ddim-demo key {key:?}"))),
        }
        Ok(())
    }
    fn to_kv(&self) -> String {
        let steps: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        let prediction = match self.prediction {
            Prediction::Epsilon => "epsilon",
            Prediction::V => "v",
        };
        kv_lines(&[
            ("steps", steps.join(",")),
            ("data_std", format!("{:?}", self.data_std)),
            ("prediction", prediction.to_string()),
            ("zero_snr", self.zero_snr.to_string()),
            ("batch", self.batch.to_string()),
            ("seed", self.seed.to_string()),
        ])
    }
    fn validate(&self) -> Result<()> {
        if self.steps.is_empty() || self.steps.iter().any(|&s| s == 0 || s > crate::diffusion::TRAIN_STEPS) {
            return Err(Error::config("steps must be a list of counts in 1..=1000"));
        }
        if !(self.data_std > 0.0) || self.batch == 0 {
            return Err(Error::config("data_std and batch must be positive"));
        }
        if self.zero_snr && self.prediction == Prediction::Epsilon {
            return Err(Error::config("zero_snr sampling needs prediction = v"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_spacing() {
        let kv = parse_config_text("# header\n a = 1 \n\nb=two # trailing\n").unwrap();
        assert_eq!(kv, vec![("a".into(), "1".into()), ("b".into(), "two".into())]);
        assert!(parse_config_text("novalue\n").is_err());
        assert!(parse_config_text(" = 3\n").is_err());
    }

    #[test]
    fn overrides_win_and_unknown_keys_fail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "threshold = 0.5\n").unwrap();
        let c = resolve(FuseConfig::default(), Some(&path), &["threshold=0.25".into()], None).unwrap();
        assert_eq!(c.threshold, 0.25);
        std::fs::write(&path, "treshold = 0.5\n").unwrap();
        assert!(resolve(FuseConfig::default(), Some(&path), &[], None).is_err());
        assert!(resolve(EvalConfig, None, &[], Some(3)).is_err());
    }

    #[test]
    fn echo_round_trips() {
        fn check<C: KeyValues + Default + PartialEq + std::fmt::Debug>(c: C) {
            let mut back = C::default();
            for (k, v) in parse_config_text(&c.to_kv()).unwrap() {
                back.set(&k, &v).unwrap();
            }
            assert_eq!(back, c);
        }
        check(SmoothConfig { method: SmoothMethod::Momentum, alpha_shape: 0.7, ..Default::default() });
        check(FitConfig { init_noise: 0.05, seed: 4, ..Default::default() });
        check(DemoConfig { steps: vec![3, 7], prediction: Prediction::Epsilon, zero_snr: false, ..Default::default() });
        check(AlignConfig { per_frame: true });
        check(RenderConfig { sh_degree: 1 });
        check(SynthConfig { frames: 36, focal: 150.5, ..Default::default() });
        check(TrainConfig { iterations: Some(12), ..Default::default() });
    }
}
