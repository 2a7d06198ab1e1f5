use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gesture_tuples::{DecoderParams, NoiseModel, PipelineConfig, SpeedPreset};
use serde::Deserialize;

/// Every knob of an experiment. Missing keys fall back to the defaults below;
/// command-line flags override whatever the file sets.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub m: usize,
    pub s: usize,
    /// Transitions to decode; `s - 1` when unset.
    pub k: Option<usize>,
    pub delta: f64,
    pub gamma: usize,
    pub post_window: usize,
    pub detector_queue: usize,
    pub sog_threshold: f64,
    pub eog_threshold: f64,
    pub sigma: f64,
    pub blend: usize,
    pub seed: u64,
    pub per_class: usize,
    pub speeds: Vec<SpeedPreset>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pipeline = PipelineConfig::default();
        Self {
            m: 10,
            s: 3,
            k: None,
            delta: pipeline.decoder.transition_cost,
            gamma: pipeline.decoder.beam_width,
            post_window: pipeline.post_window,
            detector_queue: pipeline.detector_queue_len,
            sog_threshold: pipeline.sog_threshold,
            eog_threshold: pipeline.eog_threshold,
            sigma: 0.0,
            blend: 0,
            seed: 0,
            per_class: 2,
            speeds: SpeedPreset::ALL.to_vec(),
            input: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn transitions(&self) -> Result<usize> {
        match self.k {
            Some(k) => Ok(k),
            None => Ok(DecoderParams::for_tuple_len(self.s)?.transitions),
        }
    }

    pub fn decoder(&self) -> Result<DecoderParams> {
        Ok(DecoderParams::new(
            self.transitions()?,
            self.delta,
            self.gamma,
        )?)
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let config = PipelineConfig {
            post_window: self.post_window,
            detector_queue_len: self.detector_queue,
            sog_threshold: self.sog_threshold,
            eog_threshold: self.eog_threshold,
            decoder: self.decoder()?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        let noise = NoiseModel {
            logit_sigma: self.sigma,
            blend_width: self.blend,
            seed: self.seed,
        };
        noise.validate()?;
        Ok(noise)
    }
}
