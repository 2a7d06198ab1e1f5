//! Synthetic score streams standing in for a frame classifier.
//!
//! A performance is scripted as no-gesture padding, preparation, one segment
//! per phoneme, retraction and padding again. Rendering turns each frame into
//! a logit vector that is high on the active class, cross-fades linearly
//! between neighbouring segments and adds Gaussian noise.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::alphabet::{enumerate_tuples, AlphabetConfig, GestureTuple};
use crate::error::{Error, Result};
use crate::pipeline::RawScoreFrame;

/// Logit of the active class in a clean frame.
pub const LOGIT_HIGH: f64 = 5.0;
pub const LOGIT_LOW: f64 = 0.0;

/// Frames per second of the recordings the presets were measured at.
pub const FRAMES_PER_SECOND: usize = 45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedPreset {
    Slow,
    Medium,
    Fast,
}

impl SpeedPreset {
    pub const ALL: [SpeedPreset; 3] = [SpeedPreset::Slow, SpeedPreset::Medium, SpeedPreset::Fast];

    /// Frames available for preparation, phonemes and retraction.
    pub fn frame_budget(&self) -> usize {
        match self {
            SpeedPreset::Slow => 300,
            SpeedPreset::Medium => 240,
            SpeedPreset::Fast => 180,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpeedPreset::Slow => "slow",
            SpeedPreset::Medium => "medium",
            SpeedPreset::Fast => "fast",
        }
    }
}

impl fmt::Display for SpeedPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpeedPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "slow" => Ok(SpeedPreset::Slow),
            "medium" => Ok(SpeedPreset::Medium),
            "fast" => Ok(SpeedPreset::Fast),
            other => Err(Error::Domain(format!("unknown speed preset {other:?}"))),
        }
    }
}

/// Minimum segment lengths of a scripted performance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLimits {
    /// Five post-processing windows at the default width of 5.
    pub min_phoneme_frames: usize,
    /// One full detector queue of default-width windows, so the detector can
    /// see six clean signaling outputs regardless of window alignment.
    pub min_signal_frames: usize,
    pub padding_frames: usize,
}

impl Default for SegmentLimits {
    fn default() -> Self {
        Self {
            min_phoneme_frames: 25,
            min_signal_frames: 40,
            padding_frames: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub class: usize,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationScript {
    pub alphabet: AlphabetConfig,
    pub segments: Vec<Segment>,
    pub ground_truth: GestureTuple,
}

impl SimulationScript {
    pub fn total_frames(&self) -> usize {
        self.segments.iter().map(|s| s.frames).sum()
    }

    /// Frames spent on preparation, phonemes and retraction.
    pub fn gesture_frames(&self) -> usize {
        let ng = self.alphabet.no_gesture();
        self.segments
            .iter()
            .filter(|s| s.class != ng)
            .map(|s| s.frames)
            .sum()
    }

    /// Active class of every frame.
    pub fn frame_classes(&self) -> Vec<usize> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.class, s.frames))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of the per-entry Gaussian noise on logits.
    pub logit_sigma: f64,
    /// Width in frames of the linear cross-fade at each segment boundary.
    pub blend_width: usize,
    pub seed: u64,
}

impl NoiseModel {
    pub fn clean(seed: u64) -> Self {
        Self {
            logit_sigma: 0.0,
            blend_width: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.logit_sigma.is_finite() && self.logit_sigma >= 0.0) {
            return Err(Error::Domain(format!(
                "noise sigma must be finite and non-negative, got {}",
                self.logit_sigma
            )));
        }
        Ok(())
    }
}

/// Scripts one performance of `tuple` within the preset's frame budget.
pub fn script_performance(
    alphabet: AlphabetConfig,
    tuple: &GestureTuple,
    speed: SpeedPreset,
    seed: u64,
) -> Result<SimulationScript> {
    script_performance_with(alphabet, tuple, speed, seed, SegmentLimits::default())
}

pub fn script_performance_with(
    alphabet: AlphabetConfig,
    tuple: &GestureTuple,
    speed: SpeedPreset,
    seed: u64,
    limits: SegmentLimits,
) -> Result<SimulationScript> {
    tuple.check_alphabet(alphabet.num_phonemes())?;
    let budget = speed.frame_budget();
    let s = tuple.len();
    let required = 2 * limits.min_signal_frames + s * limits.min_phoneme_frames;
    if budget < required {
        return Err(Error::InfeasibleBudget { budget, required });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // performers use between 80% and 100% of the budget
    let low = required.max(budget * 4 / 5);
    let total = rng.random_range(low..=budget);
    let spare = total - required;

    // spread the spare frames with random weights over the s + 2 segments
    let weights: Vec<f64> = (0..s + 2).map(|_| rng.random_range(0.05..1.0)).collect();
    let weight_sum: f64 = weights.iter().sum();
    let mut extra: Vec<usize> = weights
        .iter()
        .map(|w| (spare as f64 * w / weight_sum).floor() as usize)
        .collect();
    let assigned: usize = extra.iter().sum();
    extra[s + 1] += spare - assigned;

    let mut segments = Vec::with_capacity(s + 4);
    segments.push(Segment {
        class: alphabet.no_gesture(),
        frames: limits.padding_frames,
    });
    segments.push(Segment {
        class: alphabet.preparation(),
        frames: limits.min_signal_frames + extra[0],
    });
    for (i, &p) in tuple.phonemes().iter().enumerate() {
        segments.push(Segment {
            class: p,
            frames: limits.min_phoneme_frames + extra[i + 1],
        });
    }
    segments.push(Segment {
        class: alphabet.retraction(),
        frames: limits.min_signal_frames + extra[s + 1],
    });
    segments.push(Segment {
        class: alphabet.no_gesture(),
        frames: limits.padding_frames,
    });
    segments.retain(|s| s.frames > 0);

    Ok(SimulationScript {
        alphabet,
        segments,
        ground_truth: tuple.clone(),
    })
}

/// Renders a script into raw score frames.
pub fn render_scores(script: &SimulationScript, noise: &NoiseModel) -> Result<Vec<RawScoreFrame>> {
    noise.validate()?;
    let classes = script.frame_classes();
    let width = script.alphabet.num_classes();

    // first frame index of every segment after the first
    let mut boundaries = Vec::with_capacity(script.segments.len());
    let mut at = 0;
    for seg in &script.segments {
        if at > 0 {
            boundaries.push(at);
        }
        at += seg.frames;
    }

    let normal = Normal::new(0.0, noise.logit_sigma)
        .map_err(|e| Error::Domain(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let half = noise.blend_width as f64 / 2.0;

    let mut frames = Vec::with_capacity(classes.len());
    for (f, &active) in classes.iter().enumerate() {
        let mut logits = vec![LOGIT_LOW; width];
        logits[active] = LOGIT_HIGH;

        if noise.blend_width > 0 {
            let nearest = boundaries
                .iter()
                .copied()
                .min_by_key(|&b| (f as i64 - b as i64).unsigned_abs());
            if let Some(b) = nearest {
                let offset = f as f64 - b as f64;
                if offset.abs() < half {
                    // alpha runs 0 -> 1 across the fade and is 0.5 at the boundary frame
                    let alpha = (offset + half) / noise.blend_width as f64;
                    let prev = classes[b - 1];
                    let next = classes[b];
                    logits[prev] = (1.0 - alpha) * LOGIT_HIGH + alpha * LOGIT_LOW;
                    logits[next] = alpha * LOGIT_HIGH + (1.0 - alpha) * LOGIT_LOW;
                }
            }
        }

        if noise.logit_sigma > 0.0 {
            for l in logits.iter_mut() {
                *l += normal.sample(&mut rng);
            }
        }
        frames.push(RawScoreFrame::new(f, logits));
    }
    Ok(frames)
}

/// One synthetic recording with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub ground_truth: GestureTuple,
    pub speed: SpeedPreset,
    pub seed: u64,
    pub frames: Vec<RawScoreFrame>,
}

/// Description of a sample without its frames; [`TestSetPlan::render`] produces them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePlan {
    pub index: usize,
    pub ground_truth: GestureTuple,
    pub speed: SpeedPreset,
    pub seed: u64,
}

/// A deterministic test set: `samples_per_class` recordings for every tuple.
#[derive(Debug, Clone)]
pub struct TestSetPlan {
    pub alphabet: AlphabetConfig,
    pub noise: NoiseModel,
    pub samples: Vec<SamplePlan>,
}

impl TestSetPlan {
    pub fn new(
        m: usize,
        s: usize,
        samples_per_class: usize,
        speeds: &[SpeedPreset],
        noise: NoiseModel,
    ) -> Result<Self> {
        noise.validate()?;
        let alphabet = AlphabetConfig::new(m)?;
        if speeds.is_empty() {
            return Err(Error::Domain(
                "at least one speed preset is required".into(),
            ));
        }
        let tuples = enumerate_tuples(m, s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let mut samples = Vec::with_capacity(tuples.len() * samples_per_class);
        for tuple in tuples {
            for _ in 0..samples_per_class {
                let index = samples.len();
                samples.push(SamplePlan {
                    index,
                    ground_truth: tuple.clone(),
                    speed: speeds[index % speeds.len()],
                    seed: rng.random(),
                });
            }
        }
        Ok(Self {
            alphabet,
            noise,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Scripts and renders one planned sample; the sample seed drives both.
    pub fn render(&self, plan: &SamplePlan) -> Result<Sample> {
        let script = script_performance(self.alphabet, &plan.ground_truth, plan.speed, plan.seed)?;
        let noise = NoiseModel {
            seed: plan.seed,
            ..self.noise
        };
        let frames = render_scores(&script, &noise)?;
        Ok(Sample {
            index: plan.index,
            ground_truth: plan.ground_truth.clone(),
            speed: plan.speed,
            seed: plan.seed,
            frames,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = Result<Sample>> + '_ {
        self.samples.iter().map(|p| self.render(p))
    }
}

/// Every sample of the test set, rendered.
pub fn generate_test_set(
    m: usize,
    s: usize,
    samples_per_class: usize,
    speeds: &[SpeedPreset],
    noise: NoiseModel,
) -> Result<Vec<Sample>> {
    TestSetPlan::new(m, s, samples_per_class, speeds, noise)?
        .iter()
        .collect()
}
