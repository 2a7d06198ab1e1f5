//! Online recognition: post-processing, start/end detection and decoding.
//!
//! Raw score frames are averaged over non-overlapping windows and softmaxed.
//! Each post-processed vector enters the detector queue. While idle, the sum of
//! preparation probabilities over the queue raising above the start threshold
//! flags a start of gesture; while a gesture is active, the retraction sum
//! flags its end. Between the two flags the phoneme part of every
//! post-processed vector is renormalized and stored in the classifier queue,
//! which is decoded once at the end flag.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::alphabet::{AlphabetConfig, GestureTuple};
use crate::decoder::{decode, DecoderParams, ScoreMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawScoreFrame {
    pub timestamp: usize,
    pub scores: Vec<f64>,
}

impl RawScoreFrame {
    pub fn new(timestamp: usize, scores: Vec<f64>) -> Self {
        Self { timestamp, scores }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Width of the non-overlapping averaging window.
    pub post_window: usize,
    pub detector_queue_len: usize,
    pub sog_threshold: f64,
    pub eog_threshold: f64,
    pub decoder: DecoderParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            post_window: 5,
            detector_queue_len: 8,
            sog_threshold: 5.0,
            eog_threshold: 5.0,
            decoder: DecoderParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.post_window == 0 {
            return Err(Error::Domain(
                "post-processing window must be positive".into(),
            ));
        }
        if self.detector_queue_len == 0 {
            return Err(Error::Domain(
                "detector queue length must be positive".into(),
            ));
        }
        let limit = self.detector_queue_len as f64;
        for (name, value) in [("start", self.sog_threshold), ("end", self.eog_threshold)] {
            if !(value > 0.0 && value <= limit) {
                return Err(Error::Domain(format!(
                    "{name} threshold {value} must lie in (0, {limit}]"
                )));
            }
        }
        self.decoder.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Idle,
    GestureActive,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flag {
    StartOfGesture,
    EndOfGesture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "SoG")]
    StartOfGesture,
    #[serde(rename = "EoG")]
    EndOfGesture,
    TupleRecognized,
    DecodeFailed,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::StartOfGesture => "SoG",
            EventKind::EndOfGesture => "EoG",
            EventKind::TupleRecognized => "TupleRecognized",
            EventKind::DecodeFailed => "DecodeFailed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionEvent {
    pub kind: EventKind,
    /// Timestamp of the last raw frame of the post-processing window that produced the event.
    pub frame: usize,
    pub tuple: Option<GestureTuple>,
    pub score: Option<f64>,
}

impl RecognitionEvent {
    fn flag(kind: EventKind, frame: usize) -> Self {
        Self {
            kind,
            frame,
            tuple: None,
            score: None,
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Elementwise mean of a full window of raw frames, softmaxed over all classes.
pub fn post_process(buffer: &[RawScoreFrame], post_window: usize) -> Result<Vec<f64>> {
    if buffer.len() != post_window || buffer.is_empty() {
        return Err(Error::BufferLength {
            expected: post_window,
            actual: buffer.len(),
        });
    }
    let width = buffer[0].scores.len();
    let n = buffer.len() as f64;
    let mut mean = vec![0.0; width];
    for frame in buffer {
        if frame.scores.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                actual: frame.scores.len(),
            });
        }
        // divide first so large finite scores cannot overflow the sum
        for (m, s) in mean.iter_mut().zip(&frame.scores) {
            *m += s / n;
        }
    }
    Ok(softmax(&mean))
}

/// Online recognizer for one recording.
#[derive(Debug, Clone)]
pub struct Pipeline {
    alphabet: AlphabetConfig,
    config: PipelineConfig,
    phase: Phase,
    post_buffer: Vec<RawScoreFrame>,
    detector_queue: VecDeque<Vec<f64>>,
    classifier_queue: Vec<Vec<f64>>,
    events: Vec<RecognitionEvent>,
}

impl Pipeline {
    pub fn new(alphabet: AlphabetConfig, config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            alphabet,
            config,
            phase: Phase::Idle,
            post_buffer: Vec::with_capacity(config.post_window),
            detector_queue: VecDeque::with_capacity(config.detector_queue_len),
            classifier_queue: Vec::new(),
            events: Vec::new(),
        })
    }

    pub fn alphabet(&self) -> &AlphabetConfig {
        &self.alphabet
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn classifier_queue(&self) -> &[Vec<f64>] {
        &self.classifier_queue
    }

    pub fn detector_queue(&self) -> impl Iterator<Item = &[f64]> {
        self.detector_queue.iter().map(Vec::as_slice)
    }

    pub fn events(&self) -> &[RecognitionEvent] {
        &self.events
    }

    /// Back to `Idle` with empty queues, ready for the next recording.
    pub fn reset(&mut self) {
        self.phase = Phase::Idle;
        self.post_buffer.clear();
        self.detector_queue.clear();
        self.classifier_queue.clear();
        self.events.clear();
    }

    /// Feeds one post-processed vector to the detector queue.
    pub fn detector_update(&mut self, vector: &[f64]) -> Option<Flag> {
        if self.phase == Phase::Done {
            return None;
        }
        if self.detector_queue.len() == self.config.detector_queue_len {
            self.detector_queue.pop_front();
        }
        self.detector_queue.push_back(vector.to_vec());

        match self.phase {
            Phase::Idle => {
                let class = self.alphabet.preparation();
                if self.queue_sum(class) > self.config.sog_threshold {
                    self.phase = Phase::GestureActive;
                    self.detector_queue.clear();
                    return Some(Flag::StartOfGesture);
                }
            }
            Phase::GestureActive => {
                let class = self.alphabet.retraction();
                if self.queue_sum(class) > self.config.eog_threshold {
                    self.phase = Phase::Done;
                    return Some(Flag::EndOfGesture);
                }
            }
            Phase::Done => {}
        }
        None
    }

    fn queue_sum(&self, class: usize) -> f64 {
        self.detector_queue.iter().map(|v| v[class]).sum()
    }

    /// Phoneme entries of a post-processed vector renormalized over the phonemes.
    /// Equivalent to a softmax restricted to the phoneme logits of the averaged window.
    pub fn phoneme_column(&self, vector: &[f64]) -> Vec<f64> {
        let phonemes = &vector[..self.alphabet.num_phonemes()];
        let sum: f64 = phonemes.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            phonemes.iter().map(|p| p / sum).collect()
        } else {
            let m = phonemes.len();
            vec![1.0 / m as f64; m]
        }
    }

    /// Consumes one raw frame and returns the events it caused.
    pub fn push_frame(&mut self, frame: RawScoreFrame) -> Result<Vec<RecognitionEvent>> {
        let expected = self.alphabet.num_classes();
        if frame.scores.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: frame.scores.len(),
            });
        }
        if let Some(bad) = frame.scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::Domain(format!(
                "frame {} holds a non-finite score {bad}",
                frame.timestamp
            )));
        }
        if self.phase == Phase::Done {
            return Ok(Vec::new());
        }

        let timestamp = frame.timestamp;
        self.post_buffer.push(frame);
        if self.post_buffer.len() < self.config.post_window {
            return Ok(Vec::new());
        }
        let vector = post_process(&self.post_buffer, self.config.post_window)?;
        self.post_buffer.clear();

        let mut emitted = Vec::new();
        let was_active = self.phase == Phase::GestureActive;
        match self.detector_update(&vector) {
            Some(Flag::StartOfGesture) => {
                emitted.push(RecognitionEvent::flag(EventKind::StartOfGesture, timestamp));
            }
            Some(Flag::EndOfGesture) => {
                emitted.push(RecognitionEvent::flag(EventKind::EndOfGesture, timestamp));
                emitted.push(self.run_decoder(timestamp));
            }
            None => {
                if was_active {
                    let column = self.phoneme_column(&vector);
                    self.classifier_queue.push(column);
                }
            }
        }
        self.events.extend(emitted.iter().cloned());
        Ok(emitted)
    }

    /// Feeds a batch of frames in order.
    pub fn push_frames<I>(&mut self, frames: I) -> Result<Vec<RecognitionEvent>>
    where
        I: IntoIterator<Item = RawScoreFrame>,
    {
        let mut out = Vec::new();
        for frame in frames {
            out.extend(self.push_frame(frame)?);
        }
        Ok(out)
    }

    fn run_decoder(&self, frame: usize) -> RecognitionEvent {
        let decoded = ScoreMatrix::new(self.classifier_queue.clone())
            .and_then(|matrix| decode(&matrix, &self.config.decoder))
            .and_then(|path| GestureTuple::new(path.sequence).map(|t| (t, path.score)));
        match decoded {
            Ok((tuple, score)) => RecognitionEvent {
                kind: EventKind::TupleRecognized,
                frame,
                tuple: Some(tuple),
                score: Some(score),
            },
            Err(_) => RecognitionEvent::flag(EventKind::DecodeFailed, frame),
        }
    }
}

/// Runs a fresh pipeline over a whole recording.
pub fn run_stream<I>(
    alphabet: AlphabetConfig,
    config: PipelineConfig,
    frames: I,
) -> Result<Vec<RecognitionEvent>>
where
    I: IntoIterator<Item = RawScoreFrame>,
{
    let mut pipeline = Pipeline::new(alphabet, config)?;
    pipeline.push_frames(frames)
}
