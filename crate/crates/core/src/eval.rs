//! Detector, tuple and single errors, and total accuracy over a test set.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alphabet::{AlphabetConfig, GestureTuple};
use crate::error::{Error, Result};
use crate::pipeline::{run_stream, EventKind, PipelineConfig, RawScoreFrame, RecognitionEvent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub ground_truth: GestureTuple,
    pub events: Vec<RecognitionEvent>,
    pub predicted: Option<GestureTuple>,
}

impl EvalRecord {
    /// Takes the prediction from the first `TupleRecognized` event.
    pub fn new(ground_truth: GestureTuple, events: Vec<RecognitionEvent>) -> Self {
        let predicted = events
            .iter()
            .find(|e| e.kind == EventKind::TupleRecognized)
            .and_then(|e| e.tuple.clone());
        Self {
            ground_truth,
            events,
            predicted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Correct,
    DetectorError,
    /// Wrong sequence, with the number of wrongly recognized phonemes.
    TupleError(usize),
}

/// Number of positions where two tuples differ. Tuples of different length
/// count as wrong everywhere: the result is the longer length.
pub fn single_errors(truth: &GestureTuple, predicted: &GestureTuple) -> usize {
    if truth.len() != predicted.len() {
        return truth.len().max(predicted.len());
    }
    truth
        .phonemes()
        .iter()
        .zip(predicted.phonemes())
        .filter(|(a, b)| a != b)
        .count()
}

pub fn classify_record(record: &EvalRecord) -> Outcome {
    let has = |kind| record.events.iter().any(|e| e.kind == kind);
    if !has(EventKind::StartOfGesture)
        || !has(EventKind::EndOfGesture)
        || has(EventKind::DecodeFailed)
    {
        return Outcome::DetectorError;
    }
    match &record.predicted {
        None => Outcome::DetectorError,
        Some(p) if *p == record.ground_truth => Outcome::Correct,
        Some(p) => Outcome::TupleError(single_errors(&record.ground_truth, p)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_samples: usize,
    pub err_det: usize,
    pub err_tup: usize,
    pub err_sin: usize,
    pub accuracy_percent: f64,
}

impl EvalReport {
    /// Builds a report from raw counts; accuracy is `(1 - (det + tup) / n) * 100`.
    pub fn from_counts(
        n_samples: usize,
        err_det: usize,
        err_tup: usize,
        err_sin: usize,
    ) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::EmptyInput);
        }
        if err_det + err_tup > n_samples {
            return Err(Error::Domain(format!(
                "{} errors exceed {n_samples} samples",
                err_det + err_tup
            )));
        }
        let accuracy_percent = (1.0 - (err_det + err_tup) as f64 / n_samples as f64) * 100.0;
        Ok(Self {
            n_samples,
            err_det,
            err_tup,
            err_sin,
            accuracy_percent,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(line: &str) -> Result<Self> {
        serde_json::from_str(line.trim()).map_err(|e| Error::Domain(format!("bad report: {e}")))
    }
}

/// Aligned table with Det, Tup, Sin and Acc columns.
impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>8} {:>6} {:>6} {:>6} {:>8}",
            "Samples", "Det", "Tup", "Sin", "Acc(%)"
        )?;
        write!(
            f,
            "{:>8} {:>6} {:>6} {:>6} {:>8.2}",
            self.n_samples, self.err_det, self.err_tup, self.err_sin, self.accuracy_percent
        )
    }
}

pub fn aggregate_outcomes<I>(outcomes: I) -> Result<EvalReport>
where
    I: IntoIterator<Item = Outcome>,
{
    let (mut n, mut det, mut tup, mut sin) = (0, 0, 0, 0);
    for outcome in outcomes {
        n += 1;
        match outcome {
            Outcome::Correct => {}
            Outcome::DetectorError => det += 1,
            Outcome::TupleError(h) => {
                tup += 1;
                sin += h;
            }
        }
    }
    EvalReport::from_counts(n, det, tup, sin)
}

pub fn aggregate(records: &[EvalRecord]) -> Result<EvalReport> {
    aggregate_outcomes(records.iter().map(classify_record))
}

/// Runs a fresh pipeline over one recording and pairs its events with the truth.
pub fn evaluate_stream<I>(
    ground_truth: GestureTuple,
    alphabet: AlphabetConfig,
    config: PipelineConfig,
    frames: I,
) -> Result<EvalRecord>
where
    I: IntoIterator<Item = RawScoreFrame>,
{
    let events = run_stream(alphabet, config, frames)?;
    Ok(EvalRecord::new(ground_truth, events))
}
