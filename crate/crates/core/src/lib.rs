//! Recognition of scaled hand-gesture tuples from streams of class scores.
//!
//! Gestures are tuples of phonemes (static hand poses) performed one after
//! another. A frame classifier, external to this crate, emits one score per
//! class: every phoneme plus preparation, retraction and no-gesture. The
//! [`pipeline`] turns those scores into start/end flags and a classifier
//! queue, and the [`decoder`] recovers the phoneme sequence once the gesture
//! has ended. [`simulator`] produces labeled synthetic streams and [`eval`]
//! scores recognition runs.

pub mod alphabet;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod formats;
pub mod pipeline;
pub mod simulator;

pub use alphabet::{
    enumerate_tuples, enumerate_tuples_capped, tuple_at_index, tuple_count, tuple_index,
    AlphabetConfig, GestureTuple, Label,
};
pub use decoder::{
    brute_force_decode, decode, init_beam, step_beam, Beam, BeamDecoder, DecoderParams, Path,
    ScoreMatrix,
};
pub use error::{Error, Result};
pub use eval::{aggregate, classify_record, EvalRecord, EvalReport, Outcome};
pub use pipeline::{
    post_process, EventKind, Phase, Pipeline, PipelineConfig, RawScoreFrame, RecognitionEvent,
};
pub use simulator::{
    generate_test_set, render_scores, script_performance, NoiseModel, SimulationScript,
    SpeedPreset, TestSetPlan,
};
