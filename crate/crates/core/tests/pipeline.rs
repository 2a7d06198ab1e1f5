use gesture_tuples::eval::{evaluate_stream, Outcome};
use gesture_tuples::pipeline::run_stream;
use gesture_tuples::simulator::{render_scores, script_performance, TestSetPlan};
use gesture_tuples::{
    classify_record, AlphabetConfig, EventKind, GestureTuple, NoiseModel, Pipeline, PipelineConfig,
    RawScoreFrame, SpeedPreset,
};
use proptest::prelude::*;

fn kinds(events: &[gesture_tuples::RecognitionEvent]) -> Vec<EventKind> {
    events.iter().map(|e| e.kind).collect()
}

fn is_grammatical(kinds: &[EventKind]) -> bool {
    use EventKind::*;
    match kinds {
        [] | [StartOfGesture] | [StartOfGesture, EndOfGesture] => true,
        [StartOfGesture, EndOfGesture, last] => matches!(last, TupleRecognized | DecodeFailed),
        _ => false,
    }
}

#[test]
fn clean_simulated_performance_is_recognized() {
    let alphabet = AlphabetConfig::default();
    let truth = GestureTuple::new(vec![5, 1, 3]).unwrap();
    for speed in SpeedPreset::ALL {
        for seed in 0..20 {
            let script = script_performance(alphabet, &truth, speed, seed).unwrap();
            let frames = render_scores(&script, &NoiseModel::clean(seed)).unwrap();
            let events = run_stream(alphabet, PipelineConfig::default(), frames).unwrap();
            assert_eq!(
                kinds(&events),
                [
                    EventKind::StartOfGesture,
                    EventKind::EndOfGesture,
                    EventKind::TupleRecognized
                ],
                "{speed} seed {seed}"
            );
            assert_eq!(events[2].tuple.as_ref(), Some(&truth));
        }
    }
}

#[test]
fn blended_clean_streams_are_still_recognized() {
    let plan = TestSetPlan::new(
        4,
        3,
        1,
        &SpeedPreset::ALL,
        NoiseModel {
            logit_sigma: 0.0,
            blend_width: 10,
            seed: 11,
        },
    )
    .unwrap();
    for sample in plan.iter() {
        let sample = sample.unwrap();
        let record = evaluate_stream(
            sample.ground_truth.clone(),
            plan.alphabet,
            PipelineConfig::default(),
            sample.frames,
        )
        .unwrap();
        assert_eq!(
            classify_record(&record),
            Outcome::Correct,
            "{}",
            sample.ground_truth
        );
    }
}

#[test]
fn classifier_queue_spans_the_gesture() {
    let alphabet = AlphabetConfig::default();
    let truth = GestureTuple::new(vec![2, 7, 2]).unwrap();
    let script = script_performance(alphabet, &truth, SpeedPreset::Medium, 4).unwrap();
    let frames = render_scores(&script, &NoiseModel::clean(4)).unwrap();
    let mut pipeline = Pipeline::new(alphabet, PipelineConfig::default()).unwrap();
    let mut sog_output = None;
    let mut eog_output = None;
    for (i, chunk) in frames.chunks(5).enumerate() {
        for event in pipeline.push_frames(chunk.to_vec()).unwrap() {
            match event.kind {
                EventKind::StartOfGesture => sog_output = Some(i),
                EventKind::EndOfGesture => eog_output = Some(i),
                _ => {}
            }
        }
    }
    let (sog, eog) = (sog_output.unwrap(), eog_output.unwrap());
    // outputs strictly between the two triggering ones
    assert_eq!(pipeline.classifier_queue().len(), eog - sog - 1);
    for column in pipeline.classifier_queue() {
        assert!((column.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }
}

fn arb_frames() -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(
        prop_oneof![
            proptest::collection::vec(-20.0f64..20.0, 13),
            // one dominant class, often a signaling one
            (0usize..13, 0.0f64..12.0).prop_map(|(c, h)| {
                let mut v = vec![0.0; 13];
                v[c] = h;
                v
            }),
            (10usize..12, 3.0f64..8.0).prop_map(|(c, h)| {
                let mut v = vec![0.0; 13];
                v[c] = h;
                v
            }),
        ],
        0..200,
    )
}

fn to_frames(rows: &[Vec<f64>]) -> Vec<RawScoreFrame> {
    rows.iter()
        .enumerate()
        .map(|(i, s)| RawScoreFrame::new(i, s.clone()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn batching_does_not_change_events(rows in arb_frames(), batch in 1usize..17) {
        let alphabet = AlphabetConfig::default();
        let config = PipelineConfig { sog_threshold: 2.0, eog_threshold: 2.0, ..PipelineConfig::default() };
        let frames = to_frames(&rows);

        let mut single = Pipeline::new(alphabet, config).unwrap();
        let mut one_at_a_time = Vec::new();
        for f in frames.clone() {
            one_at_a_time.extend(single.push_frame(f).unwrap());
        }

        let mut batched = Pipeline::new(alphabet, config).unwrap();
        let mut in_batches = Vec::new();
        for chunk in frames.chunks(batch) {
            in_batches.extend(batched.push_frames(chunk.to_vec()).unwrap());
        }
        prop_assert_eq!(&one_at_a_time, &in_batches);
        prop_assert_eq!(single.events(), &one_at_a_time[..]);
    }

    #[test]
    fn events_follow_the_grammar(rows in arb_frames(), window in 1usize..6, threshold in 0.3f64..1.0) {
        let alphabet = AlphabetConfig::default();
        let config = PipelineConfig {
            post_window: window,
            detector_queue_len: 3,
            sog_threshold: 3.0 * threshold,
            eog_threshold: 3.0 * threshold,
            ..PipelineConfig::default()
        };
        let events = run_stream(alphabet, config, to_frames(&rows)).unwrap();
        prop_assert!(is_grammatical(&kinds(&events)), "{:?}", kinds(&events));
        for e in &events {
            prop_assert_eq!(e.tuple.is_some(), e.kind == EventKind::TupleRecognized);
        }
    }
}

#[test]
fn pipelines_move_between_threads() {
    fn assert_send<T: Send>() {}
    assert_send::<Pipeline>();
    assert_send::<gesture_tuples::RecognitionEvent>();
    assert_send::<RawScoreFrame>();
}
