use std::fmt::Write;

use gesture_tuples::pipeline::post_process;
use gesture_tuples::{AlphabetConfig, RawScoreFrame, Result};

const SHADES: &[u8] = b" .:-=+*#%@";

fn column_tag(alphabet: &AlphabetConfig, class: usize) -> String {
    if class == alphabet.preparation() {
        "P".into()
    } else if class == alphabet.retraction() {
        "R".into()
    } else if class == alphabet.no_gesture() {
        "N".into()
    } else {
        class.to_string()
    }
}

/// Text heat map of post-processed class probabilities: one row per averaging
/// window, one column per class, darker glyphs for higher probability.
pub fn probability_chart(
    alphabet: &AlphabetConfig,
    frames: &[RawScoreFrame],
    post_window: usize,
) -> Result<String> {
    let width = (0..alphabet.num_classes())
        .map(|c| column_tag(alphabet, c).len())
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    let _ = write!(out, "{:>7} ", "frame");
    for c in 0..alphabet.num_classes() {
        let _ = write!(out, "{:>width$}", column_tag(alphabet, c));
    }
    out.push('\n');

    for window in frames.chunks_exact(post_window) {
        let probs = post_process(window, post_window)?;
        let _ = write!(out, "{:>7} ", window[post_window - 1].timestamp);
        for p in probs {
            let level = ((p * SHADES.len() as f64) as usize).min(SHADES.len() - 1);
            let _ = write!(out, "{:>width$}", SHADES[level] as char);
        }
        out.push('\n');
    }
    Ok(out)
}
