//! Viterbi-like beam decoder over a matrix of phoneme probabilities.
//!
//! Every hypothesis carries its sequence record (the distinct phonemes visited
//! so far), an additive score and its transition count. Staying on the last
//! phoneme adds that phoneme's probability; moving to a new phoneme adds its
//! probability plus the (non-positive) transition cost and appends it to the
//! record, as long as the transition budget `K` is not spent. Moves past the
//! budget are dropped. Hypotheses with identical records are merged keeping
//! the best score, the beam is sorted by descending score (ties go to the
//! lexicographically smaller record) and truncated to `gamma` paths.

mod oracle;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use oracle::{brute_force_decode, brute_force_size, BRUTE_FORCE_LIMIT};

/// Columns must sum to one within this tolerance.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-6;

/// Checks that `column` is a probability vector over at least two states.
pub fn validate_column(column: &[f64]) -> Result<()> {
    if column.len() < 2 {
        return Err(Error::InvalidColumn(format!(
            "need at least 2 states, got {}",
            column.len()
        )));
    }
    if let Some((i, p)) = column
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(Error::InvalidColumn(format!(
            "entry {i} = {p} is outside [0, 1]"
        )));
    }
    let sum: f64 = column.iter().sum();
    if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
        return Err(Error::InvalidColumn(format!(
            "column sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// `T` softmaxed columns of `N` phoneme probabilities each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    columns: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(columns: Vec<Vec<f64>>) -> Result<Self> {
        let first = columns
            .first()
            .ok_or_else(|| Error::InvalidColumn("score matrix has no columns".into()))?;
        let n = first.len();
        for (t, column) in columns.iter().enumerate() {
            if column.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: column.len(),
                });
            }
            validate_column(column)
                .map_err(|e| Error::InvalidColumn(format!("column {t}: {e}")))?;
        }
        Ok(Self { columns })
    }

    /// Number of columns `T`.
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Number of states `N`.
    pub fn num_states(&self) -> usize {
        self.columns[0].len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, t: usize) -> &[f64] {
        &self.columns[t]
    }

    /// Recomputes a path's score from its per-column state assignment:
    /// the sum of the visited probabilities plus one transition cost per transition.
    pub fn replay(&self, path: &Path, transition_cost: f64) -> f64 {
        let states = path.states(self.len());
        let visited: f64 = states
            .iter()
            .enumerate()
            .map(|(t, &n)| self.columns[t][n])
            .sum();
        visited + path.transitions as f64 * transition_cost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderParams {
    /// Exact number of transitions `K` a returned path must contain.
    pub transitions: usize,
    /// Score added on every transition (`delta`, non-positive).
    pub transition_cost: f64,
    /// Maximum number of paths kept after each step (`gamma`).
    pub beam_width: usize,
}

impl DecoderParams {
    pub fn new(transitions: usize, transition_cost: f64, beam_width: usize) -> Result<Self> {
        let params = Self {
            transitions,
            transition_cost,
            beam_width,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters for tuples of `len` phonemes: `K = len - 1`.
    pub fn for_tuple_len(len: usize) -> Result<Self> {
        let transitions = len
            .checked_sub(1)
            .ok_or_else(|| Error::Domain("tuple length must be at least 1".into()))?;
        Ok(Self {
            transitions,
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.transition_cost.is_finite() || self.transition_cost > 0.0 {
            return Err(Error::Domain(format!(
                "transition cost must be finite and non-positive, got {}",
                self.transition_cost
            )));
        }
        if self.beam_width == 0 {
            return Err(Error::Domain("beam width must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for DecoderParams {
    fn default() -> Self {
        Self {
            transitions: 2,
            transition_cost: -0.2,
            beam_width: 300,
        }
    }
}

/// A decoding hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// Sequence record: the phonemes visited, without consecutive repeats.
    pub sequence: Vec<usize>,
    pub score: f64,
    pub transitions: usize,
    /// Column index at which each entry of `sequence` was entered.
    pub starts: Vec<usize>,
}

impl Path {
    /// A path whose entries occupy consecutive columns starting at 0.
    pub fn new(sequence: Vec<usize>, score: f64) -> Result<Self> {
        if sequence.is_empty() {
            return Err(Error::Precondition("path sequence is empty".into()));
        }
        if sequence.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition(format!(
                "path sequence {sequence:?} repeats a state"
            )));
        }
        let starts = (0..sequence.len()).collect();
        Ok(Self {
            transitions: sequence.len() - 1,
            sequence,
            score,
            starts,
        })
    }

    pub fn last_state(&self) -> usize {
        *self.sequence.last().expect("paths are never empty")
    }

    /// Per-column state assignment over `len` columns.
    pub fn states(&self, len: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(len);
        for (i, &state) in self.sequence.iter().enumerate() {
            let end = self.starts.get(i + 1).copied().unwrap_or(len);
            out.extend(std::iter::repeat_n(
                state,
                end.saturating_sub(self.starts[i]),
            ));
        }
        out
    }
}

/// Descending score, then lexicographically smaller sequence first.
pub(crate) fn rank(a: &Path, b: &Path) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.sequence.cmp(&b.sequence))
}

/// The path metric: live hypotheses after some number of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    paths: Vec<Path>,
    num_states: usize,
    columns_seen: usize,
}

impl Beam {
    /// Builds a beam from explicit paths, merging duplicates and sorting.
    pub fn new(paths: Vec<Path>, num_states: usize) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::Precondition("beam is empty".into()));
        }
        let mut columns_seen = 0;
        let mut best: HashMap<Vec<usize>, Path> = HashMap::new();
        for path in paths {
            if let Some(&bad) = path.sequence.iter().find(|&&n| n >= num_states) {
                return Err(Error::Precondition(format!(
                    "state {bad} out of range for {num_states} states"
                )));
            }
            if path.transitions + 1 != path.sequence.len()
                || path.starts.len() != path.sequence.len()
            {
                return Err(Error::Precondition(format!(
                    "inconsistent path record {:?}",
                    path.sequence
                )));
            }
            columns_seen = columns_seen.max(path.starts.last().unwrap() + 1);
            match best.get(&path.sequence) {
                Some(existing) if existing.score >= path.score => {}
                _ => {
                    best.insert(path.sequence.clone(), path);
                }
            }
        }
        let mut paths: Vec<Path> = best.into_values().collect();
        paths.sort_by(rank);
        Ok(Self {
            paths,
            num_states,
            columns_seen,
        })
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn into_paths(self) -> Vec<Path> {
        self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Number of columns consumed so far.
    pub fn columns_seen(&self) -> usize {
        self.columns_seen
    }

    /// Best path with exactly `transitions` transitions.
    pub fn best_with_transitions(&self, transitions: usize) -> Option<&Path> {
        self.paths.iter().find(|p| p.transitions == transitions)
    }

    /// Extends every path by one column.
    pub fn step(&self, column: &[f64], params: &DecoderParams) -> Result<Beam> {
        if column.len() != self.num_states {
            return Err(Error::DimensionMismatch {
                expected: self.num_states,
                actual: column.len(),
            });
        }
        validate_column(column)?;
        params.validate()?;

        let t = self.columns_seen;
        let budget = params.transitions;
        let delta = params.transition_cost;
        let n = self.num_states;
        let parents = &self.paths;

        let index: HashMap<&[usize], usize> = parents
            .iter()
            .enumerate()
            .map(|(i, p)| (p.sequence.as_slice(), i))
            .collect();
        // absorbed[i * n + state]: the extension of parent i by `state` already
        // exists as a parent record and is merged into that parent's stay child.
        let mut absorbed = vec![false; parents.len() * n];
        let mut candidates = Vec::with_capacity(parents.len() * n);

        for (i, parent) in parents.iter().enumerate() {
            let last = parent.last_state();
            let mut best = Candidate {
                parent: i,
                appended: None,
                score: parent.score + column[last],
            };
            if parent.transitions > 0 {
                let prefix = &parent.sequence[..parent.sequence.len() - 1];
                if let Some(&j) = index.get(prefix) {
                    absorbed[j * n + last] = true;
                    let moved = parents[j].score + column[last] + delta;
                    if moved > best.score {
                        best = Candidate {
                            parent: j,
                            appended: Some(last),
                            score: moved,
                        };
                    }
                }
            }
            candidates.push(best);
        }

        for (i, parent) in parents.iter().enumerate() {
            if parent.transitions >= budget {
                continue;
            }
            let last = parent.last_state();
            for (state, &p) in column.iter().enumerate() {
                if state == last || absorbed[i * n + state] {
                    continue;
                }
                candidates.push(Candidate {
                    parent: i,
                    appended: Some(state),
                    score: parent.score + p + delta,
                });
            }
        }

        let order = |a: &Candidate, b: &Candidate| {
            b.score.total_cmp(&a.score).then_with(|| {
                let sa = parents[a.parent].sequence.iter().chain(a.appended.as_ref());
                let sb = parents[b.parent].sequence.iter().chain(b.appended.as_ref());
                sa.cmp(sb)
            })
        };
        if candidates.len() > params.beam_width {
            candidates.select_nth_unstable_by(params.beam_width - 1, order);
            candidates.truncate(params.beam_width);
        }
        candidates.sort_unstable_by(order);

        let paths = candidates
            .into_iter()
            .map(|c| {
                let parent = &parents[c.parent];
                match c.appended {
                    None => Path {
                        score: c.score,
                        ..parent.clone()
                    },
                    Some(state) => {
                        let mut sequence = Vec::with_capacity(parent.sequence.len() + 1);
                        sequence.extend_from_slice(&parent.sequence);
                        sequence.push(state);
                        let mut starts = Vec::with_capacity(sequence.len());
                        starts.extend_from_slice(&parent.starts);
                        starts.push(t);
                        Path {
                            sequence,
                            score: c.score,
                            transitions: parent.transitions + 1,
                            starts,
                        }
                    }
                }
            })
            .collect();
        Ok(Beam {
            paths,
            num_states: n,
            columns_seen: t + 1,
        })
    }
}

/// A child path before it is materialized: its parent, the state appended (if
/// any) and its score.
struct Candidate {
    parent: usize,
    appended: Option<usize>,
    score: f64,
}

/// One path per state seeded from the first column.
pub fn init_beam(first: &[f64], params: &DecoderParams) -> Result<Beam> {
    validate_column(first)?;
    params.validate()?;
    let mut paths: Vec<Path> = first
        .iter()
        .enumerate()
        .map(|(state, &p)| Path {
            sequence: vec![state],
            score: p,
            transitions: 0,
            starts: vec![0],
        })
        .collect();
    paths.sort_by(rank);
    paths.truncate(params.beam_width);
    Ok(Beam {
        paths,
        num_states: first.len(),
        columns_seen: 1,
    })
}

pub fn step_beam(beam: &Beam, column: &[f64], params: &DecoderParams) -> Result<Beam> {
    beam.step(column, params)
}

/// Incremental decoder: feed columns one at a time, then [`finish`](Self::finish).
#[derive(Debug, Clone)]
pub struct BeamDecoder {
    params: DecoderParams,
    beam: Option<Beam>,
}

impl BeamDecoder {
    pub fn new(params: DecoderParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, beam: None })
    }

    pub fn push(&mut self, column: &[f64]) -> Result<()> {
        let next = match &self.beam {
            None => init_beam(column, &self.params)?,
            Some(beam) => beam.step(column, &self.params)?,
        };
        self.beam = Some(next);
        Ok(())
    }

    pub fn beam(&self) -> Option<&Beam> {
        self.beam.as_ref()
    }

    pub fn columns_seen(&self) -> usize {
        self.beam.as_ref().map_or(0, Beam::columns_seen)
    }

    pub fn finish(&self) -> Result<Path> {
        let k = self.params.transitions;
        let seen = self.columns_seen();
        if seen < k + 1 {
            return Err(Error::Precondition(format!(
                "{k} transitions need at least {} columns, got {seen}",
                k + 1
            )));
        }
        self.beam
            .as_ref()
            .and_then(|b| b.best_with_transitions(k))
            .cloned()
            .ok_or(Error::NoValidPath { transitions: k })
    }
}

/// Highest-scoring path with exactly `params.transitions` transitions.
pub fn decode(matrix: &ScoreMatrix, params: &DecoderParams) -> Result<Path> {
    params.validate()?;
    let k = params.transitions;
    if matrix.len() < k + 1 {
        return Err(Error::Precondition(format!(
            "{k} transitions need at least {} columns, got {}",
            k + 1,
            matrix.len()
        )));
    }
    let mut decoder = BeamDecoder::new(*params)?;
    for column in matrix.columns() {
        decoder.push(column)?;
    }
    decoder.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, gamma: usize) -> DecoderParams {
        DecoderParams::new(k, -0.2, gamma).unwrap()
    }

    fn one_hot(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn summary(beam: &Beam) -> Vec<(Vec<usize>, f64, usize)> {
        beam.paths()
            .iter()
            .map(|p| (p.sequence.clone(), p.score, p.transitions))
            .collect()
    }

    #[test]
    fn init_examples() {
        let beam = init_beam(&[0.5, 0.5], &DecoderParams::default()).unwrap();
        assert_eq!(summary(&beam), vec![(vec![0], 0.5, 0), (vec![1], 0.5, 0)]);

        let beam = init_beam(&[0.7, 0.2, 0.1], &DecoderParams::default()).unwrap();
        assert_eq!(summary(&beam)[0], (vec![0], 0.7, 0));

        let beam = init_beam(&[0.25; 4], &params(2, 2)).unwrap();
        assert_eq!(beam.len(), 2);

        assert!(matches!(
            init_beam(&[0.5, 0.4], &DecoderParams::default()),
            Err(Error::InvalidColumn(_))
        ));
    }

    #[test]
    fn step_stays_and_moves() {
        let beam = Beam::new(vec![Path::new(vec![0], 1.0).unwrap()], 2).unwrap();
        let next = step_beam(&beam, &[1.0, 0.0], &params(2, 300)).unwrap();
        assert_eq!(
            summary(&next),
            vec![(vec![0], 2.0, 0), (vec![0, 1], 0.8, 1)]
        );
    }

    #[test]
    fn step_discards_moves_past_budget() {
        let beam = Beam::new(vec![Path::new(vec![0, 1], 1.5).unwrap()], 2).unwrap();
        let next = step_beam(&beam, &[0.6, 0.4], &params(1, 300)).unwrap();
        let got = summary(&next);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, vec![0, 1]);
        assert!((got[0].1 - 1.9).abs() < 1e-12);
        assert_eq!(got[0].2, 1);
    }

    #[test]
    fn step_merges_identical_records() {
        // [0,1] is reached by staying (1.1 + 1.0) and by moving from [0] (0.9 + 1.0 - 0.2)
        let beam = Beam::new(
            vec![
                Path::new(vec![0, 1], 1.1).unwrap(),
                Path::new(vec![0], 0.9).unwrap(),
            ],
            2,
        )
        .unwrap();
        let next = step_beam(&beam, &[0.0, 1.0], &params(2, 300)).unwrap();
        let with_01: Vec<_> = next
            .paths()
            .iter()
            .filter(|p| p.sequence == [0, 1])
            .collect();
        assert_eq!(with_01.len(), 1);
        assert!((with_01[0].score - 2.1).abs() < 1e-12);
    }

    #[test]
    fn beam_new_merges_duplicates_keeping_max() {
        let beam = Beam::new(
            vec![
                Path::new(vec![0, 1], 1.1).unwrap(),
                Path::new(vec![0, 1], 0.9).unwrap(),
            ],
            2,
        )
        .unwrap();
        assert_eq!(summary(&beam), vec![(vec![0, 1], 1.1, 1)]);
    }

    #[test]
    fn step_rejects_wrong_width() {
        let beam = init_beam(&[0.5, 0.5], &DecoderParams::default()).unwrap();
        assert!(matches!(
            step_beam(&beam, &[0.2, 0.3, 0.5], &DecoderParams::default()),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        ));
    }

    #[test]
    fn decodes_one_hot_tuple() {
        let columns = [5, 5, 1, 1, 3, 3].map(|i| one_hot(10, i)).to_vec();
        let matrix = ScoreMatrix::new(columns).unwrap();
        let path = decode(&matrix, &DecoderParams::default()).unwrap();
        assert_eq!(path.sequence, vec![5, 1, 3]);
        assert!((path.score - 5.6).abs() < 1e-12);
        assert_eq!(path.transitions, 2);
        assert_eq!(path.starts, vec![0, 2, 4]);
        assert_eq!(path.states(6), vec![5, 5, 1, 1, 3, 3]);
        assert!((matrix.replay(&path, -0.2) - path.score).abs() < 1e-12);
    }

    #[test]
    fn uniform_ties_resolve_lexicographically() {
        let matrix = ScoreMatrix::new(vec![vec![0.5, 0.5]; 3]).unwrap();
        let path = decode(&matrix, &DecoderParams::default()).unwrap();
        assert_eq!(path.sequence, vec![0, 1, 0]);
        assert!((path.score - 1.1).abs() < 1e-12);
    }

    #[test]
    fn too_few_columns() {
        let matrix = ScoreMatrix::new(vec![vec![0.5, 0.5]; 2]).unwrap();
        assert!(matches!(
            decode(&matrix, &DecoderParams::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn narrow_beam_can_lose_every_full_path() {
        // gamma = 1 keeps only the stay path on [0], which never transitions.
        let matrix = ScoreMatrix::new(vec![vec![0.9, 0.1]; 4]).unwrap();
        assert!(matches!(
            decode(&matrix, &params(2, 1)),
            Err(Error::NoValidPath { transitions: 2 })
        ));
    }

    #[test]
    fn zero_transitions_picks_best_constant_state() {
        let matrix =
            ScoreMatrix::new(vec![vec![0.6, 0.4], vec![0.1, 0.9], vec![0.2, 0.8]]).unwrap();
        let path = decode(&matrix, &params(0, 300)).unwrap();
        assert_eq!(path.sequence, vec![1]);
        assert!((path.score - 2.1).abs() < 1e-12);
    }

    #[test]
    fn matrix_validation() {
        assert!(ScoreMatrix::new(vec![]).is_err());
        assert!(ScoreMatrix::new(vec![vec![1.0]]).is_err());
        assert!(ScoreMatrix::new(vec![vec![0.5, 0.5], vec![0.2, 0.3, 0.5]]).is_err());
        assert!(ScoreMatrix::new(vec![vec![1.2, -0.2]]).is_err());
        assert!(ScoreMatrix::new(vec![vec![0.4, 0.4]]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(DecoderParams::new(2, 0.1, 300).is_err());
        assert!(DecoderParams::new(2, f64::NAN, 300).is_err());
        assert!(DecoderParams::new(2, -0.2, 0).is_err());
        assert_eq!(DecoderParams::for_tuple_len(5).unwrap().transitions, 4);
    }
}
