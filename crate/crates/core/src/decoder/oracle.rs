//! Exhaustive reference decoder.
//!
//! Enumerates every sequence record of length `K + 1` without consecutive
//! repeats together with every placement of its `K` change points over the
//! `T` columns, and keeps the best total. Scores accumulate column by column
//! in the same order the beam decoder uses, so equal paths score bit-identically.

use super::{rank, DecoderParams, Path, ScoreMatrix};
use crate::error::{Error, Result};

/// Largest number of (record, placement) pairs the oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Enumeration bound `N^(K+1) * C(T-1, K)` used by the size guard.
pub fn brute_force_size(columns: usize, states: usize, transitions: usize) -> u128 {
    let records = (states as u128).saturating_pow(transitions as u32 + 1);
    records.saturating_mul(binomial(columns.saturating_sub(1), transitions))
}

pub fn brute_force_decode(matrix: &ScoreMatrix, params: &DecoderParams) -> Result<Path> {
    params.validate()?;
    let t_len = matrix.len();
    let n = matrix.num_states();
    let k = params.transitions;
    if t_len < k + 1 {
        return Err(Error::Precondition(format!(
            "{k} transitions need at least {} columns, got {t_len}",
            k + 1
        )));
    }
    let size = brute_force_size(t_len, n, k);
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let mut records = Vec::new();
    let mut current = Vec::with_capacity(k + 1);
    collect_records(n, k + 1, &mut current, &mut records);

    let mut placements = Vec::new();
    let mut chosen = Vec::with_capacity(k);
    collect_placements(1, t_len, k, &mut chosen, &mut placements);

    let mut best: Option<Path> = None;
    for record in &records {
        for cuts in &placements {
            let mut starts = Vec::with_capacity(k + 1);
            starts.push(0);
            starts.extend_from_slice(cuts);

            let mut segment = 0;
            let mut score = matrix.column(0)[record[0]];
            for t in 1..t_len {
                if segment < k && starts[segment + 1] == t {
                    segment += 1;
                    score = score + matrix.column(t)[record[segment]] + params.transition_cost;
                } else {
                    score += matrix.column(t)[record[segment]];
                }
            }

            let candidate = Path {
                sequence: record.clone(),
                score,
                transitions: k,
                starts,
            };
            let better = match &best {
                None => true,
                Some(b) => rank(&candidate, b).is_lt(),
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best.ok_or(Error::NoValidPath { transitions: k })
}

fn collect_records(n: usize, len: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == len {
        out.push(current.clone());
        return;
    }
    for state in 0..n {
        if current.last() == Some(&state) {
            continue;
        }
        current.push(state);
        collect_records(n, len, current, out);
        current.pop();
    }
}

// Strictly increasing change points drawn from `from..t_len`.
fn collect_placements(
    from: usize,
    t_len: usize,
    remaining: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if remaining == 0 {
        out.push(chosen.clone());
        return;
    }
    for t in from..t_len {
        if t_len - t < remaining {
            break;
        }
        chosen.push(t);
        collect_placements(t + 1, t_len, remaining - 1, chosen, out);
        chosen.pop();
    }
}
