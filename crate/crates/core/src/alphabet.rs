//! Label universe and the combinatorics of gesture tuples.
//!
//! A tuple is a sequence of phoneme ids with no two consecutive entries
//! equal. For `m` phonemes and tuples of length `s` there are
//! `m * (m - 1)^(s - 1)` of them. Tuples are enumerated and indexed in
//! lexicographic order of their phoneme ids.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of tuples [`enumerate_tuples`] will materialize.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Number of non-phoneme classes: preparation, retraction and no-gesture.
pub const SIGNALING_CLASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Phoneme(usize),
    Preparation,
    Retraction,
    NoGesture,
}

/// The class layout: `m` phonemes at indices `0..m`, followed by
/// preparation, retraction and no-gesture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlphabetConfig {
    num_phonemes: usize,
}

impl AlphabetConfig {
    pub fn new(num_phonemes: usize) -> Result<Self> {
        if num_phonemes < 2 {
            return Err(Error::Domain(format!(
                "at least 2 phonemes are required, got {num_phonemes}"
            )));
        }
        Ok(Self { num_phonemes })
    }

    pub fn num_phonemes(&self) -> usize {
        self.num_phonemes
    }

    pub fn num_classes(&self) -> usize {
        self.num_phonemes + SIGNALING_CLASSES
    }

    pub fn preparation(&self) -> usize {
        self.num_phonemes
    }

    pub fn retraction(&self) -> usize {
        self.num_phonemes + 1
    }

    pub fn no_gesture(&self) -> usize {
        self.num_phonemes + 2
    }

    pub fn class_index(&self, label: Label) -> usize {
        match label {
            Label::Phoneme(id) => id,
            Label::Preparation => self.preparation(),
            Label::Retraction => self.retraction(),
            Label::NoGesture => self.no_gesture(),
        }
    }

    pub fn label(&self, class: usize) -> Option<Label> {
        let m = self.num_phonemes;
        match class {
            c if c < m => Some(Label::Phoneme(c)),
            c if c == m => Some(Label::Preparation),
            c if c == m + 1 => Some(Label::Retraction),
            c if c == m + 2 => Some(Label::NoGesture),
            _ => None,
        }
    }

    /// Column names used in stream files: `class_0..class_{m-1}`, then the signaling classes.
    pub fn class_names(&self) -> Vec<String> {
        (0..self.num_phonemes)
            .map(|i| format!("class_{i}"))
            .chain(["preparation", "retraction", "no_gesture"].map(String::from))
            .collect()
    }
}

impl Default for AlphabetConfig {
    fn default() -> Self {
        Self { num_phonemes: 10 }
    }
}

/// A sequence of phonemes with no consecutive repeats.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GestureTuple(Vec<usize>);

impl GestureTuple {
    /// Builds a tuple checking only structural validity (non-empty, no consecutive repeats).
    pub fn new(phonemes: Vec<usize>) -> Result<Self> {
        if phonemes.is_empty() {
            return Err(Error::InvalidTuple {
                tuple: phonemes,
                reason: "tuple is empty".into(),
            });
        }
        if let Some(w) = phonemes.windows(2).position(|w| w[0] == w[1]) {
            let reason = format!(
                "consecutive repeat of phoneme {} at position {}",
                phonemes[w],
                w + 1
            );
            return Err(Error::InvalidTuple {
                tuple: phonemes,
                reason,
            });
        }
        Ok(Self(phonemes))
    }

    /// Builds a tuple and checks every id against an alphabet of `num_phonemes`.
    pub fn with_alphabet(phonemes: Vec<usize>, num_phonemes: usize) -> Result<Self> {
        let tuple = Self::new(phonemes)?;
        tuple.check_alphabet(num_phonemes)?;
        Ok(tuple)
    }

    pub fn check_alphabet(&self, num_phonemes: usize) -> Result<()> {
        if let Some(&bad) = self.0.iter().find(|&&p| p >= num_phonemes) {
            return Err(Error::InvalidTuple {
                tuple: self.0.clone(),
                reason: format!("phoneme {bad} out of range for {num_phonemes} phonemes"),
            });
        }
        Ok(())
    }

    pub fn phonemes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl TryFrom<Vec<usize>> for GestureTuple {
    type Error = Error;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<GestureTuple> for Vec<usize> {
    fn from(value: GestureTuple) -> Self {
        value.0
    }
}

/// Hyphen-joined ids, e.g. `5-1-3`.
impl fmt::Display for GestureTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for GestureTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let phonemes = s
            .trim()
            .split('-')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidTuple {
                        tuple: Vec::new(),
                        reason: format!("cannot parse {part:?} in {s:?}: {e}"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(phonemes)
    }
}

fn check_dims(m: usize, s: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!("m must be at least 2, got {m}")));
    }
    if s < 1 {
        return Err(Error::Domain("s must be at least 1".into()));
    }
    Ok(())
}

fn checked_count(m: usize, s: usize) -> Option<u128> {
    let base = (m as u128).checked_sub(1)?;
    let exp = u32::try_from(s - 1).ok()?;
    base.checked_pow(exp)?.checked_mul(m as u128)
}

/// Number of tuples of length `s` over `m` phonemes: `m * (m - 1)^(s - 1)`.
pub fn tuple_count(m: usize, s: usize) -> Result<u64> {
    check_dims(m, s)?;
    checked_count(m, s)
        .and_then(|n| u64::try_from(n).ok())
        .ok_or_else(|| Error::Domain(format!("tuple count for m={m}, s={s} overflows u64")))
}

/// All tuples of length `s` in lexicographic order, refusing spaces larger than `cap`.
pub fn enumerate_tuples_capped(m: usize, s: usize, cap: u64) -> Result<Vec<GestureTuple>> {
    check_dims(m, s)?;
    let size = checked_count(m, s).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::CapExceeded { size, cap });
    }

    let mut out = Vec::with_capacity(size as usize);
    let mut current = Vec::with_capacity(s);
    fill(m, s, &mut current, &mut out);
    Ok(out)
}

fn fill(m: usize, s: usize, current: &mut Vec<usize>, out: &mut Vec<GestureTuple>) {
    if current.len() == s {
        out.push(GestureTuple(current.clone()));
        return;
    }
    for p in 0..m {
        if current.last() == Some(&p) {
            continue;
        }
        current.push(p);
        fill(m, s, current, out);
        current.pop();
    }
}

/// [`enumerate_tuples_capped`] with [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate_tuples(m: usize, s: usize) -> Result<Vec<GestureTuple>> {
    enumerate_tuples_capped(m, s, DEFAULT_ENUMERATION_CAP)
}

/// Position of `tuple` in the lexicographic enumeration of its length class.
///
/// The first phoneme is a base-`m` digit; every later phoneme is a base-`(m-1)`
/// digit obtained by skipping the value of its predecessor.
pub fn tuple_index(tuple: &GestureTuple, m: usize) -> Result<u64> {
    check_dims(m, tuple.len())?;
    tuple.check_alphabet(m)?;
    tuple_count(m, tuple.len())?;

    let p = tuple.phonemes();
    let mut index = p[0] as u64;
    for w in p.windows(2) {
        let digit = if w[1] < w[0] { w[1] } else { w[1] - 1 };
        index = index * (m as u64 - 1) + digit as u64;
    }
    Ok(index)
}

/// Inverse of [`tuple_index`].
pub fn tuple_at_index(index: u64, m: usize, s: usize) -> Result<GestureTuple> {
    let count = tuple_count(m, s)?;
    if index >= count {
        return Err(Error::Domain(format!(
            "index {index} out of range for {count} tuples (m={m}, s={s})"
        )));
    }
    let base = m as u64 - 1;
    let mut digits = vec![0u64; s];
    let mut rest = index;
    for d in digits.iter_mut().skip(1).rev() {
        *d = rest % base;
        rest /= base;
    }
    digits[0] = rest;

    let mut phonemes = Vec::with_capacity(s);
    phonemes.push(digits[0] as usize);
    for &d in &digits[1..] {
        let prev = *phonemes.last().unwrap();
        let d = d as usize;
        phonemes.push(if d < prev { d } else { d + 1 });
    }
    Ok(GestureTuple(phonemes))
}
