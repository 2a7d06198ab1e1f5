//! On-disk formats: stream CSV, decoder matrix CSV and JSON-lines manifests.
//!
//! Stream files have a header `class_0,..,class_{m-1},preparation,retraction,no_gesture`
//! and one frame per row; the frame index is the row number. Matrix files hold
//! one probability column per row with no header. Manifests hold one JSON
//! object per line.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alphabet::{AlphabetConfig, GestureTuple};
use crate::decoder::{validate_column, ScoreMatrix};
use crate::error::{Error, Result};
use crate::pipeline::RawScoreFrame;
use crate::simulator::SpeedPreset;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    parse_error(path, line, err.to_string())
}

fn parse_row(path: &Path, line: u64, record: &csv::StringRecord) -> Result<Vec<f64>> {
    record
        .iter()
        .enumerate()
        .map(|(i, field)| {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|e| parse_error(path, line, format!("column {i}: {field:?}: {e}")))?;
            if !value.is_finite() {
                return Err(parse_error(
                    path,
                    line,
                    format!("column {i}: non-finite value"),
                ));
            }
            Ok(value)
        })
        .collect()
}

pub fn write_stream<W: Write>(
    mut out: W,
    alphabet: &AlphabetConfig,
    frames: &[RawScoreFrame],
) -> io::Result<()> {
    writeln!(out, "{}", alphabet.class_names().join(","))?;
    for frame in frames {
        let row: Vec<String> = frame.scores.iter().map(|s| s.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_stream_file(
    path: &Path,
    alphabet: &AlphabetConfig,
    frames: &[RawScoreFrame],
) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = io::BufWriter::new(File::create(path).map_err(io_err)?);
    write_stream(&mut out, alphabet, frames).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Reads a stream, checking the header against `alphabet`. `origin` names the
/// source in error messages.
pub fn read_stream<R: Read>(
    reader: R,
    origin: &Path,
    alphabet: &AlphabetConfig,
) -> Result<Vec<RawScoreFrame>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error(origin, e))?.clone();
    let expected = alphabet.class_names();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(parse_error(
            origin,
            1,
            format!(
                "expected header {:?}, found {:?}",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut frames = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(origin, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != expected.len() {
            return Err(parse_error(
                origin,
                line,
                format!(
                    "expected {} columns, found {}",
                    expected.len(),
                    record.len()
                ),
            ));
        }
        let scores = parse_row(origin, line, &record)?;
        frames.push(RawScoreFrame::new(frames.len(), scores));
    }
    Ok(frames)
}

pub fn read_stream_file(path: &Path, alphabet: &AlphabetConfig) -> Result<Vec<RawScoreFrame>> {
    read_stream(BufReader::new(open(path)?), path, alphabet)
}

/// Reads one softmaxed column per row; every row is validated and errors name its line.
pub fn read_matrix<R: Read>(reader: R, origin: &Path) -> Result<ScoreMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(origin, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let column = parse_row(origin, line, &record)?;
        if let Some(first) = columns.first() {
            if first.len() != column.len() {
                return Err(parse_error(
                    origin,
                    line,
                    format!("expected {} entries, found {}", first.len(), column.len()),
                ));
            }
        }
        validate_column(&column).map_err(|e| parse_error(origin, line, e.to_string()))?;
        columns.push(column);
    }
    if columns.is_empty() {
        return Err(parse_error(origin, 0, "matrix file has no rows"));
    }
    ScoreMatrix::new(columns)
}

pub fn read_matrix_file(path: &Path) -> Result<ScoreMatrix> {
    read_matrix(BufReader::new(open(path)?), path)
}

pub fn write_matrix<W: Write>(mut out: W, matrix: &ScoreMatrix) -> io::Result<()> {
    for column in matrix.columns() {
        let row: Vec<String> = column.iter().map(|p| p.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

mod tuple_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::alphabet::GestureTuple;

    pub fn serialize<S: Serializer>(t: &GestureTuple, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(t)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GestureTuple, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// One recording of a test set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Stream file, relative to the manifest's directory unless absolute.
    pub path: PathBuf,
    #[serde(with = "tuple_string")]
    pub truth: GestureTuple,
    pub speed: SpeedPreset,
    pub seed: u64,
}

pub fn write_manifest<W: Write>(mut out: W, entries: &[ManifestEntry]) -> io::Result<()> {
    for entry in entries {
        let line = serde_json::to_string(entry).map_err(io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_manifest<R: BufRead>(reader: R, origin: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|source| Error::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let entry =
            serde_json::from_str(&line).map_err(|e| parse_error(origin, line_no, e.to_string()))?;
        entries.push(entry);
    }
    Ok(entries)
}

pub fn read_manifest_file(path: &Path) -> Result<Vec<ManifestEntry>> {
    read_manifest(BufReader::new(open(path)?), path)
}
