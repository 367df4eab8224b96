//! JSON Lines reading and writing for sample streams and trial logs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::engine::GazeSample;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
}

pub fn write_jsonl<W: Write, T: Serialize>(mut w: W, items: &[T]) -> Result<(), IoError> {
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| IoError::Io(e.into()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Parses one JSON value per non-blank line.
pub fn read_jsonl<R: BufRead, T: DeserializeOwned>(r: R) -> Result<Vec<T>, IoError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| IoError::Parse { line: i + 1, source })?);
    }
    Ok(out)
}

pub fn write_jsonl_file<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<(), IoError> {
    write_jsonl(BufWriter::new(File::create(path)?), items)
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, IoError> {
    read_jsonl(BufReader::new(File::open(path)?))
}

pub fn read_samples(path: impl AsRef<Path>) -> Result<Vec<GazeSample<f64>>, IoError> {
    read_jsonl_file(path)
}

pub fn write_samples(path: impl AsRef<Path>, samples: &[GazeSample<f64>]) -> Result<(), IoError> {
    write_jsonl_file(path, samples)
}
