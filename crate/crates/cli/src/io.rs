//! File helpers shared by the commands.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;
use twon_core::ingest::Corpus;

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line)
            .map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?);
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| io_error(path, e))?;
        writeln!(out, "{line}").map_err(|e| io_error(path, e))?;
    }
    out.flush().map_err(|e| io_error(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_reader(open(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| io_error(path, e))
}

pub fn read_corpus(path: &Path) -> Result<Corpus, CliError> {
    Corpus::read_jsonl(open(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?);
    corpus.write_jsonl(&mut out)?;
    out.flush().map_err(|e| io_error(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}
