//! Append-only event log.
//!
//! Each record holds one accepted envelope. On disk the log is one canonical
//! envelope per line; sequence numbers are the line numbers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use cbrne_core::protocol::{canonical::to_canonical_string, decode, Envelope};
use serde::Serialize;
use serde_json::Value;

use crate::HubError;

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    /// Gapless from 1.
    pub seq: u64,
    pub ts: f64,
    pub envelope: Envelope,
}

/// JSON form served over HTTP.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventView {
    pub seq: u64,
    pub ts: f64,
    pub envelope: Value,
}

impl From<&EventRecord> for EventView {
    fn from(r: &EventRecord) -> Self {
        Self { seq: r.seq, ts: r.ts, envelope: r.envelope.to_value() }
    }
}

#[derive(Debug, Default)]
pub struct EventLog {
    records: Vec<EventRecord>,
    sink: Option<BufWriter<File>>,
}

impl EventLog {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Log mirrored to `path`, truncating any existing file.
    pub fn create(path: &Path) -> Result<Self, HubError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Self { records: Vec::new(), sink: Some(BufWriter::new(File::create(path)?)) })
    }

    pub fn append(&mut self, envelope: Envelope) -> Result<u64, HubError> {
        if let Some(sink) = &mut self.sink {
            sink.write_all(to_canonical_string(&envelope.to_value()).as_bytes())?;
            sink.write_all(b"\n")?;
            sink.flush()?;
        }
        let seq = self.records.len() as u64 + 1;
        self.records.push(EventRecord { seq, ts: envelope.ts, envelope });
        Ok(seq)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    /// Records with `seq > since`.
    pub fn since(&self, since: u64) -> &[EventRecord] {
        let start = (since as usize).min(self.records.len());
        &self.records[start..]
    }
}

/// Reads a log file written by [`EventLog::create`].
pub fn read_log(path: &Path) -> Result<Vec<Envelope>, HubError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(decode(line.as_bytes()).map_err(|source| HubError::LogLine { line: i + 1, source })?);
    }
    Ok(out)
}
