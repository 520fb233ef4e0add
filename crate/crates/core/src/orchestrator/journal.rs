//! Append-only, checksummed run journal.
//!
//! One record per line: `<checksum> <run_id> <status> <effects-csv>
//! <iso8601>`, where the checksum is the first 8 hex digits of the
//! SHA-256 of the rest of the line. Flat text was chosen over a
//! database for crash-tolerance transparency and easy diffing.
//!
//! Every append is flushed and fsynced before returning, so a record's
//! presence can be trusted after a crash. A torn final line (a crash
//! mid-append) is dropped on load; a corrupt interior line refuses to
//! load.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::model::EffectSet;

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("journal write failed: {0}")]
    WriteFailure(#[from] std::io::Error),
    #[error("corrupt journal at {path}, line {line}: {reason}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Planned,
    Started,
    Completed,
    Interrupted,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Planned => "PLANNED",
            RunStatus::Started => "STARTED",
            RunStatus::Completed => "COMPLETED",
            RunStatus::Interrupted => "INTERRUPTED",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "PLANNED" => Some(RunStatus::Planned),
            "STARTED" => Some(RunStatus::Started),
            "COMPLETED" => Some(RunStatus::Completed),
            "INTERRUPTED" => Some(RunStatus::Interrupted),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalRecord {
    pub run_id: u64,
    pub status: RunStatus,
    pub effects: EffectSet,
    pub timestamp: String,
}

fn checksum(payload: &str) -> String {
    let mut h = Sha256::new();
    h.update(payload.as_bytes());
    let digest = h.finalize();
    digest[..4].iter().map(|b| format!("{b:02x}")).collect()
}

impl JournalRecord {
    fn payload(&self) -> String {
        format!(
            "{} {} {} {}",
            self.run_id,
            self.status.name(),
            self.effects.to_csv(),
            self.timestamp
        )
    }

    pub fn encode(&self) -> String {
        let payload = self.payload();
        format!("{} {}\n", checksum(&payload), payload)
    }

    fn decode(line: &str) -> Result<JournalRecord, String> {
        let (sum, payload) = line.split_once(' ').ok_or("missing checksum")?;
        if sum != checksum(payload) {
            return Err("checksum mismatch".into());
        }
        let mut parts = payload.split(' ');
        let run_id = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or("bad run id")?;
        let status = parts
            .next()
            .and_then(RunStatus::from_name)
            .ok_or("bad status")?;
        let effects = parts
            .next()
            .and_then(EffectSet::from_csv)
            .ok_or("bad effects")?;
        let timestamp = parts.next().ok_or("missing timestamp")?.to_string();
        if parts.next().is_some() {
            return Err("trailing fields".into());
        }
        Ok(JournalRecord { run_id, status, effects, timestamp })
    }
}

pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    pub fn open(path: &Path) -> Result<Journal, JournalError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Journal { path: path.to_path_buf(), file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Fsync-before-ack: the record is durable when this returns.
    pub fn append(&mut self, record: &JournalRecord) -> Result<(), JournalError> {
        self.file.write_all(record.encode().as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }

    /// Loads all records; a missing file is an empty journal. A torn
    /// final line is discarded (interrupted append); corruption
    /// anywhere else is fatal.
    pub fn load(path: &Path) -> Result<Vec<JournalRecord>, JournalError> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let lines: Vec<&str> = text.split('\n').filter(|l| !l.is_empty()).collect();
        let mut records = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            match JournalRecord::decode(line) {
                Ok(rec) => records.push(rec),
                Err(reason) if i + 1 == lines.len() && !text.ends_with('\n') => {
                    let _ = reason; // torn tail from a crash mid-append
                    break;
                }
                Err(reason) => {
                    return Err(JournalError::Corrupt {
                        path: path.to_path_buf(),
                        line: i + 1,
                        reason,
                    });
                }
            }
        }
        Ok(records)
    }
}
