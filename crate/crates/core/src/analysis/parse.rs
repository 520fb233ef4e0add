//! Log-tree parsing: reconstruct each run's effect set purely from its
//! stored artifacts, independently of what the orchestrator recorded.
//!
//! Classification rules: a POWER_CYCLE watchdog event means SC; a
//! digest MISMATCH verdict means SDC; `EDAC CE`/`EDAC UE` lines mean
//! CE/UE; a nonzero exit code means AC; none of those is normal
//! operation.

use std::path::Path;

use crate::model::{Effect, EffectSet};
use crate::sim::ErrorEvent;

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRun {
    /// Ordinal recovered from the watchdog START line, when present.
    pub run_id: Option<u64>,
    pub benchmark: String,
    pub selection: String,
    pub freq_mhz: u32,
    pub voltage_mv: u32,
    pub repeat: u32,
    pub effects: EffectSet,
    pub events: Vec<ErrorEvent>,
    pub exit_code: Option<i32>,
    pub duration_ms: u64,
}

fn malformed(path: &Path, reason: impl Into<String>) -> AnalysisError {
    AnalysisError::MalformedLogTree {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn read_opt(path: &Path) -> Result<Option<String>, AnalysisError> {
    match std::fs::read_to_string(path) {
        Ok(t) => Ok(Some(t)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Parses one run directory into (effects, raw events, exit code,
/// duration, run id).
pub fn parse_run_logs(
    dir: &Path,
) -> Result<(EffectSet, Vec<ErrorEvent>, Option<i32>, u64, Option<u64>), AnalysisError> {
    let edac = read_opt(&dir.join("edac.log"))?.ok_or_else(|| malformed(dir, "missing edac.log"))?;
    let watchdog =
        read_opt(&dir.join("watchdog.log"))?.ok_or_else(|| malformed(dir, "missing watchdog.log"))?;
    let timing =
        read_opt(&dir.join("timing.txt"))?.ok_or_else(|| malformed(dir, "missing timing.txt"))?;

    let duration_ms = timing
        .trim()
        .strip_prefix("duration_ms=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed(dir, "bad timing.txt"))?;

    let mut effects = EffectSet::default();
    let mut events = Vec::new();
    for line in edac.lines() {
        let ev = ErrorEvent::parse_edac_line(line)
            .ok_or_else(|| malformed(dir, format!("bad EDAC line {line:?}")))?;
        match ev.kind {
            crate::sim::ErrorKind::Ce => effects.insert(Effect::Ce),
            crate::sim::ErrorKind::Ue => effects.insert(Effect::Ue),
        }
        events.push(ev);
    }

    let mut run_id = None;
    for line in watchdog.lines() {
        // lines are `<ms> <wire message>`
        let msg = line.split_once(' ').map(|(_, m)| m).unwrap_or(line);
        if msg.starts_with("POWER_CYCLE") {
            effects.insert(Effect::Sc);
        }
        if let Some(rest) = msg.strip_prefix("START r") {
            run_id = rest.split(' ').next().and_then(|s| s.parse().ok());
        }
    }

    let exit_code: Option<i32> = match read_opt(&dir.join("exit_code.txt"))? {
        Some(t) => Some(
            t.trim()
                .parse()
                .map_err(|_| malformed(dir, "bad exit_code.txt"))?,
        ),
        None => None,
    };
    if exit_code.is_some_and(|c| c != 0) {
        effects.insert(Effect::Ac);
    }

    if let Some(verdict) = read_opt(&dir.join("verdict.txt"))? {
        match verdict.trim() {
            "MATCH" => {}
            "MISMATCH" => effects.insert(Effect::Sdc),
            other => return Err(malformed(dir, format!("bad verdict {other:?}"))),
        }
    }

    Ok((effects, events, exit_code, duration_ms, run_id))
}

const RESERVED: &[&str] = &["reports", "golden.json", "journal.log"];

fn subdirs(path: &Path) -> Result<Vec<(String, std::path::PathBuf)>, AnalysisError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(path)? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().to_string();
        if RESERVED.contains(&name.as_str()) {
            continue;
        }
        out.push((name, entry.path()));
    }
    out.sort();
    Ok(out)
}

/// Walks a whole output tree
/// (`<root>/<benchmark>/<selection>/<freq>/<voltage>/<repeat>/`).
/// Malformed run directories are excluded and reported in the returned
/// warning list, never silently dropped. Results are sorted
/// deterministically.
pub fn parse_output_tree(root: &Path) -> Result<(Vec<ParsedRun>, Vec<String>), AnalysisError> {
    let mut runs = Vec::new();
    let mut warnings = Vec::new();
    for (benchmark, bench_path) in subdirs(root)? {
        for (selection, sel_path) in subdirs(&bench_path)? {
            for (freq_name, freq_path) in subdirs(&sel_path)? {
                let Ok(freq_mhz) = freq_name.parse() else {
                    warnings.push(format!("skipping non-numeric freq dir {}", freq_path.display()));
                    continue;
                };
                for (volt_name, volt_path) in subdirs(&freq_path)? {
                    let Ok(voltage_mv) = volt_name.parse() else {
                        warnings
                            .push(format!("skipping non-numeric voltage dir {}", volt_path.display()));
                        continue;
                    };
                    for (rep_name, rep_path) in subdirs(&volt_path)? {
                        let Ok(repeat) = rep_name.parse() else {
                            warnings.push(format!(
                                "skipping non-numeric repeat dir {}",
                                rep_path.display()
                            ));
                            continue;
                        };
                        match parse_run_logs(&rep_path) {
                            Ok((effects, events, exit_code, duration_ms, run_id)) => {
                                runs.push(ParsedRun {
                                    run_id,
                                    benchmark: benchmark.clone(),
                                    selection: selection.clone(),
                                    freq_mhz,
                                    voltage_mv,
                                    repeat,
                                    effects,
                                    events,
                                    exit_code,
                                    duration_ms,
                                });
                            }
                            Err(e) => warnings.push(format!("excluded run: {e}")),
                        }
                    }
                }
            }
        }
    }
    runs.sort_by(|a, b| {
        (&a.benchmark, &a.selection, a.freq_mhz, std::cmp::Reverse(a.voltage_mv), a.repeat).cmp(&(
            &b.benchmark,
            &b.selection,
            b.freq_mhz,
            std::cmp::Reverse(b.voltage_mv),
            b.repeat,
        ))
    });
    Ok((runs, warnings))
}
