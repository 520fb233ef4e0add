//! Safe data collection: raw per-run artifacts are written to the
//! external log tree under
//! `output_root/<benchmark>/<selection>/<freq>/<voltage>/<repeat>/`
//! and fsynced before the run is journaled COMPLETED, so a crash never
//! yields a half-trusted record. Bookkeeping runs only after the device
//! is back at nominal voltage.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::sim::{ErrorEvent, OutputDigest};

/// Keep path segments to a conservative identifier alphabet.
pub fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '-'
            }
        })
        .collect()
}

pub fn run_log_dir(
    output_root: &Path,
    benchmark_id: &str,
    selection_label: &str,
    freq_mhz: u32,
    voltage_mv: u32,
    repeat_index: u32,
) -> PathBuf {
    output_root
        .join(sanitize(benchmark_id))
        .join(sanitize(selection_label))
        .join(freq_mhz.to_string())
        .join(voltage_mv.to_string())
        .join(repeat_index.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    Mismatch,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Match => "MATCH",
            Verdict::Mismatch => "MISMATCH",
        }
    }
}

/// Everything one run leaves behind. Output and exit code are absent
/// when the system crashed; the verdict is absent whenever there was no
/// output to compare.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub output_digest: Option<OutputDigest>,
    pub verdict: Option<Verdict>,
    pub exit_code: Option<i32>,
    pub error_events: Vec<ErrorEvent>,
    /// `(<ms>, <wire line>)` watchdog events in order.
    pub watchdog_events: Vec<(u64, String)>,
    pub duration_ms: u64,
}

fn write_synced(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut f = File::create(path)?;
    f.write_all(contents.as_bytes())?;
    f.sync_data()
}

pub fn collect_logs(dir: &Path, artifacts: &RunArtifacts) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;

    if let Some(digest) = &artifacts.output_digest {
        write_synced(&dir.join("output.txt"), &format!("{}\n", digest.to_hex()))?;
    }
    if let Some(verdict) = artifacts.verdict {
        write_synced(&dir.join("verdict.txt"), &format!("{}\n", verdict.name()))?;
    }
    if let Some(code) = artifacts.exit_code {
        write_synced(&dir.join("exit_code.txt"), &format!("{code}\n"))?;
    }

    let edac: String = artifacts
        .error_events
        .iter()
        .map(|e| format!("{}\n", e.edac_line()))
        .collect();
    write_synced(&dir.join("edac.log"), &edac)?;

    let wd: String = artifacts
        .watchdog_events
        .iter()
        .map(|(t, line)| format!("{t} {line}\n"))
        .collect();
    write_synced(&dir.join("watchdog.log"), &wd)?;

    write_synced(
        &dir.join("timing.txt"),
        &format!("duration_ms={}\n", artifacts.duration_ms),
    )?;

    // Directory entry durability for the freshly created tree.
    File::open(dir)?.sync_all()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{ErrorKind, ErrorLocation};

    #[test]
    fn sanitize_keeps_identifiers() {
        assert_eq!(sanitize("dgemm-2.4"), "dgemm-2.4");
        assert_eq!(sanitize("a b/c"), "a-b-c");
    }

    #[test]
    fn normal_run_tree() {
        let dir = tempfile::tempdir().unwrap();
        let node = run_log_dir(dir.path(), "mg", "core0", 2400, 980, 0);
        let digest = OutputDigest::of_bytes(b"x");
        collect_logs(
            &node,
            &RunArtifacts {
                output_digest: Some(digest),
                verdict: Some(Verdict::Match),
                exit_code: Some(0),
                error_events: vec![],
                watchdog_events: vec![(0, "START r0 1000".into()), (1000, "DONE r0".into())],
                duration_ms: 900,
            },
        )
        .unwrap();
        assert!(node.join("output.txt").exists());
        assert_eq!(std::fs::read_to_string(node.join("verdict.txt")).unwrap(), "MATCH\n");
        assert_eq!(std::fs::read_to_string(node.join("edac.log")).unwrap(), "");
    }

    #[test]
    fn crash_run_tree_has_no_output() {
        let dir = tempfile::tempdir().unwrap();
        let node = run_log_dir(dir.path(), "mg", "core0", 2400, 875, 1);
        collect_logs(
            &node,
            &RunArtifacts {
                output_digest: None,
                verdict: None,
                exit_code: None,
                error_events: vec![ErrorEvent {
                    location: ErrorLocation::L2,
                    kind: ErrorKind::Ce,
                    count: 2,
                }],
                watchdog_events: vec![(20_000, "POWER_CYCLE".into())],
                duration_ms: 20_000,
            },
        )
        .unwrap();
        assert!(!node.join("output.txt").exists());
        let wd = std::fs::read_to_string(node.join("watchdog.log")).unwrap();
        assert!(wd.contains("POWER_CYCLE"));
    }
}
