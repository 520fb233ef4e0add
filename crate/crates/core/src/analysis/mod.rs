//! Parsing phase: re-derive effect sets from raw log trees, aggregate
//! per voltage level, compute severity, classify Safe/Unsafe/Crash
//! regions and emit CSV/SVG reports.

pub mod parse;
pub mod regions;
pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::{severity, EffectCounts, SeverityWeights};

pub use parse::{parse_output_tree, parse_run_logs, ParsedRun};
pub use regions::{classify_regions, power_gain_report, GainReport, Region, RegionRow};
pub use report::emit_reports;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("malformed log tree at {path}: {reason}")]
    MalformedLogTree { path: PathBuf, reason: String },
    #[error("mixed voltage grids under {key}: {reason}")]
    MixedGrids { key: String, reason: String },
    #[error("non-contiguous voltage grid under {key}")]
    NonContiguousGrid { key: String },
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Grouping key of one voltage level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelKey {
    pub benchmark: String,
    pub selection: String,
    pub freq_mhz: u32,
    pub voltage_mv: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoltageLevelAggregate {
    pub key: LevelKey,
    pub counts: EffectCounts,
    pub severity: f64,
    /// Raw corrected/uncorrected event totals per location name.
    pub event_totals: BTreeMap<String, u64>,
}

/// Groups parsed runs per (benchmark, selection, frequency, voltage)
/// and computes occurrence counts and severity. Aggregation is a plain
/// sum over runs, so merging two campaigns equals aggregating the union
/// of their runs.
pub fn aggregate(
    runs: &[ParsedRun],
    weights: &SeverityWeights,
) -> Result<Vec<VoltageLevelAggregate>, AnalysisError> {
    let mut groups: BTreeMap<LevelKey, (EffectCounts, BTreeMap<String, u64>)> = BTreeMap::new();
    for run in runs {
        let key = LevelKey {
            benchmark: run.benchmark.clone(),
            selection: run.selection.clone(),
            freq_mhz: run.freq_mhz,
            voltage_mv: run.voltage_mv,
        };
        let entry = groups.entry(key).or_default();
        entry.0.add_run(run.effects);
        for ev in &run.events {
            *entry.1.entry(ev.location.name().to_string()).or_default() += ev.count as u64;
        }
    }

    // Within one (benchmark, selection, frequency) series the voltage
    // levels must sit on a single uniform grid.
    let mut series: BTreeMap<(String, String, u32), Vec<u32>> = BTreeMap::new();
    for key in groups.keys() {
        series
            .entry((key.benchmark.clone(), key.selection.clone(), key.freq_mhz))
            .or_default()
            .push(key.voltage_mv);
    }
    for ((b, s, f), mut voltages) in series {
        voltages.sort_unstable();
        voltages.dedup();
        let gaps: Vec<u32> = voltages.windows(2).map(|w| w[1] - w[0]).collect();
        if gaps.windows(2).any(|g| g[0] != g[1]) {
            return Err(AnalysisError::MixedGrids {
                key: format!("{b}/{s}/{f}MHz"),
                reason: format!("non-uniform voltage gaps {gaps:?}"),
            });
        }
    }

    Ok(groups
        .into_iter()
        .map(|(key, (counts, event_totals))| VoltageLevelAggregate {
            severity: severity(&counts, weights),
            key,
            counts,
            event_totals,
        })
        .collect())
}
