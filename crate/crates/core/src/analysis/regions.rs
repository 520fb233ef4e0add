//! Safe/Unsafe/Crash region classification over a descending voltage
//! grid, plus the power-gain summary per region row.
//!
//! The Safe region is the contiguous all-normal prefix of the
//! descending grid. The Crash region starts at the highest voltage
//! with any system crash and extends downward: crash dominates, so an
//! isolated lower voltage that happened to survive is still labeled
//! CRASH and flagged with a non-monotonicity warning rather than
//! hidden. Everything in between is Unsafe.

use serde::Serialize;

use crate::model::power_gain;

use super::{AnalysisError, VoltageLevelAggregate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Safe,
    Unsafe,
    Crash,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Safe => "SAFE",
            Region::Unsafe => "UNSAFE",
            Region::Crash => "CRASH",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub benchmark: String,
    pub selection: String,
    pub freq_mhz: u32,
    /// (voltage, region) in descending voltage order.
    pub per_voltage: Vec<(u32, Region)>,
    pub safe_floor_mv: Option<u32>,
    pub crash_ceiling_mv: Option<u32>,
    /// Depth of the safe region below nominal, 0 when the safe region
    /// is empty.
    pub safe_depth_mv: u32,
    pub safe_depth_pct: f64,
    /// Total width of the unsafe band (levels x grid step).
    pub unsafe_width_mv: u32,
    pub warnings: Vec<String>,
}

/// Classifies one (benchmark, selection, frequency) series. The
/// aggregates must cover a contiguous descending grid.
pub fn classify_regions(
    benchmark: &str,
    selection: &str,
    freq_mhz: u32,
    aggregates: &[&VoltageLevelAggregate],
    nominal_mv: u32,
) -> Result<RegionRow, AnalysisError> {
    let key = format!("{benchmark}/{selection}/{freq_mhz}MHz");
    let mut levels: Vec<&VoltageLevelAggregate> = aggregates.to_vec();
    levels.sort_by(|a, b| b.key.voltage_mv.cmp(&a.key.voltage_mv));
    if levels.is_empty() {
        return Err(AnalysisError::NonContiguousGrid { key });
    }
    let gaps: Vec<u32> = levels
        .windows(2)
        .map(|w| w[0].key.voltage_mv - w[1].key.voltage_mv)
        .collect();
    if gaps.iter().any(|&g| g == 0) || gaps.windows(2).any(|g| g[0] != g[1]) {
        return Err(AnalysisError::NonContiguousGrid { key });
    }
    let step = gaps.first().copied().unwrap_or(0);

    let abnormal = |a: &VoltageLevelAggregate| {
        a.counts.sdc + a.counts.ce + a.counts.ue + a.counts.ac + a.counts.sc > 0
    };
    let crash_ceiling_mv = levels
        .iter()
        .filter(|a| a.counts.sc > 0)
        .map(|a| a.key.voltage_mv)
        .max();

    let mut per_voltage = Vec::with_capacity(levels.len());
    let mut warnings = Vec::new();
    let mut in_safe_prefix = true;
    let mut safe_floor_mv = None;
    for level in &levels {
        let v = level.key.voltage_mv;
        let region = if crash_ceiling_mv.is_some_and(|c| v <= c) {
            if level.counts.sc == 0 {
                warnings.push(format!(
                    "{key}: non-monotone data at {v} mV (no SC observed below the crash ceiling)"
                ));
            }
            Region::Crash
        } else if in_safe_prefix && !abnormal(level) {
            safe_floor_mv = Some(v);
            Region::Safe
        } else {
            in_safe_prefix = false;
            Region::Unsafe
        };
        if region != Region::Safe {
            in_safe_prefix = false;
        }
        per_voltage.push((v, region));
    }

    let safe_depth_mv = safe_floor_mv.map_or(0, |f| nominal_mv.saturating_sub(f));
    let safe_depth_pct = if safe_floor_mv.is_some() {
        safe_depth_mv as f64 / nominal_mv as f64
    } else {
        0.0
    };
    let unsafe_levels = per_voltage
        .iter()
        .filter(|(_, r)| *r == Region::Unsafe)
        .count() as u32;
    Ok(RegionRow {
        benchmark: benchmark.to_string(),
        selection: selection.to_string(),
        freq_mhz,
        per_voltage,
        safe_floor_mv,
        crash_ceiling_mv,
        safe_depth_mv,
        safe_depth_pct,
        unsafe_width_mv: unsafe_levels * step,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainReport {
    pub depth_pct: f64,
    /// Power gain at the safe-region floor.
    pub gain_pct: f64,
    /// Hypothetical gain at the crash ceiling, reachable only with
    /// mitigation techniques for the unsafe band.
    pub ceiling_gain_pct: Option<f64>,
}

pub fn power_gain_report(row: &RegionRow, nominal_mv: u32) -> GainReport {
    let gain_pct = row
        .safe_floor_mv
        .and_then(|f| power_gain(f, nominal_mv).ok())
        .unwrap_or(0.0);
    let ceiling_gain_pct = row
        .crash_ceiling_mv
        .and_then(|c| power_gain(c, nominal_mv).ok());
    GainReport {
        depth_pct: row.safe_depth_pct,
        gain_pct,
        ceiling_gain_pct,
    }
}
