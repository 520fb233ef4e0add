//! Campaign configuration (JSON on disk).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::{ChipSpec, CoreSelection, SeverityWeights};
use crate::sim::FaultModelConfig;

use super::OrchestratorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub id: String,
    /// Command line on a real device; informational for the simulator.
    #[serde(default)]
    pub command: String,
    #[serde(default)]
    pub input: Option<String>,
    /// Pre-existing golden output file; when absent, the golden digest
    /// is produced by the nominal-conditions pre-pass.
    #[serde(default)]
    pub golden_output_path: Option<PathBuf>,
    pub nominal_duration_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SelectionConfig {
    SingleCore { core: u32 },
    PmdPair { pmd: u32 },
    AllCores,
}

impl SelectionConfig {
    pub fn resolve(&self, spec: &ChipSpec) -> CoreSelection {
        match *self {
            SelectionConfig::SingleCore { core } => CoreSelection::single(core),
            SelectionConfig::PmdPair { pmd } => CoreSelection::pmd_pair(spec, pmd),
            SelectionConfig::AllCores => CoreSelection::all(spec),
        }
    }
}

fn default_repeats() -> u32 {
    1
}
fn default_ping_interval() -> u64 {
    crate::watchdog::DEFAULT_PING_INTERVAL_MS
}
fn default_timeout_multiplier() -> u64 {
    crate::watchdog::DEFAULT_TIMEOUT_MULTIPLIER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub benchmarks: Vec<BenchmarkConfig>,
    pub v_start_mv: u32,
    pub v_floor_mv: u32,
    /// Voltage step; defaults to the chip's base grid step.
    #[serde(default)]
    pub v_step_mv: Option<u32>,
    pub frequencies_mhz: Vec<u32>,
    pub selections: Vec<SelectionConfig>,
    /// Runs per voltage level (N).
    #[serde(default = "default_repeats")]
    pub repeats: u32,
    #[serde(default)]
    pub seed: u64,
    pub output_root: PathBuf,
    /// Chip description; defaults to the built-in 8-core layout.
    #[serde(default)]
    pub chip: Option<ChipSpec>,
    #[serde(default)]
    pub fault_model: FaultModelConfig,
    #[serde(default)]
    pub weights: SeverityWeights,
    #[serde(default)]
    pub virtual_clock: bool,
    #[serde(default = "default_ping_interval")]
    pub ping_interval_ms: u64,
    #[serde(default = "default_timeout_multiplier")]
    pub timeout_multiplier: u64,
}

impl CampaignConfig {
    pub fn load(path: &Path) -> Result<Self, OrchestratorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OrchestratorError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| OrchestratorError::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn chip_spec(&self) -> ChipSpec {
        self.chip.clone().unwrap_or_else(ChipSpec::default_8_core)
    }

    /// The fault model config with the campaign seed folded in when the
    /// model does not pin its own.
    pub fn effective_fault_model(&self) -> FaultModelConfig {
        let mut fm = self.fault_model.clone();
        if fm.seed == 0 {
            fm.seed = self.seed;
        }
        fm
    }

    pub fn validate(&self, spec: &ChipSpec) -> Result<(), OrchestratorError> {
        spec.validate()?;
        self.weights.validate()?;
        if self.benchmarks.is_empty() {
            return Err(OrchestratorError::Config("no benchmarks configured".into()));
        }
        if self.selections.is_empty() {
            return Err(OrchestratorError::Config("no core selections configured".into()));
        }
        if self.frequencies_mhz.is_empty() {
            return Err(OrchestratorError::Config("no frequencies configured".into()));
        }
        if self.repeats < 1 {
            return Err(OrchestratorError::Config("repeats must be >= 1".into()));
        }
        if self.benchmarks.iter().any(|b| b.nominal_duration_ms == 0) {
            return Err(OrchestratorError::Config("nominal_duration_ms must be > 0".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for b in &self.benchmarks {
            if !ids.insert(&b.id) {
                return Err(OrchestratorError::Config(format!("duplicate benchmark id {}", b.id)));
            }
        }
        for sel in &self.selections {
            sel.resolve(spec).validate(spec)?;
        }
        Ok(())
    }
}
