//! Campaign orchestration: planning, reliable-cores setup, watchdog-
//! protected execution, crash-safe journaling and safe log collection.

pub mod collect;
pub mod config;
pub mod journal;
pub mod plan;
pub mod runner;

use thiserror::Error;

use crate::model::ModelError;
use crate::sim::DeviceError;
use crate::watchdog::WatchdogError;

pub use collect::{collect_logs, run_log_dir, sanitize, RunArtifacts, Verdict};
pub use config::{BenchmarkConfig, CampaignConfig, SelectionConfig};
pub use journal::{Journal, JournalError, JournalRecord, RunStatus};
pub use plan::{plan_campaign, RunDescriptor};
pub use runner::{reliable_cores_setup, CampaignRunner, FrequencyPlan, RunRecord, RunSummary};

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("device error: {0}")]
    Device(DeviceError),
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("storage error: {0}")]
    Storage(std::io::Error),
    #[error("missing golden output: {0}")]
    MissingGolden(String),
    #[error(transparent)]
    Watchdog(#[from] WatchdogError),
}
