//! Campaign planning: materialize the full run schedule from the
//! config, ordered by campaign (benchmark x selection x frequency),
//! then descending voltage, then repeat index. The schedule is a pure
//! function of (config, spec), so resuming re-plans and subtracts.

use serde::{Deserialize, Serialize};

use crate::model::{enumerate_vf_grid, ChipSpec, DomainKind, VFPoint};

use super::config::CampaignConfig;
use super::OrchestratorError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDescriptor {
    /// Globally unique ordinal; resumable by this id.
    pub run_id: u64,
    pub benchmark_index: usize,
    pub selection_index: usize,
    /// Ordinal of the (benchmark, selection, frequency) campaign this
    /// run belongs to.
    pub campaign_index: u64,
    pub vf: VFPoint,
    pub repeat_index: u32,
}

impl RunDescriptor {
    /// Opaque whitespace-free token used on the watchdog wire.
    pub fn token(&self) -> String {
        format!("r{}", self.run_id)
    }
}

pub fn plan_campaign(
    config: &CampaignConfig,
    spec: &ChipSpec,
) -> Result<Vec<RunDescriptor>, OrchestratorError> {
    config.validate(spec)?;
    let domain = spec.domain(DomainKind::PmdDomain);
    let mut plan = Vec::new();
    let mut run_id = 0u64;
    let mut campaign_index = 0u64;
    for (bi, _bench) in config.benchmarks.iter().enumerate() {
        for (si, _sel) in config.selections.iter().enumerate() {
            for &freq in &config.frequencies_mhz {
                let grid = enumerate_vf_grid(
                    spec,
                    domain,
                    config.v_start_mv,
                    config.v_floor_mv,
                    freq,
                    config.v_step_mv,
                )?;
                for vf in grid {
                    for repeat in 0..config.repeats {
                        plan.push(RunDescriptor {
                            run_id,
                            benchmark_index: bi,
                            selection_index: si,
                            campaign_index,
                            vf,
                            repeat_index: repeat,
                        });
                        run_id += 1;
                    }
                }
                campaign_index += 1;
            }
        }
    }
    Ok(plan)
}
