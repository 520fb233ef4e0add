//! Initialization and Execution phases: golden pre-pass, reliable-cores
//! setup, watchdog-protected run execution, crash-safe journaling and
//! safe data collection.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use crate::clock::Clock;
use crate::model::{ChipSpec, CoreSelection, DomainKind, Effect, EffectSet};
use crate::rng::label;
use crate::sim::{
    BenchmarkRequest, DeviceInterface, ErrorEvent, FaultModel, OutputDigest, RunKey, RunOutcome,
    SimulatedDevice,
};
use crate::watchdog::{Action, Message, PingResult, WatchdogState};

use super::collect::{collect_logs, run_log_dir, RunArtifacts, Verdict};
use super::config::CampaignConfig;
use super::journal::{Journal, JournalRecord, RunStatus};
use super::plan::{plan_campaign, RunDescriptor};
use super::OrchestratorError;

/// Per-PMD frequency targets plus the cores that must host nothing but
/// the benchmark. PMDs under characterization get the configured
/// frequency; every other PMD runs at the chip minimum so failures
/// attribute to the benchmark alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyPlan {
    pub per_pmd_mhz: Vec<u32>,
    pub migration_cores: Vec<u32>,
}

pub fn reliable_cores_setup(
    selection: &CoreSelection,
    freq_mhz: u32,
    spec: &ChipSpec,
) -> FrequencyPlan {
    let mut per_pmd_mhz = vec![spec.freq_min_mhz; spec.pmd_count as usize];
    for &core in &selection.core_ids {
        per_pmd_mhz[spec.pmd_of_core(core) as usize] = freq_mhz;
    }
    FrequencyPlan {
        per_pmd_mhz,
        migration_cores: selection.core_ids.clone(),
    }
}

/// What one executed run produced, for reporting and cross-checking
/// against the parsed log tree.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub descriptor: RunDescriptor,
    pub effects: EffectSet,
    pub error_events: Vec<ErrorEvent>,
    pub duration_ms: u64,
    pub log_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub executed: usize,
    pub remaining: usize,
}

/// ISO-8601 UTC timestamp from milliseconds since the Unix epoch
/// (civil-from-days conversion).
pub fn iso8601(ms: u64) -> String {
    let secs = ms / 1000;
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    let (h, m, s) = (rem / 3600, (rem / 60) % 60, rem % 60);
    let z = days + 719_468;
    let era = z / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = if month <= 2 { y + 1 } else { y };
    format!("{year:04}-{month:02}-{d:02}T{h:02}:{m:02}:{s:02}Z")
}

pub struct CampaignRunner<D: DeviceInterface> {
    pub config: CampaignConfig,
    pub spec: ChipSpec,
    device: D,
    clock: Arc<Clock>,
    watchdog: WatchdogState,
    journal: Journal,
    golden: BTreeMap<String, OutputDigest>,
    /// (ms, wire line) events of the run in flight.
    watchdog_events: Vec<(u64, String)>,
}

impl CampaignRunner<SimulatedDevice> {
    /// Builds a simulated device from the config's fault model and
    /// clock mode.
    pub fn from_config(config: CampaignConfig) -> Result<Self, OrchestratorError> {
        let spec = config.chip_spec();
        config.validate(&spec)?;
        let clock = Arc::new(if config.virtual_clock {
            Clock::virtual_clock()
        } else {
            Clock::wall_clock()
        });
        let model = FaultModel::new(config.effective_fault_model(), spec.core_count());
        let device = SimulatedDevice::new(spec.clone(), model, clock.clone());
        Self::new(config, device, clock)
    }
}

impl<D: DeviceInterface> CampaignRunner<D> {
    pub fn new(
        config: CampaignConfig,
        device: D,
        clock: Arc<Clock>,
    ) -> Result<Self, OrchestratorError> {
        let spec = config.chip_spec();
        config.validate(&spec)?;
        std::fs::create_dir_all(&config.output_root).map_err(OrchestratorError::Storage)?;
        let journal = Journal::open(&config.output_root.join("journal.log"))?;
        let watchdog = WatchdogState::new(config.ping_interval_ms);
        let golden = load_golden(&config)?;
        Ok(CampaignRunner {
            config,
            spec,
            device,
            clock,
            watchdog,
            journal,
            golden,
            watchdog_events: Vec::new(),
        })
    }

    pub fn device(&self) -> &D {
        &self.device
    }

    pub fn clock(&self) -> &Arc<Clock> {
        &self.clock
    }

    fn now(&self) -> u64 {
        self.clock.now_ms()
    }

    fn journal_append(
        &mut self,
        run_id: u64,
        status: RunStatus,
        effects: EffectSet,
    ) -> Result<(), OrchestratorError> {
        let timestamp = iso8601(self.now());
        self.journal
            .append(&JournalRecord { run_id, status, effects, timestamp })?;
        Ok(())
    }

    /// Initialization: produce (or load) golden output digests under
    /// nominal conditions. Mandatory before any scaled run.
    pub fn ensure_golden(&mut self) -> Result<(), OrchestratorError> {
        let ids: Vec<(usize, String)> = self
            .config
            .benchmarks
            .iter()
            .enumerate()
            .filter(|(_, b)| !self.golden.contains_key(&b.id))
            .map(|(i, b)| (i, b.id.clone()))
            .collect();
        for (index, id) in ids {
            let bench = self.config.benchmarks[index].clone();
            let digest = if let Some(path) = &bench.golden_output_path {
                let bytes = std::fs::read(path).map_err(|e| {
                    OrchestratorError::MissingGolden(format!("{}: {e}", path.display()))
                })?;
                OutputDigest::of_bytes(&bytes)
            } else {
                // Nominal-conditions pre-pass on the device itself.
                let selection = self.config.selections[0].resolve(&self.spec);
                let key = RunKey {
                    seed: self.config.seed,
                    campaign: label("golden"),
                    run_index: index as u64,
                };
                let outcome = self
                    .device
                    .run_benchmark(&BenchmarkRequest {
                        benchmark_id: &id,
                        selection: &selection,
                        nominal_ms: bench.nominal_duration_ms,
                        golden: None,
                        key,
                    })
                    .map_err(OrchestratorError::Device)?;
                self.clock.advance_ms(outcome.duration_ms);
                let _ = self.device.read_error_log();
                match outcome.output_digest {
                    Some(d) if outcome.exit_code == 0 => d,
                    _ => {
                        return Err(OrchestratorError::MissingGolden(format!(
                            "benchmark {id} failed under nominal conditions"
                        )))
                    }
                }
            };
            self.golden.insert(id, digest);
        }
        store_golden(&self.config, &self.golden)?;
        Ok(())
    }

    /// Remaining schedule: re-plans deterministically, converts every
    /// STARTED-without-COMPLETED run to COMPLETED with SC evidence, and
    /// returns the unexecuted suffix. Idempotent.
    pub fn remaining(&mut self) -> Result<Vec<RunDescriptor>, OrchestratorError> {
        let plan = plan_campaign(&self.config, &self.spec)?;
        let records = Journal::load(self.journal.path())?;
        let mut completed = std::collections::BTreeSet::new();
        let mut started = std::collections::BTreeSet::new();
        for rec in &records {
            match rec.status {
                RunStatus::Completed => {
                    completed.insert(rec.run_id);
                }
                RunStatus::Started => {
                    started.insert(rec.run_id);
                }
                _ => {}
            }
        }
        let orphans: Vec<u64> = started.difference(&completed).copied().collect();
        for run_id in orphans {
            let desc = plan
                .iter()
                .find(|d| d.run_id == run_id)
                .cloned()
                .ok_or_else(|| {
                    OrchestratorError::Config(format!(
                        "journal references unknown run {run_id}; config/journal mismatch"
                    ))
                })?;
            // The crash itself is the datum: record the interrupted run
            // as a system crash rather than re-executing it.
            let sc = EffectSet::default().with(Effect::Sc);
            self.journal_append(run_id, RunStatus::Interrupted, EffectSet::NORMAL)?;
            self.write_interrupted_logs(&desc)?;
            self.journal_append(run_id, RunStatus::Completed, sc)?;
            completed.insert(run_id);
        }
        Ok(plan
            .into_iter()
            .filter(|d| !completed.contains(&d.run_id))
            .collect())
    }

    fn write_interrupted_logs(&mut self, desc: &RunDescriptor) -> Result<(), OrchestratorError> {
        let dir = self.log_dir(desc);
        let bench = &self.config.benchmarks[desc.benchmark_index];
        let start = Message::Start {
            run_id: desc.token(),
            nominal_ms: bench.nominal_duration_ms,
        };
        let artifacts = RunArtifacts {
            output_digest: None,
            verdict: None,
            exit_code: None,
            error_events: Vec::new(),
            watchdog_events: vec![
                (self.now(), start.encode().trim_end().to_string()),
                (self.now(), Message::PowerCycle.encode().trim_end().to_string()),
            ],
            duration_ms: 0,
        };
        collect_logs(&dir, &artifacts).map_err(OrchestratorError::Storage)
    }

    fn log_dir(&self, desc: &RunDescriptor) -> PathBuf {
        let bench = &self.config.benchmarks[desc.benchmark_index];
        let selection = self.config.selections[desc.selection_index].resolve(&self.spec);
        run_log_dir(
            &self.config.output_root,
            &bench.id,
            &selection.label(),
            desc.vf.freq_mhz,
            desc.vf.voltage_mv,
            desc.repeat_index,
        )
    }

    /// Executes up to `limit` runs of the remaining schedule (all of
    /// them when `None`). Returns how many ran and how many are left.
    pub fn run(&mut self, limit: Option<usize>) -> Result<RunSummary, OrchestratorError> {
        self.ensure_golden()?;
        let remaining = self.remaining()?;
        let take = limit.unwrap_or(remaining.len()).min(remaining.len());
        for desc in &remaining[..take] {
            self.execute_run(desc)?;
        }
        Ok(RunSummary {
            executed: take,
            remaining: remaining.len() - take,
        })
    }

    /// Sends a wire line into the watchdog endpoint, recording it in
    /// the run's watchdog log.
    fn wire_send(&mut self, msg: &Message) -> Result<Vec<Action>, OrchestratorError> {
        let line = msg.encode();
        self.watchdog_events
            .push((self.now(), line.trim_end().to_string()));
        let decoded = Message::decode(&line).expect("self-encoded line");
        let (next, actions) =
            self.watchdog
                .on_message(&decoded, self.now(), self.config.timeout_multiplier)?;
        self.watchdog = next;
        Ok(actions)
    }

    fn watchdog_tick(&mut self, ping: PingResult) -> Vec<Action> {
        let (next, actions) = self.watchdog.tick(self.now(), ping);
        for a in &actions {
            let rendered = match a {
                Action::PowerCycle => Some(Message::PowerCycle.encode()),
                Action::SendResume => Some(Message::Resume.encode()),
                _ => None,
            };
            if let Some(line) = rendered {
                self.watchdog_events
                    .push((self.now(), line.trim_end().to_string()));
            }
        }
        self.watchdog = next;
        actions
    }

    /// One characterization run, end to end. The sequence is
    /// contractual: journal STARTED; apply the frequency plan and the
    /// scaled voltage; arm the watchdog; run; restore nominal; read
    /// error logs and compare output; store raw logs externally; DONE;
    /// journal COMPLETED. A watchdog power-cycle ends the run as SC and
    /// execution continues with the next descriptor only after RESUME.
    pub fn execute_run(&mut self, desc: &RunDescriptor) -> Result<RunRecord, OrchestratorError> {
        let bench = self.config.benchmarks[desc.benchmark_index].clone();
        let selection = self.config.selections[desc.selection_index].resolve(&self.spec);
        let golden = *self
            .golden
            .get(&bench.id)
            .ok_or_else(|| OrchestratorError::MissingGolden(bench.id.clone()))?;

        // (1) durable intent
        self.journal_append(desc.run_id, RunStatus::Started, EffectSet::NORMAL)?;
        self.watchdog_events.clear();

        // (2) reliable-cores setup and scaled voltage
        let freq_plan = reliable_cores_setup(&selection, desc.vf.freq_mhz, &self.spec);
        for (pmd, &mhz) in freq_plan.per_pmd_mhz.iter().enumerate() {
            self.device
                .set_frequency(pmd as u32, mhz)
                .map_err(OrchestratorError::Device)?;
        }
        self.device
            .set_voltage(DomainKind::PmdDomain, desc.vf.voltage_mv)
            .map_err(OrchestratorError::Device)?;

        // (3) arm the watchdog
        self.wire_send(&Message::Start {
            run_id: desc.token(),
            nominal_ms: bench.nominal_duration_ms,
        })?;

        // (4) launch the benchmark
        let key = RunKey {
            seed: self.config.seed,
            campaign: desc.campaign_index,
            run_index: desc.run_id,
        };
        let outcome = self.device.run_benchmark(&BenchmarkRequest {
            benchmark_id: &bench.id,
            selection: &selection,
            nominal_ms: bench.nominal_duration_ms,
            golden: Some(&golden),
            key,
        });

        let completes = match &outcome {
            Ok(out) => !out.effect_set.contains(Effect::Sc),
            Err(_) => false,
        };

        if completes {
            let out = outcome.expect("checked above");
            self.finish_normal_run(desc, &golden, out)
        } else {
            // Device hung or died: wait for the watchdog to cut power
            // and bring it back, then account the run as SC.
            self.finish_crashed_run(desc)
        }
    }

    fn finish_normal_run(
        &mut self,
        desc: &RunDescriptor,
        golden: &OutputDigest,
        out: RunOutcome,
    ) -> Result<RunRecord, OrchestratorError> {
        // Wait out the benchmark in ping-interval quanta, keeping the
        // watchdog fed. Durations stay under the timeout here.
        let quantum = self.config.ping_interval_ms;
        let mut waited = 0;
        while waited < out.duration_ms {
            let step = quantum.min(out.duration_ms - waited);
            self.clock.advance_ms(step);
            waited += step;
            let ping = if self.device.ping() {
                PingResult::Responsive
            } else {
                PingResult::Unresponsive
            };
            let actions = self.watchdog_tick(ping);
            debug_assert!(
                !actions.contains(&Action::PowerCycle),
                "healthy run must not trip the watchdog"
            );
        }

        // (5) restore nominal before any bookkeeping
        let nominal_mv = self.spec.domain(DomainKind::PmdDomain).vdd_nominal_mv;
        self.device
            .set_voltage(DomainKind::PmdDomain, nominal_mv)
            .map_err(OrchestratorError::Device)?;

        // (6) collect evidence at nominal conditions
        let events = self
            .device
            .read_error_log()
            .map_err(OrchestratorError::Device)?;
        let verdict = out.output_digest.map(|d| {
            if d == *golden {
                Verdict::Match
            } else {
                Verdict::Mismatch
            }
        });

        let mut effects = EffectSet::default();
        if verdict == Some(Verdict::Mismatch) {
            effects.insert(Effect::Sdc);
        }
        if events.iter().any(|e| e.kind == crate::sim::ErrorKind::Ce) {
            effects.insert(Effect::Ce);
        }
        if events.iter().any(|e| e.kind == crate::sim::ErrorKind::Ue) {
            effects.insert(Effect::Ue);
        }
        if out.exit_code != 0 {
            effects.insert(Effect::Ac);
        }

        // (8) completion notification
        let done_actions = self.wire_send(&Message::Done { run_id: desc.token() })?;
        debug_assert!(done_actions.is_empty());

        // (7)+(9) durable logs, then the completion record
        let dir = self.log_dir(desc);
        let artifacts = RunArtifacts {
            output_digest: out.output_digest,
            verdict,
            exit_code: Some(out.exit_code),
            error_events: events.clone(),
            watchdog_events: std::mem::take(&mut self.watchdog_events),
            duration_ms: out.duration_ms,
        };
        collect_logs(&dir, &artifacts).map_err(OrchestratorError::Storage)?;
        self.journal_append(desc.run_id, RunStatus::Completed, effects)?;

        Ok(RunRecord {
            descriptor: desc.clone(),
            effects,
            error_events: events,
            duration_ms: out.duration_ms,
            log_dir: dir,
        })
    }

    fn finish_crashed_run(&mut self, desc: &RunDescriptor) -> Result<RunRecord, OrchestratorError> {
        let quantum = self.config.ping_interval_ms;
        let started = self.now();
        let mut cycled = false;
        let mut resumed = false;
        // Tick until the watchdog cycles the board and reports it back.
        while !resumed {
            self.clock.advance_ms(quantum);
            let ping = if self.device.ping() {
                PingResult::Responsive
            } else {
                PingResult::Unresponsive
            };
            let actions = self.watchdog_tick(ping);
            for action in actions {
                match action {
                    Action::PowerCycle => {
                        self.device.power_cycle();
                        cycled = true;
                    }
                    Action::SendResume => resumed = true,
                    _ => {}
                }
            }
            // Watchdog timeouts are bounded, so this terminates; guard
            // against a misconfigured model anyway.
            if self.now() - started > 1_000 * 60 * 60 * 24 * 365 {
                return Err(OrchestratorError::Config(
                    "watchdog never recovered the device".into(),
                ));
            }
        }
        debug_assert!(cycled);

        self.journal_append(desc.run_id, RunStatus::Interrupted, EffectSet::NORMAL)?;

        let effects = EffectSet::default().with(Effect::Sc);
        let dir = self.log_dir(desc);
        let artifacts = RunArtifacts {
            output_digest: None,
            verdict: None,
            exit_code: None,
            error_events: Vec::new(),
            watchdog_events: std::mem::take(&mut self.watchdog_events),
            duration_ms: self.now() - started,
        };
        let duration_ms = artifacts.duration_ms;
        collect_logs(&dir, &artifacts).map_err(OrchestratorError::Storage)?;
        self.journal_append(desc.run_id, RunStatus::Completed, effects)?;

        Ok(RunRecord {
            descriptor: desc.clone(),
            effects,
            error_events: Vec::new(),
            duration_ms,
            log_dir: dir,
        })
    }
}

fn golden_path(config: &CampaignConfig) -> PathBuf {
    config.output_root.join("golden.json")
}

fn load_golden(
    config: &CampaignConfig,
) -> Result<BTreeMap<String, OutputDigest>, OrchestratorError> {
    let path = golden_path(config);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(OrchestratorError::Storage(e)),
    };
    let map: BTreeMap<String, String> = serde_json::from_str(&text)
        .map_err(|e| OrchestratorError::Config(format!("invalid golden.json: {e}")))?;
    map.into_iter()
        .map(|(k, v)| {
            match OutputDigest::from_hex(&v) {
                Some(d) => Ok((k, d)),
                None => Err(OrchestratorError::Config(format!("bad golden digest for {k}"))),
            }
        })
        .collect()
}

fn store_golden(
    config: &CampaignConfig,
    golden: &BTreeMap<String, OutputDigest>,
) -> Result<(), OrchestratorError> {
    let map: BTreeMap<&str, String> = golden
        .iter()
        .map(|(k, v)| (k.as_str(), v.to_hex()))
        .collect();
    let text = serde_json::to_string_pretty(&map).expect("string map serializes");
    std::fs::write(golden_path(config), text).map_err(OrchestratorError::Storage)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_plan_single_core() {
        let spec = ChipSpec::default_8_core();
        let plan = reliable_cores_setup(&CoreSelection::single(0), 2400, &spec);
        assert_eq!(plan.per_pmd_mhz, vec![2400, 300, 300, 300]);
        assert_eq!(plan.migration_cores, vec![0]);
    }

    #[test]
    fn frequency_plan_pmd_pair() {
        let spec = ChipSpec::default_8_core();
        let plan = reliable_cores_setup(&CoreSelection::pmd_pair(&spec, 1), 2400, &spec);
        assert_eq!(plan.per_pmd_mhz, vec![300, 2400, 300, 300]);
        assert_eq!(plan.migration_cores, vec![2, 3]);
    }

    #[test]
    fn frequency_plan_all_cores() {
        let spec = ChipSpec::default_8_core();
        let plan = reliable_cores_setup(&CoreSelection::all(&spec), 1200, &spec);
        assert_eq!(plan.per_pmd_mhz, vec![1200, 1200, 1200, 1200]);
    }

    #[test]
    fn frequency_plan_isolates_bookkeeping_cores() {
        let spec = ChipSpec::default_8_core();
        for pmd in 0..4 {
            let sel = CoreSelection::pmd_pair(&spec, pmd);
            let plan = reliable_cores_setup(&sel, 2400, &spec);
            let bookkeeping: Vec<u32> = (0..spec.core_count())
                .filter(|c| !plan.migration_cores.contains(c))
                .collect();
            for c in bookkeeping {
                assert!(!sel.core_ids.contains(&c));
                assert_eq!(plan.per_pmd_mhz[spec.pmd_of_core(c) as usize], 300);
            }
        }
    }

    #[test]
    fn iso8601_formatting() {
        assert_eq!(iso8601(0), "1970-01-01T00:00:00Z");
        assert_eq!(iso8601(86_400_000), "1970-01-02T00:00:00Z");
        assert_eq!(iso8601(1_700_000_000_000), "2023-11-14T22:13:20Z");
    }
}
