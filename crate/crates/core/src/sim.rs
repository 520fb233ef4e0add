//! Device-under-test abstraction and its simulated implementation.
//!
//! The simulator stands in for a real board: it exposes voltage and
//! frequency control, benchmark execution, an EDAC-style error log and
//! a power-cycle path, all driven by a probabilistic fault model.
//!
//! The fault model gives each (effect, core) pair a logistic onset
//! curve: the probability that effect `e` appears on core `c` at
//! voltage `v` is `logistic((v_th_eff - v) / sigma)`, where the
//! effective threshold folds in the per-core static offset, a
//! per-benchmark stress factor and a frequency shift. Effects are
//! sampled independently per effect and per core; dependence between
//! effects is deliberately not modeled so the analytic expectation
//! stays in closed form. All constants are stand-ins, not measurements
//! of any real silicon.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::clock::Clock;
use crate::model::{
    ChipSpec, CoreSelection, DomainKind, Effect, EffectSet, SeverityWeights, VFPoint,
};
use crate::rng::{label, CounterRng};

#[derive(Debug, Error, PartialEq)]
pub enum DeviceError {
    #[error("voltage {mv} mV is off the device grid")]
    OffGridVoltage { mv: u32 },
    #[error("frequency {mhz} MHz is off the device grid")]
    OffGridFrequency { mhz: u32 },
    #[error("unknown PMD {pmd_id}")]
    UnknownPmd { pmd_id: u32 },
    #[error("device unresponsive")]
    Unresponsive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorKind {
    Ce,
    Ue,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Ce => "CE",
            ErrorKind::Ue => "UE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorLocation {
    L1I,
    L1D,
    L2,
    L3,
    Dram,
}

impl ErrorLocation {
    pub const ALL: [ErrorLocation; 5] = [
        ErrorLocation::L1I,
        ErrorLocation::L1D,
        ErrorLocation::L2,
        ErrorLocation::L3,
        ErrorLocation::Dram,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorLocation::L1I => "L1I",
            ErrorLocation::L1D => "L1D",
            ErrorLocation::L2 => "L2",
            ErrorLocation::L3 => "L3",
            ErrorLocation::Dram => "DRAM",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == s)
    }
}

/// One corrected/uncorrected error burst as the EDAC driver would
/// report it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorEvent {
    pub location: ErrorLocation,
    pub kind: ErrorKind,
    pub count: u32,
}

impl ErrorEvent {
    /// Renders the event in the EDAC-like text form used in raw logs:
    /// `EDAC CE L2 count=3`.
    pub fn edac_line(&self) -> String {
        format!("EDAC {} {} count={}", self.kind.name(), self.location.name(), self.count)
    }

    pub fn parse_edac_line(line: &str) -> Option<ErrorEvent> {
        let mut parts = line.split_whitespace();
        if parts.next()? != "EDAC" {
            return None;
        }
        let kind = match parts.next()? {
            "CE" => ErrorKind::Ce,
            "UE" => ErrorKind::Ue,
            _ => return None,
        };
        let location = ErrorLocation::from_name(parts.next()?)?;
        let count = parts.next()?.strip_prefix("count=")?.parse().ok()?;
        Some(ErrorEvent { location, kind, count })
    }
}

/// SHA-256 digest of a benchmark's output, used for silent-data-
/// corruption detection against a golden reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest(pub [u8; 32]);

impl OutputDigest {
    pub fn of_bytes(bytes: &[u8]) -> Self {
        let mut h = Sha256::new();
        h.update(bytes);
        OutputDigest(h.finalize().into())
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() != 64 {
            return None;
        }
        let mut out = [0u8; 32];
        for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
            out[i] = u8::from_str_radix(std::str::from_utf8(chunk).ok()?, 16).ok()?;
        }
        Some(OutputDigest(out))
    }
}

/// Addresses one benchmark run for deterministic sampling: the whole
/// simulated outcome stream is a pure function of (seed, campaign,
/// run_index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunKey {
    pub seed: u64,
    pub campaign: u64,
    pub run_index: u64,
}

impl RunKey {
    fn rng(&self, extra: &[u64]) -> CounterRng {
        let mut parts = vec![self.seed, self.campaign, self.run_index];
        parts.extend_from_slice(extra);
        CounterRng::from_parts(&parts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectCurve {
    /// Onset voltage in mV: the effect appears with probability 0.5
    /// when the effective threshold equals the operating voltage.
    pub v_th_mv: f64,
    /// Transition width in mV.
    pub sigma_mv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EffectCurves {
    pub ce: EffectCurve,
    pub ue: EffectCurve,
    pub sdc: EffectCurve,
    pub ac: EffectCurve,
    pub sc: EffectCurve,
}

impl Default for EffectCurves {
    // Corrected errors appear first as voltage drops, system crashes
    // last; placed so the safe region is roughly 8-12% below 980 mV.
    fn default() -> Self {
        EffectCurves {
            ce: EffectCurve { v_th_mv: 905.0, sigma_mv: 6.0 },
            ue: EffectCurve { v_th_mv: 895.0, sigma_mv: 4.0 },
            sdc: EffectCurve { v_th_mv: 893.0, sigma_mv: 4.0 },
            ac: EffectCurve { v_th_mv: 885.0, sigma_mv: 3.0 },
            sc: EffectCurve { v_th_mv: 875.0, sigma_mv: 2.0 },
        }
    }
}

impl EffectCurves {
    pub fn curve(&self, e: Effect) -> EffectCurve {
        match e {
            Effect::Ce => self.ce,
            Effect::Ue => self.ue,
            Effect::Sdc => self.sdc,
            Effect::Ac => self.ac,
            Effect::Sc => self.sc,
        }
    }
}

/// On-disk fault model configuration (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaultModelConfig {
    pub seed: u64,
    /// Explicit per-core static offsets in mV; when absent, offsets are
    /// drawn once from the seed, uniform in +-offset_scale_mv.
    pub core_offsets_mv: Option<Vec<f64>>,
    pub offset_scale_mv: f64,
    pub curves: EffectCurves,
    /// Per-run dynamic noise scale in mV; widens every transition.
    pub noise_mv: f64,
    /// Stress factor per benchmark id; > 1 shifts thresholds up
    /// (demanding workloads fail earlier). Unlisted benchmarks use 1.0.
    pub stress: BTreeMap<String, f64>,
    /// Threshold shift in mV per MHz relative to freq_ref_mhz; higher
    /// frequency raises thresholds.
    pub freq_factor_mv_per_mhz: f64,
    pub freq_ref_mhz: u32,
    pub boot_delay_ms: u64,
}

impl Default for FaultModelConfig {
    fn default() -> Self {
        FaultModelConfig {
            seed: 0,
            core_offsets_mv: None,
            offset_scale_mv: 8.0,
            curves: EffectCurves::default(),
            noise_mv: 1.0,
            stress: BTreeMap::new(),
            freq_factor_mv_per_mhz: 0.01,
            freq_ref_mhz: 2400,
            boot_delay_ms: 30_000,
        }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Resolved fault model: config plus per-core static offsets.
#[derive(Debug, Clone)]
pub struct FaultModel {
    pub config: FaultModelConfig,
    pub core_offsets_mv: Vec<f64>,
}

impl FaultModel {
    pub fn new(config: FaultModelConfig, core_count: u32) -> Self {
        let core_offsets_mv = match &config.core_offsets_mv {
            Some(offsets) => {
                let mut v = offsets.clone();
                v.resize(core_count as usize, 0.0);
                v
            }
            None => (0..core_count)
                .map(|c| {
                    let mut rng =
                        CounterRng::from_parts(&[config.seed, label("static-offset"), c as u64]);
                    (rng.next_f64() * 2.0 - 1.0) * config.offset_scale_mv
                })
                .collect(),
        };
        FaultModel { config, core_offsets_mv }
    }

    pub fn stress_for(&self, benchmark_id: &str) -> f64 {
        self.config.stress.get(benchmark_id).copied().unwrap_or(1.0)
    }

    /// Effective onset threshold in mV for (effect, core) at the given
    /// frequency and benchmark stress.
    pub fn threshold_mv(&self, e: Effect, core: u32, freq_mhz: u32, stress: f64) -> f64 {
        let curve = self.config.curves.curve(e);
        let freq_shift = self.config.freq_factor_mv_per_mhz
            * (freq_mhz as f64 - self.config.freq_ref_mhz as f64);
        curve.v_th_mv * stress + self.core_offsets_mv[core as usize] + freq_shift
    }

    /// Probability that effect `e` appears on `core` in one run.
    /// Non-increasing in voltage by construction.
    pub fn effect_probability(
        &self,
        e: Effect,
        core: u32,
        vf: VFPoint,
        stress: f64,
    ) -> f64 {
        let sigma = self.config.curves.curve(e).sigma_mv + self.config.noise_mv;
        logistic((self.threshold_mv(e, core, vf.freq_mhz, stress) - vf.voltage_mv as f64) / sigma)
    }

    /// Probability that the run (any involved core) manifests effect `e`
    /// before observability masking.
    pub fn run_probability(
        &self,
        e: Effect,
        selection: &CoreSelection,
        vf: VFPoint,
        stress: f64,
    ) -> f64 {
        let p_none: f64 = selection
            .core_ids
            .iter()
            .map(|&c| 1.0 - self.effect_probability(e, c, vf, stress))
            .product();
        1.0 - p_none
    }

    /// Voltage at which the system-crash probability of `core` crosses
    /// 0.5 (the analytic Vmin for that core).
    pub fn analytic_vmin_mv(&self, core: u32, freq_mhz: u32, stress: f64) -> f64 {
        self.threshold_mv(Effect::Sc, core, freq_mhz, stress)
    }

    /// Samples which effects each involved core manifests, before
    /// observability masking. One uniform draw per (core, effect); the
    /// draw key excludes the voltage, so outcomes at different voltages
    /// of the same run index are coupled and exactly monotone.
    pub fn sample_raw(&self, setup: &CharacterizationSetup, key: RunKey) -> EffectSet {
        let stress = self.stress_for(&setup.benchmark_id);
        let mut raw = EffectSet::default();
        for &core in &setup.selection.core_ids {
            for (i, e) in Effect::ALL.into_iter().enumerate() {
                let mut rng = key.rng(&[label("effect"), core as u64, i as u64]);
                if rng.next_f64() < self.effect_probability(e, core, setup.vf, stress) {
                    raw.insert(e);
                }
            }
        }
        raw
    }
}

/// Observability masking: a system crash hides everything else (output,
/// exit code and error logs are unrecoverable), and an application
/// crash leaves no valid output to compare, so SDC requires a clean
/// exit.
pub fn observed_effects(raw: EffectSet) -> EffectSet {
    if raw.contains(Effect::Sc) {
        return EffectSet::default().with(Effect::Sc);
    }
    let mut out = EffectSet::default();
    if raw.contains(Effect::Ac) {
        out.insert(Effect::Ac);
    }
    if raw.contains(Effect::Sdc) && !raw.contains(Effect::Ac) {
        out.insert(Effect::Sdc);
    }
    if raw.contains(Effect::Ce) {
        out.insert(Effect::Ce);
    }
    if raw.contains(Effect::Ue) {
        out.insert(Effect::Ue);
    }
    out
}

/// One run's configuration: which benchmark, on which cores, at which
/// V/F point.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationSetup {
    pub benchmark_id: String,
    pub selection: CoreSelection,
    pub vf: VFPoint,
}

/// Per-effect probabilities of the *observed* effect set for one run,
/// in `Effect::ALL` order.
pub fn observed_probabilities(
    model: &FaultModel,
    setup: &CharacterizationSetup,
) -> [f64; 5] {
    let stress = model.stress_for(&setup.benchmark_id);
    let p = |e| model.run_probability(e, &setup.selection, setup.vf, stress);
    let p_sc = p(Effect::Sc);
    let p_ac = p(Effect::Ac);
    [
        p(Effect::Sdc) * (1.0 - p_sc) * (1.0 - p_ac), // SDC needs clean exit
        p(Effect::Ce) * (1.0 - p_sc),
        p(Effect::Ue) * (1.0 - p_sc),
        p_ac * (1.0 - p_sc),
        p_sc,
    ]
}

/// Closed-form expected severity of one run under the fault model:
/// E[S] = sum_e W_e * P(effect e observed), by linearity, since each
/// run contributes Bernoulli(p_e) to count_e / N.
pub fn expected_severity(
    model: &FaultModel,
    setup: &CharacterizationSetup,
    weights: &SeverityWeights,
) -> f64 {
    let probs = observed_probabilities(model, setup);
    Effect::ALL
        .into_iter()
        .zip(probs)
        .map(|(e, p)| weights.weight(e) * p)
        .sum()
}

/// Sampled observed effect set of one run, as a pure function of the
/// model and the run key. `SimulatedDevice::run_benchmark` produces the
/// same set for the same key.
pub fn sample_observed(
    model: &FaultModel,
    setup: &CharacterizationSetup,
    key: RunKey,
) -> EffectSet {
    observed_effects(model.sample_raw(setup, key))
}

/// What one benchmark run yielded, as observable from outside the
/// device.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub effect_set: EffectSet,
    pub error_events: Vec<ErrorEvent>,
    pub exit_code: i32,
    /// Absent when the process never produced output (AC or SC).
    pub output_digest: Option<OutputDigest>,
    pub duration_ms: u64,
    /// Whether the device keeps answering pings during/after the run.
    pub responsive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkRequest<'a> {
    pub benchmark_id: &'a str,
    pub selection: &'a CoreSelection,
    pub nominal_ms: u64,
    pub golden: Option<&'a OutputDigest>,
    pub key: RunKey,
}

/// Capability set of a device under test. `SimulatedDevice` implements
/// it below; a real board would implement the same surface on top of
/// its management processor and a serial/GPIO wiring.
///
/// Mutating operations must be externally serialized by the caller;
/// `ping` may be called concurrently with a running benchmark.
pub trait DeviceInterface {
    fn chip(&self) -> &ChipSpec;
    /// Sets the rail voltage; affects every PMD in the domain jointly.
    fn set_voltage(&mut self, domain: DomainKind, mv: u32) -> Result<(), DeviceError>;
    /// Sets one PMD's frequency; other PMDs are unaffected.
    fn set_frequency(&mut self, pmd_id: u32, mhz: u32) -> Result<(), DeviceError>;
    fn run_benchmark(&mut self, req: &BenchmarkRequest) -> Result<RunOutcome, DeviceError>;
    /// Returns and clears the corrected/uncorrected error events
    /// accumulated since the previous read.
    fn read_error_log(&mut self) -> Result<Vec<ErrorEvent>, DeviceError>;
    /// Hard reset; must work on an unresponsive device. The device
    /// becomes responsive after its boot delay with nominal V/F and
    /// cleared error logs.
    fn power_cycle(&mut self);
    /// Responsiveness probe; never blocks on a running benchmark.
    fn ping(&self) -> bool;
    fn voltage_mv(&self, domain: DomainKind) -> u32;
    fn frequency_mhz(&self, pmd_id: u32) -> u32;
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum HangStyle {
    /// Kernel dead: pings stop answering.
    PingDead,
    /// Benchmark hung but kernel alive: pings answer, completion never
    /// comes, the watchdog fires on timeout.
    SilentHang,
}

/// Deterministic simulated device.
pub struct SimulatedDevice {
    spec: ChipSpec,
    model: FaultModel,
    clock: Arc<Clock>,
    pmd_voltage_mv: u32,
    soc_voltage_mv: u32,
    pmd_freq_mhz: Vec<u32>,
    error_log: Vec<ErrorEvent>,
    hang: Option<HangStyle>,
    boot_ready_ms: u64,
    voltage_trace: Vec<u32>,
}

impl SimulatedDevice {
    pub fn new(spec: ChipSpec, model: FaultModel, clock: Arc<Clock>) -> Self {
        let pmd_nominal = spec.domain(DomainKind::PmdDomain).vdd_nominal_mv;
        let soc_nominal = spec.domain(DomainKind::SocDomain).vdd_nominal_mv;
        let pmd_count = spec.pmd_count;
        SimulatedDevice {
            spec,
            model,
            clock,
            pmd_voltage_mv: pmd_nominal,
            soc_voltage_mv: soc_nominal,
            pmd_freq_mhz: vec![2400.min(pmd_nominal); pmd_count as usize], // overwritten below
            error_log: Vec::new(),
            hang: None,
            boot_ready_ms: 0,
            voltage_trace: vec![pmd_nominal],
        }
        .with_nominal_freqs()
    }

    fn with_nominal_freqs(mut self) -> Self {
        let f = self.spec.freq_max_mhz;
        for slot in &mut self.pmd_freq_mhz {
            *slot = f;
        }
        self
    }

    pub fn model(&self) -> &FaultModel {
        &self.model
    }

    /// Every PMD-rail voltage the device has been set to, in order.
    /// Used by tests to assert the nominal-restore invariant.
    pub fn voltage_trace(&self) -> &[u32] {
        &self.voltage_trace
    }

    fn responsive(&self) -> bool {
        !matches!(self.hang, Some(HangStyle::PingDead)) && self.clock.now_ms() >= self.boot_ready_ms
    }

    fn check_usable(&self) -> Result<(), DeviceError> {
        if self.hang.is_some() || !self.responsive() {
            return Err(DeviceError::Unresponsive);
        }
        Ok(())
    }
}

impl DeviceInterface for SimulatedDevice {
    fn chip(&self) -> &ChipSpec {
        &self.spec
    }

    fn set_voltage(&mut self, domain: DomainKind, mv: u32) -> Result<(), DeviceError> {
        self.check_usable()?;
        let d = self.spec.domain(domain);
        if !d.scalable || !self.spec.voltage_on_grid(d, mv) {
            return Err(DeviceError::OffGridVoltage { mv });
        }
        match domain {
            DomainKind::PmdDomain => {
                self.pmd_voltage_mv = mv;
                self.voltage_trace.push(mv);
            }
            DomainKind::SocDomain => self.soc_voltage_mv = mv,
            DomainKind::Standby => unreachable!("standby is not scalable"),
        }
        Ok(())
    }

    fn set_frequency(&mut self, pmd_id: u32, mhz: u32) -> Result<(), DeviceError> {
        self.check_usable()?;
        if pmd_id >= self.spec.pmd_count {
            return Err(DeviceError::UnknownPmd { pmd_id });
        }
        if !self.spec.frequency_on_grid(mhz) {
            return Err(DeviceError::OffGridFrequency { mhz });
        }
        self.pmd_freq_mhz[pmd_id as usize] = mhz;
        Ok(())
    }

    fn run_benchmark(&mut self, req: &BenchmarkRequest) -> Result<RunOutcome, DeviceError> {
        self.check_usable()?;
        let freq = self.pmd_freq_mhz[self.spec.pmd_of_core(req.selection.core_ids[0]) as usize];
        let setup = CharacterizationSetup {
            benchmark_id: req.benchmark_id.to_string(),
            selection: req.selection.clone(),
            vf: VFPoint::new(self.pmd_voltage_mv, freq),
        };
        let raw = self.model.sample_raw(&setup, req.key);
        let observed = observed_effects(raw);
        let mut fab = req.key.rng(&[label("fabricate")]);

        if observed.contains(Effect::Sc) {
            let style = if fab.next_f64() < 0.5 {
                HangStyle::PingDead
            } else {
                HangStyle::SilentHang
            };
            self.hang = Some(style);
            let duration_ms = match style {
                // Died partway through; pings stop answering.
                HangStyle::PingDead => (req.nominal_ms * (1 + fab.next_range(9)) / 10).max(1),
                // Never completes; any duration beyond the 2x timeout.
                HangStyle::SilentHang => req.nominal_ms.saturating_mul(4),
            };
            return Ok(RunOutcome {
                effect_set: observed,
                error_events: Vec::new(),
                exit_code: -1,
                output_digest: None,
                duration_ms,
                responsive: style == HangStyle::SilentHang,
            });
        }

        let mut events = Vec::new();
        if observed.contains(Effect::Ce) {
            let n = 1 + fab.next_range(2);
            for _ in 0..n {
                events.push(ErrorEvent {
                    location: ErrorLocation::ALL[fab.next_range(5) as usize],
                    kind: ErrorKind::Ce,
                    count: 1 + fab.next_range(12) as u32,
                });
            }
        }
        if observed.contains(Effect::Ue) {
            events.push(ErrorEvent {
                location: ErrorLocation::ALL[fab.next_range(5) as usize],
                kind: ErrorKind::Ue,
                count: 1 + fab.next_range(3) as u32,
            });
        }
        self.error_log.extend_from_slice(&events);

        let exit_code = if observed.contains(Effect::Ac) {
            1 + fab.next_range(254) as i32
        } else {
            0
        };
        let output_digest = if exit_code == 0 {
            if observed.contains(Effect::Sdc) {
                let mut d = honest_digest(req.benchmark_id);
                // Any corruption pattern works as long as it differs
                // from the golden output.
                d.0[0] ^= 0x01 | (fab.next_u64() as u8);
                if d.0[0] == honest_digest(req.benchmark_id).0[0] {
                    d.0[1] ^= 0xff;
                }
                Some(d)
            } else {
                Some(honest_digest(req.benchmark_id))
            }
        } else {
            None
        };
        // Duration jitter stays well under the 2x watchdog timeout.
        let duration_ms = ((req.nominal_ms as f64 * (0.9 + 0.2 * fab.next_f64())) as u64).max(1);

        Ok(RunOutcome {
            effect_set: observed,
            error_events: events,
            exit_code,
            output_digest,
            duration_ms,
            responsive: true,
        })
    }

    fn read_error_log(&mut self) -> Result<Vec<ErrorEvent>, DeviceError> {
        self.check_usable()?;
        Ok(std::mem::take(&mut self.error_log))
    }

    fn power_cycle(&mut self) {
        self.hang = None;
        self.error_log.clear();
        self.pmd_voltage_mv = self.spec.domain(DomainKind::PmdDomain).vdd_nominal_mv;
        self.soc_voltage_mv = self.spec.domain(DomainKind::SocDomain).vdd_nominal_mv;
        let f = self.spec.freq_max_mhz;
        for slot in &mut self.pmd_freq_mhz {
            *slot = f;
        }
        self.voltage_trace.push(self.pmd_voltage_mv);
        self.boot_ready_ms = self.clock.now_ms() + self.model.config.boot_delay_ms;
    }

    fn ping(&self) -> bool {
        self.responsive()
    }

    fn voltage_mv(&self, domain: DomainKind) -> u32 {
        match domain {
            DomainKind::PmdDomain => self.pmd_voltage_mv,
            DomainKind::SocDomain => self.soc_voltage_mv,
            DomainKind::Standby => self.spec.domain(DomainKind::Standby).vdd_nominal_mv,
        }
    }

    fn frequency_mhz(&self, pmd_id: u32) -> u32 {
        self.pmd_freq_mhz[pmd_id as usize]
    }
}

/// The digest a benchmark's output has when nothing corrupted it; the
/// golden pre-pass at nominal conditions observes exactly this value.
pub fn honest_digest(benchmark_id: &str) -> OutputDigest {
    OutputDigest::of_bytes(format!("{benchmark_id}:output").as_bytes())
}
