//! Chip/domain types, V/F grids, effect categories and the severity and
//! power-gain arithmetic shared by every other module.
//!
//! Voltages are integer millivolts end-to-end so that grid membership
//! checks stay exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("voltage {mv} mV is not on the {step} mV grid below {nominal} mV")]
    OffGridVoltage { mv: u32, step: u32, nominal: u32 },
    #[error("frequency {mhz} MHz is not on the grid {min}..={max} step {step}")]
    OffGridFrequency { mhz: u32, min: u32, max: u32, step: u32 },
    #[error("voltage {mv} mV is above the domain nominal {nominal} mV")]
    AboveNominal { mv: u32, nominal: u32 },
    #[error("voltage {mv} mV must be positive and at most nominal {nominal} mV")]
    NonPositiveVoltage { mv: u32, nominal: u32 },
    #[error("empty grid: start {start} mV is below floor {floor} mV")]
    EmptyGrid { start: u32, floor: u32 },
    #[error("step {step} mV is not a positive multiple of the {base} mV grid")]
    BadStep { step: u32, base: u32 },
    #[error("invalid chip spec: {0}")]
    InvalidChipSpec(String),
    #[error("invalid core selection: {0}")]
    InvalidSelection(String),
    #[error("domain {0:?} is not voltage-scalable")]
    NotScalable(DomainKind),
    #[error("effect counts invalid: {0}")]
    InvalidCounts(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    PmdDomain,
    SocDomain,
    Standby,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerDomain {
    pub kind: DomainKind,
    pub vdd_nominal_mv: u32,
    pub scalable: bool,
}

/// Physical layout and V/F granularity of the chip under characterization.
///
/// All PMDs share one voltage rail; frequency is per-PMD.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChipSpec {
    pub pmd_count: u32,
    pub cores_per_pmd: u32,
    pub voltage_step_mv: u32,
    pub freq_min_mhz: u32,
    pub freq_max_mhz: u32,
    pub freq_step_mhz: u32,
    pub domains: Vec<PowerDomain>,
}

impl ChipSpec {
    /// Default 8-core chip: 4 PMDs of 2 cores, PMD rail nominal 980 mV,
    /// SoC rail nominal 950 mV, 5 mV voltage grid, 300..2400 MHz at
    /// 300 MHz steps.
    pub fn default_8_core() -> Self {
        ChipSpec {
            pmd_count: 4,
            cores_per_pmd: 2,
            voltage_step_mv: 5,
            freq_min_mhz: 300,
            freq_max_mhz: 2400,
            freq_step_mhz: 300,
            domains: vec![
                PowerDomain {
                    kind: DomainKind::PmdDomain,
                    vdd_nominal_mv: 980,
                    scalable: true,
                },
                PowerDomain {
                    kind: DomainKind::SocDomain,
                    vdd_nominal_mv: 950,
                    scalable: true,
                },
                PowerDomain {
                    kind: DomainKind::Standby,
                    vdd_nominal_mv: 950,
                    scalable: false,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.pmd_count < 1 {
            return Err(ModelError::InvalidChipSpec("pmd_count must be >= 1".into()));
        }
        if self.cores_per_pmd < 1 {
            return Err(ModelError::InvalidChipSpec("cores_per_pmd must be >= 1".into()));
        }
        if self.voltage_step_mv == 0 {
            return Err(ModelError::InvalidChipSpec("voltage_step_mv must be > 0".into()));
        }
        if self.freq_step_mhz == 0
            || self.freq_max_mhz < self.freq_min_mhz
            || (self.freq_max_mhz - self.freq_min_mhz) % self.freq_step_mhz != 0
        {
            return Err(ModelError::InvalidChipSpec(
                "frequency grid must satisfy min + k*step = max".into(),
            ));
        }
        for kind in [DomainKind::PmdDomain, DomainKind::SocDomain, DomainKind::Standby] {
            let n = self.domains.iter().filter(|d| d.kind == kind).count();
            if n != 1 {
                return Err(ModelError::InvalidChipSpec(format!(
                    "expected exactly one {kind:?} domain, found {n}"
                )));
            }
        }
        if self
            .domains
            .iter()
            .any(|d| d.scalable && d.vdd_nominal_mv == 0)
        {
            return Err(ModelError::InvalidChipSpec(
                "scalable domain with zero nominal voltage".into(),
            ));
        }
        Ok(())
    }

    pub fn core_count(&self) -> u32 {
        self.pmd_count * self.cores_per_pmd
    }

    pub fn pmd_of_core(&self, core_id: u32) -> u32 {
        core_id / self.cores_per_pmd
    }

    pub fn domain(&self, kind: DomainKind) -> &PowerDomain {
        self.domains
            .iter()
            .find(|d| d.kind == kind)
            .expect("validated chip spec has one domain per kind")
    }

    pub fn frequency_on_grid(&self, mhz: u32) -> bool {
        mhz >= self.freq_min_mhz
            && mhz <= self.freq_max_mhz
            && (mhz - self.freq_min_mhz) % self.freq_step_mhz == 0
    }

    pub fn voltage_on_grid(&self, domain: &PowerDomain, mv: u32) -> bool {
        mv <= domain.vdd_nominal_mv
            && mv > 0
            && (domain.vdd_nominal_mv - mv) % self.voltage_step_mv == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VFPoint {
    pub voltage_mv: u32,
    pub freq_mhz: u32,
}

impl VFPoint {
    pub fn new(voltage_mv: u32, freq_mhz: u32) -> Self {
        VFPoint { voltage_mv, freq_mhz }
    }
}

/// A V/F point that has passed grid validation for a specific domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidatedVFPoint(VFPoint);

impl ValidatedVFPoint {
    pub fn point(&self) -> VFPoint {
        self.0
    }
}

/// Accepts exactly the grid {v_nom - k*step} x {f_min + j*f_step}.
pub fn validate_vf_point(
    spec: &ChipSpec,
    domain: &PowerDomain,
    point: VFPoint,
) -> Result<ValidatedVFPoint, ModelError> {
    if !domain.scalable {
        return Err(ModelError::NotScalable(domain.kind));
    }
    if point.voltage_mv > domain.vdd_nominal_mv {
        return Err(ModelError::AboveNominal {
            mv: point.voltage_mv,
            nominal: domain.vdd_nominal_mv,
        });
    }
    if !spec.voltage_on_grid(domain, point.voltage_mv) {
        return Err(ModelError::OffGridVoltage {
            mv: point.voltage_mv,
            step: spec.voltage_step_mv,
            nominal: domain.vdd_nominal_mv,
        });
    }
    if !spec.frequency_on_grid(point.freq_mhz) {
        return Err(ModelError::OffGridFrequency {
            mhz: point.freq_mhz,
            min: spec.freq_min_mhz,
            max: spec.freq_max_mhz,
            step: spec.freq_step_mhz,
        });
    }
    Ok(ValidatedVFPoint(point))
}

/// Descending voltage schedule at a constant frequency.
///
/// `step_mv` of `None` uses the chip's base grid step; an explicit step
/// must be a positive multiple of it. The first element is `v_start_mv`,
/// the last is the lowest reachable voltage >= `v_floor_mv`.
pub fn enumerate_vf_grid(
    spec: &ChipSpec,
    domain: &PowerDomain,
    v_start_mv: u32,
    v_floor_mv: u32,
    freq_mhz: u32,
    step_mv: Option<u32>,
) -> Result<Vec<VFPoint>, ModelError> {
    if v_start_mv < v_floor_mv {
        return Err(ModelError::EmptyGrid {
            start: v_start_mv,
            floor: v_floor_mv,
        });
    }
    let step = step_mv.unwrap_or(spec.voltage_step_mv);
    if step == 0 || step % spec.voltage_step_mv != 0 {
        return Err(ModelError::BadStep {
            step,
            base: spec.voltage_step_mv,
        });
    }
    validate_vf_point(spec, domain, VFPoint::new(v_start_mv, freq_mhz))?;
    validate_vf_point(spec, domain, VFPoint::new(v_floor_mv, freq_mhz))?;
    let mut points = Vec::new();
    let mut v = v_start_mv;
    loop {
        points.push(VFPoint::new(v, freq_mhz));
        if v < v_floor_mv + step {
            break;
        }
        v -= step;
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    SingleCore,
    PmdPair,
    AllCores,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreSelection {
    pub mode: SelectionMode,
    pub core_ids: Vec<u32>,
}

impl CoreSelection {
    pub fn single(core_id: u32) -> Self {
        CoreSelection {
            mode: SelectionMode::SingleCore,
            core_ids: vec![core_id],
        }
    }

    pub fn pmd_pair(spec: &ChipSpec, pmd_id: u32) -> Self {
        let base = pmd_id * spec.cores_per_pmd;
        CoreSelection {
            mode: SelectionMode::PmdPair,
            core_ids: (base..base + spec.cores_per_pmd).collect(),
        }
    }

    pub fn all(spec: &ChipSpec) -> Self {
        CoreSelection {
            mode: SelectionMode::AllCores,
            core_ids: (0..spec.core_count()).collect(),
        }
    }

    pub fn validate(&self, spec: &ChipSpec) -> Result<(), ModelError> {
        let total = spec.core_count();
        let mut seen = std::collections::BTreeSet::new();
        for &id in &self.core_ids {
            if id >= total {
                return Err(ModelError::InvalidSelection(format!(
                    "core id {id} out of range (chip has {total} cores)"
                )));
            }
            if !seen.insert(id) {
                return Err(ModelError::InvalidSelection(format!("duplicate core id {id}")));
            }
        }
        match self.mode {
            SelectionMode::SingleCore if self.core_ids.len() != 1 => Err(
                ModelError::InvalidSelection("single_core needs exactly one core id".into()),
            ),
            SelectionMode::PmdPair => {
                if self.core_ids.len() != spec.cores_per_pmd as usize {
                    return Err(ModelError::InvalidSelection(format!(
                        "pmd_pair needs the {} cores of one PMD",
                        spec.cores_per_pmd
                    )));
                }
                let pmd = spec.pmd_of_core(self.core_ids[0]);
                if self.core_ids.iter().any(|&c| spec.pmd_of_core(c) != pmd) {
                    return Err(ModelError::InvalidSelection(
                        "pmd_pair cores span multiple PMDs".into(),
                    ));
                }
                Ok(())
            }
            SelectionMode::AllCores if self.core_ids.len() != total as usize => Err(
                ModelError::InvalidSelection("all_cores must list every core".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Stable identifier used in log-tree paths and report rows.
    pub fn label(&self) -> String {
        match self.mode {
            SelectionMode::SingleCore => format!("core{}", self.core_ids[0]),
            SelectionMode::PmdPair => {
                let ids: Vec<String> = self.core_ids.iter().map(|c| c.to_string()).collect();
                format!("pmd-pair-{}", ids.join("-"))
            }
            SelectionMode::AllCores => "all-cores".to_string(),
        }
    }
}

/// The abnormal-effect categories a run can manifest. Normal operation
/// (NO) is the absence of all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Effect {
    Sdc,
    Ce,
    Ue,
    Ac,
    Sc,
}

impl Effect {
    pub const ALL: [Effect; 5] = [Effect::Sdc, Effect::Ce, Effect::Ue, Effect::Ac, Effect::Sc];

    pub fn name(self) -> &'static str {
        match self {
            Effect::Sdc => "SDC",
            Effect::Ce => "CE",
            Effect::Ue => "UE",
            Effect::Ac => "AC",
            Effect::Sc => "SC",
        }
    }

    pub fn from_name(s: &str) -> Option<Effect> {
        match s {
            "SDC" => Some(Effect::Sdc),
            "CE" => Some(Effect::Ce),
            "UE" => Some(Effect::Ue),
            "AC" => Some(Effect::Ac),
            "SC" => Some(Effect::Sc),
            _ => None,
        }
    }

    fn bit(self) -> u8 {
        match self {
            Effect::Sdc => 1 << 0,
            Effect::Ce => 1 << 1,
            Effect::Ue => 1 << 2,
            Effect::Ac => 1 << 3,
            Effect::Sc => 1 << 4,
        }
    }
}

/// Set of effects one run manifested. Runs may carry several flags at
/// once (e.g. both SDC and CE).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EffectSet(u8);

impl EffectSet {
    pub const NORMAL: EffectSet = EffectSet(0);

    pub fn insert(&mut self, e: Effect) {
        self.0 |= e.bit();
    }

    pub fn with(mut self, e: Effect) -> Self {
        self.insert(e);
        self
    }

    pub fn contains(&self, e: Effect) -> bool {
        self.0 & e.bit() != 0
    }

    /// Normal operation: no abnormal flag at all.
    pub fn is_normal(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Effect> + '_ {
        Effect::ALL.into_iter().filter(|e| self.contains(*e))
    }

    /// Canonical comma-separated rendering, `-` for the empty set.
    pub fn to_csv(&self) -> String {
        if self.is_normal() {
            return "-".to_string();
        }
        self.iter().map(Effect::name).collect::<Vec<_>>().join(",")
    }

    pub fn from_csv(s: &str) -> Option<EffectSet> {
        let mut set = EffectSet::default();
        if s == "-" {
            return Some(set);
        }
        for part in s.split(',') {
            set.insert(Effect::from_name(part)?);
        }
        Some(set)
    }
}

impl FromIterator<Effect> for EffectSet {
    fn from_iter<T: IntoIterator<Item = Effect>>(iter: T) -> Self {
        let mut s = EffectSet::default();
        for e in iter {
            s.insert(e);
        }
        s
    }
}

/// Per-effect weights of the severity function. Defaults follow the
/// experimental setup this harness models: SC is the most critical
/// effect, corrected errors the least.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeverityWeights {
    pub sdc: f64,
    pub ce: f64,
    pub ue: f64,
    pub ac: f64,
    pub sc: f64,
    pub no: f64,
}

impl Default for SeverityWeights {
    fn default() -> Self {
        SeverityWeights {
            sdc: 4.0,
            ce: 1.0,
            ue: 2.0,
            ac: 8.0,
            sc: 16.0,
            no: 0.0,
        }
    }
}

impl SeverityWeights {
    pub fn weight(&self, e: Effect) -> f64 {
        match e {
            Effect::Sdc => self.sdc,
            Effect::Ce => self.ce,
            Effect::Ue => self.ue,
            Effect::Ac => self.ac,
            Effect::Sc => self.sc,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [self.sdc, self.ce, self.ue, self.ac, self.sc, self.no];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ModelError::InvalidCounts(
                "severity weights must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Per-run occurrence counts at one voltage level: a run with a dozen
/// corrected errors still contributes 1 to the CE count, so every count
/// is bounded by N. Raw event totals live with the run records instead.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectCounts {
    pub n_runs: u32,
    pub sdc: u32,
    pub ce: u32,
    pub ue: u32,
    pub ac: u32,
    pub sc: u32,
}

impl EffectCounts {
    pub fn count(&self, e: Effect) -> u32 {
        match e {
            Effect::Sdc => self.sdc,
            Effect::Ce => self.ce,
            Effect::Ue => self.ue,
            Effect::Ac => self.ac,
            Effect::Sc => self.sc,
        }
    }

    pub fn count_mut(&mut self, e: Effect) -> &mut u32 {
        match e {
            Effect::Sdc => &mut self.sdc,
            Effect::Ce => &mut self.ce,
            Effect::Ue => &mut self.ue,
            Effect::Ac => &mut self.ac,
            Effect::Sc => &mut self.sc,
        }
    }

    pub fn add_run(&mut self, effects: EffectSet) {
        self.n_runs += 1;
        for e in effects.iter() {
            *self.count_mut(e) += 1;
        }
    }

    pub fn merge(&mut self, other: &EffectCounts) {
        self.n_runs += other.n_runs;
        for e in Effect::ALL {
            *self.count_mut(e) += other.count(e);
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_runs < 1 {
            return Err(ModelError::InvalidCounts("n_runs must be >= 1".into()));
        }
        for e in Effect::ALL {
            if self.count(e) > self.n_runs {
                return Err(ModelError::InvalidCounts(format!(
                    "{} count {} exceeds N={}",
                    e.name(),
                    self.count(e),
                    self.n_runs
                )));
            }
        }
        Ok(())
    }
}

/// The severity function at one voltage level: the weighted sum of
/// effect occurrence counts, each normalized by the number of runs N.
///
/// With the default weights and single-flag runs the score tops out at
/// 16 (all runs crashing the system); because a run may carry several
/// flags the score can exceed 16 in general.
pub fn severity(counts: &EffectCounts, weights: &SeverityWeights) -> f64 {
    let n = counts.n_runs as f64;
    Effect::ALL
        .into_iter()
        .map(|e| weights.weight(e) * counts.count(e) as f64 / n)
        .sum()
}

/// Dynamic-power gain from running a rail at `v_mv` instead of
/// `v_nominal_mv`, modeled as 1 - (v/v_nom)^2 at constant frequency.
/// This is a model of the quadratic voltage dependence of dynamic
/// power, not a measurement.
pub fn power_gain(v_mv: u32, v_nominal_mv: u32) -> Result<f64, ModelError> {
    if v_mv == 0 {
        return Err(ModelError::NonPositiveVoltage {
            mv: v_mv,
            nominal: v_nominal_mv,
        });
    }
    if v_mv > v_nominal_mv {
        return Err(ModelError::AboveNominal {
            mv: v_mv,
            nominal: v_nominal_mv,
        });
    }
    let ratio = v_mv as f64 / v_nominal_mv as f64;
    Ok(1.0 - ratio * ratio)
}
