//! `uvlab`: command-line front end for the undervolting
//! characterization harness.
//!
//! Exit codes: 0 success, 2 usage error, 3 configuration error,
//! 4 device error, 5 storage error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uvlab_core::analysis::{aggregate, classify_regions, emit_reports, parse_output_tree, RegionRow};
use uvlab_core::model::{CoreSelection, DomainKind, SeverityWeights, VFPoint};
use uvlab_core::orchestrator::config::CampaignConfig;
use uvlab_core::orchestrator::runner::CampaignRunner;
use uvlab_core::orchestrator::OrchestratorError;
use uvlab_core::sim::{
    expected_severity, sample_observed, CharacterizationSetup, FaultModel, FaultModelConfig,
    RunKey,
};

const EXIT_CONFIG: u8 = 3;
const EXIT_DEVICE: u8 = 4;
const EXIT_STORAGE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "uvlab",
    version,
    about = "Voltage/frequency undervolting characterization harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Override the campaign seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override severity weights, e.g. `sdc=4,ce=1,ue=2,ac=8,sc=16`.
    #[arg(long, global = true, value_parser = parse_weights)]
    weights: Option<SeverityWeights>,
    /// Run under a virtual clock (instant, deterministic timing).
    #[arg(long, global = true)]
    virtual_clock: bool,
    /// Override the output root directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Produce golden output digests at nominal conditions.
    Init { config: PathBuf },
    /// Execute a characterization campaign end to end.
    Run {
        config: PathBuf,
        /// Also parse the log tree and emit reports afterwards.
        #[arg(long)]
        with_report: bool,
    },
    /// Continue an interrupted campaign from its journal.
    Resume { config: PathBuf },
    /// Parse a raw output tree and print a per-level summary.
    Parse { output_root: Option<PathBuf> },
    /// Emit runs.csv, severity.csv, regions.csv and SVG charts.
    Report { output_root: Option<PathBuf> },
    /// Compare analytic and sampled severity over a voltage sweep.
    SimulateCheck { model_config: PathBuf },
}

fn parse_weights(s: &str) -> Result<SeverityWeights, String> {
    let mut w = SeverityWeights::default();
    for pair in s.split(',') {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {pair:?}"))?;
        let value: f64 = value
            .parse()
            .map_err(|e| format!("bad weight for {key}: {e}"))?;
        match key {
            "sdc" => w.sdc = value,
            "ce" => w.ce = value,
            "ue" => w.ue = value,
            "ac" => w.ac = value,
            "sc" => w.sc = value,
            other => return Err(format!("unknown effect {other:?}")),
        }
    }
    w.validate().map_err(|e| e.to_string())?;
    Ok(w)
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<OrchestratorError> for CliError {
    fn from(e: OrchestratorError) -> Self {
        let code = match &e {
            OrchestratorError::Config(_) | OrchestratorError::Model(_)
            | OrchestratorError::MissingGolden(_) | OrchestratorError::Watchdog(_) => EXIT_CONFIG,
            OrchestratorError::Device(_) => EXIT_DEVICE,
            OrchestratorError::Journal(_) | OrchestratorError::Storage(_) => EXIT_STORAGE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<uvlab_core::analysis::AnalysisError> for CliError {
    fn from(e: uvlab_core::analysis::AnalysisError) -> Self {
        let code = match &e {
            uvlab_core::analysis::AnalysisError::Io(_) => EXIT_STORAGE,
            _ => EXIT_CONFIG,
        };
        CliError { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Machine-readable error envelope on stderr.
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.message, "exit_code": e.code })
            );
            ExitCode::from(e.code)
        }
    }
}

fn load_config(path: &Path, ov: &Overrides) -> Result<CampaignConfig, CliError> {
    let mut config = CampaignConfig::load(path)?;
    if let Some(seed) = ov.seed {
        config.seed = seed;
    }
    if let Some(weights) = ov.weights {
        config.weights = weights;
    }
    if ov.virtual_clock {
        config.virtual_clock = true;
    }
    if let Some(output) = &ov.output {
        config.output_root = output.clone();
    } else if let Ok(root) = std::env::var("UVLAB_OUTPUT_ROOT") {
        if !root.is_empty() {
            config.output_root = PathBuf::from(root);
        }
    }
    config.validate(&config.chip_spec())?;
    Ok(config)
}

fn print_config_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("config serializes"));
}

fn output_root(positional: Option<PathBuf>, ov: &Overrides) -> Result<PathBuf, CliError> {
    positional
        .or_else(|| ov.output.clone())
        .or_else(|| std::env::var("UVLAB_OUTPUT_ROOT").ok().filter(|s| !s.is_empty()).map(PathBuf::from))
        .ok_or_else(|| {
            CliError::config("no output root: pass it as an argument, via --output, or UVLAB_OUTPUT_ROOT")
        })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let ov = cli.overrides.clone();
    match cli.command {
        Command::Init { config } => {
            let config = load_config(&config, &ov)?;
            if ov.print_config {
                print_config_json(&config);
                return Ok(());
            }
            let mut runner = CampaignRunner::from_config(config.clone())?;
            runner.ensure_golden()?;
            println!(
                "golden digests written to {}",
                config.output_root.join("golden.json").display()
            );
            Ok(())
        }
        Command::Run { config, with_report } => {
            let config = load_config(&config, &ov)?;
            if ov.print_config {
                print_config_json(&config);
                return Ok(());
            }
            let mut runner = CampaignRunner::from_config(config.clone())?;
            let summary = runner.run(None)?;
            println!("executed {} runs, {} remaining", summary.executed, summary.remaining);
            if with_report {
                run_report(&config.output_root, &config.weights, nominal_of(&config))?;
            }
            Ok(())
        }
        Command::Resume { config } => {
            let config = load_config(&config, &ov)?;
            if ov.print_config {
                print_config_json(&config);
                return Ok(());
            }
            let mut runner = CampaignRunner::from_config(config)?;
            let summary = runner.run(None)?;
            println!("executed {} runs, {} remaining", summary.executed, summary.remaining);
            Ok(())
        }
        Command::Parse { output_root: root } => {
            let root = output_root(root, &ov)?;
            if ov.print_config {
                print_config_json(&serde_json::json!({ "output_root": root }));
                return Ok(());
            }
            let weights = ov.weights.unwrap_or_default();
            let (runs, warnings) = parse_output_tree(&root)?;
            let aggregates = aggregate(&runs, &weights)?;
            println!("parsed {} runs across {} voltage levels", runs.len(), aggregates.len());
            for a in &aggregates {
                println!(
                    "{}/{}/{}MHz {} mV: N={} severity={}",
                    a.key.benchmark,
                    a.key.selection,
                    a.key.freq_mhz,
                    a.key.voltage_mv,
                    a.counts.n_runs,
                    a.severity
                );
            }
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Report { output_root: root } => {
            let root = output_root(root, &ov)?;
            if ov.print_config {
                print_config_json(&serde_json::json!({ "output_root": root }));
                return Ok(());
            }
            let weights = ov.weights.unwrap_or_default();
            run_report(&root, &weights, default_nominal_mv())
        }
        Command::SimulateCheck { model_config } => {
            let text = std::fs::read_to_string(&model_config).map_err(|e| {
                CliError::config(format!("cannot read {}: {e}", model_config.display()))
            })?;
            let mut fm: FaultModelConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("invalid model config: {e}")))?;
            if let Some(seed) = ov.seed {
                fm.seed = seed;
            }
            if ov.print_config {
                print_config_json(&fm);
                return Ok(());
            }
            simulate_check(fm, ov.weights.unwrap_or_default());
            Ok(())
        }
    }
}

fn default_nominal_mv() -> u32 {
    uvlab_core::ChipSpec::default_8_core()
        .domain(DomainKind::PmdDomain)
        .vdd_nominal_mv
}

fn nominal_of(config: &CampaignConfig) -> u32 {
    config.chip_spec().domain(DomainKind::PmdDomain).vdd_nominal_mv
}

/// Parse a log tree and emit the full report set into `<root>/reports`.
fn run_report(root: &Path, weights: &SeverityWeights, nominal_mv: u32) -> Result<(), CliError> {
    let (runs, warnings) = parse_output_tree(root)?;
    let aggregates = aggregate(&runs, weights)?;

    let mut series: BTreeMap<(String, String, u32), Vec<&uvlab_core::analysis::VoltageLevelAggregate>> =
        BTreeMap::new();
    for a in &aggregates {
        series
            .entry((a.key.benchmark.clone(), a.key.selection.clone(), a.key.freq_mhz))
            .or_default()
            .push(a);
    }
    let mut rows: Vec<RegionRow> = Vec::new();
    for ((bench, sel, freq), levels) in &series {
        rows.push(classify_regions(bench, sel, *freq, levels, nominal_mv)?);
    }

    let reports_dir = root.join("reports");
    let written = emit_reports(&runs, &aggregates, &rows, &reports_dir, nominal_mv)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

/// Print analytic vs sampled severity for a voltage sweep at the
/// reference frequency, one line per grid voltage.
fn simulate_check(fm: FaultModelConfig, weights: SeverityWeights) {
    let spec = uvlab_core::ChipSpec::default_8_core();
    let model = FaultModel::new(fm, spec.core_count());
    let freq = model.config.freq_ref_mhz;
    println!("voltage_mv,analytic_severity,sampled_severity");
    for v in (840..=980).rev().step_by(5) {
        let setup = CharacterizationSetup {
            benchmark_id: "check".into(),
            selection: CoreSelection::single(0),
            vf: VFPoint::new(v, freq),
        };
        let analytic = expected_severity(&model, &setup, &weights);
        let n = 2_000u64;
        let sampled: f64 = (0..n)
            .map(|i| {
                let key = RunKey { seed: model.config.seed, campaign: v as u64, run_index: i };
                sample_observed(&model, &setup, key)
                    .iter()
                    .map(|e| weights.weight(e))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / n as f64;
        println!("{v},{analytic:.6},{sampled:.6}");
    }
}
