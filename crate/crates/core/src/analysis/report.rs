//! Report emission: runs.csv, severity.csv, regions.csv plus one
//! region chart and one severity heatmap per benchmark as
//! self-contained SVG files (textual, diffable, golden-testable).
//!
//! CSV dialect: comma-separated, header row, LF line endings, UTF-8,
//! no quoting (identifiers are sanitized path segments).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::regions::{power_gain_report, Region, RegionRow};
use super::{AnalysisError, ParsedRun, VoltageLevelAggregate};

const CELL_W: u32 = 26;
const CELL_H: u32 = 20;
const MARGIN_LEFT: u32 = 130;
const MARGIN_TOP: u32 = 40;

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<(), AnalysisError> {
    std::fs::write(path, contents)?;
    Ok(())
}

pub fn runs_csv(runs: &[ParsedRun]) -> String {
    let mut out = String::from("run_id,bench,selection,freq_mhz,voltage_mv,repeat,effects,exit_code,duration_ms\n");
    for r in runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            opt(r.run_id),
            r.benchmark,
            r.selection,
            r.freq_mhz,
            r.voltage_mv,
            r.repeat,
            r.effects.to_csv().replace(',', ";"),
            opt(r.exit_code),
            r.duration_ms
        );
    }
    out
}

pub fn severity_csv(aggregates: &[VoltageLevelAggregate]) -> String {
    let mut out = String::from("bench,selection,freq_mhz,voltage_mv,N,SDC,CE,UE,AC,SC,severity\n");
    let mut sorted: Vec<&VoltageLevelAggregate> = aggregates.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.key.benchmark, &a.key.selection, a.key.freq_mhz, std::cmp::Reverse(a.key.voltage_mv))
            .cmp(&(&b.key.benchmark, &b.key.selection, b.key.freq_mhz, std::cmp::Reverse(b.key.voltage_mv)))
    });
    for a in sorted {
        let c = &a.counts;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            a.key.benchmark,
            a.key.selection,
            a.key.freq_mhz,
            a.key.voltage_mv,
            c.n_runs,
            c.sdc,
            c.ce,
            c.ue,
            c.ac,
            c.sc,
            a.severity
        );
    }
    out
}

pub fn regions_csv(rows: &[RegionRow], nominal_mv: u32) -> String {
    let mut out = String::from(
        "bench,selection,freq_mhz,safe_floor_mv,crash_ceiling_mv,safe_depth_mv,safe_depth_pct,unsafe_width_mv,safe_gain_pct,ceiling_gain_pct\n",
    );
    for row in rows {
        let gains = power_gain_report(row, nominal_mv);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.4},{},{:.4},{}",
            row.benchmark,
            row.selection,
            row.freq_mhz,
            opt(row.safe_floor_mv),
            opt(row.crash_ceiling_mv),
            row.safe_depth_mv,
            row.safe_depth_pct,
            row.unsafe_width_mv,
            gains.gain_pct,
            gains
                .ceiling_gain_pct
                .map_or_else(|| "-".to_string(), |g| format!("{g:.4}"))
        );
    }
    out
}

fn region_fill(region: Region) -> &'static str {
    match region {
        Region::Safe => "#4caf50",
        Region::Unsafe => "#ffc107",
        Region::Crash => "#9e9e9e",
    }
}

/// Grayscale fill, strictly darker for higher severity (monotone in
/// `severity / max_severity`).
fn severity_fill(severity: f64, max_severity: f64) -> String {
    let norm = if max_severity > 0.0 {
        (severity / max_severity).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let level = 255 - (215.0 * norm).round() as u32;
    format!("#{level:02x}{level:02x}{level:02x}")
}

fn svg_header(width: u32, height: u32, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         font-family=\"sans-serif\" font-size=\"11\">\n<title>{title}</title>\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    )
}

fn grid_frame(voltages: &[u32], row_labels: &[String], out: &mut String) {
    for (i, v) in voltages.iter().enumerate() {
        let x = MARGIN_LEFT + i as u32 * CELL_W;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-60 {} {})\">{v}</text>",
            x + CELL_W / 2,
            MARGIN_TOP - 6,
            x + CELL_W / 2,
            MARGIN_TOP - 6
        );
    }
    for (j, label) in row_labels.iter().enumerate() {
        let y = MARGIN_TOP + j as u32 * CELL_H;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{label}</text>",
            MARGIN_LEFT - 6,
            y + CELL_H - 6
        );
    }
}

/// Region chart for one benchmark: one row per characterized selection
/// (and frequency), one column per grid voltage, colored by region.
pub fn region_chart_svg(benchmark: &str, rows: &[&RegionRow]) -> String {
    let mut voltages: Vec<u32> = rows
        .iter()
        .flat_map(|r| r.per_voltage.iter().map(|(v, _)| *v))
        .collect();
    voltages.sort_unstable_by(|a, b| b.cmp(a));
    voltages.dedup();
    let row_labels: Vec<String> = rows
        .iter()
        .map(|r| format!("{}@{}MHz", r.selection, r.freq_mhz))
        .collect();
    let width = MARGIN_LEFT + voltages.len() as u32 * CELL_W + 20;
    let height = MARGIN_TOP + rows.len() as u32 * CELL_H + 50;
    let mut out = svg_header(width, height, &format!("{benchmark}: operating regions (mV)"));
    grid_frame(&voltages, &row_labels, &mut out);
    for (j, row) in rows.iter().enumerate() {
        for (v, region) in &row.per_voltage {
            let i = voltages.iter().position(|x| x == v).expect("voltage in union");
            let x = MARGIN_LEFT + i as u32 * CELL_W;
            let y = MARGIN_TOP + j as u32 * CELL_H;
            let _ = writeln!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{CELL_H}\" \
                 fill=\"{}\" stroke=\"white\" data-region=\"{}\"/>",
                region_fill(*region),
                region.name()
            );
        }
    }
    // legend
    let ly = MARGIN_TOP + rows.len() as u32 * CELL_H + 16;
    for (i, region) in [Region::Safe, Region::Unsafe, Region::Crash].iter().enumerate() {
        let x = MARGIN_LEFT + i as u32 * 90;
        let _ = writeln!(
            out,
            "<rect x=\"{x}\" y=\"{ly}\" width=\"14\" height=\"14\" fill=\"{}\"/>\
             <text x=\"{}\" y=\"{}\">{}</text>",
            region_fill(*region),
            x + 18,
            ly + 11,
            region.name()
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Severity heatmap for one benchmark: same grid as the region chart,
/// shaded darker as severity grows.
pub fn severity_heatmap_svg(benchmark: &str, aggregates: &[&VoltageLevelAggregate]) -> String {
    let mut voltages: Vec<u32> = aggregates.iter().map(|a| a.key.voltage_mv).collect();
    voltages.sort_unstable_by(|a, b| b.cmp(a));
    voltages.dedup();
    let mut row_keys: Vec<(String, u32)> = aggregates
        .iter()
        .map(|a| (a.key.selection.clone(), a.key.freq_mhz))
        .collect();
    row_keys.sort();
    row_keys.dedup();
    let row_labels: Vec<String> = row_keys
        .iter()
        .map(|(s, f)| format!("{s}@{f}MHz"))
        .collect();
    let max_severity = aggregates
        .iter()
        .map(|a| a.severity)
        .fold(0.0f64, f64::max);
    let width = MARGIN_LEFT + voltages.len() as u32 * CELL_W + 20;
    let height = MARGIN_TOP + row_keys.len() as u32 * CELL_H + 50;
    let mut out = svg_header(width, height, &format!("{benchmark}: severity per voltage level"));
    grid_frame(&voltages, &row_labels, &mut out);
    for a in aggregates {
        let i = voltages.iter().position(|v| *v == a.key.voltage_mv).expect("voltage");
        let j = row_keys
            .iter()
            .position(|(s, f)| *s == a.key.selection && *f == a.key.freq_mhz)
            .expect("row");
        let x = MARGIN_LEFT + i as u32 * CELL_W;
        let y = MARGIN_TOP + j as u32 * CELL_H;
        let _ = writeln!(
            out,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{CELL_H}\" \
             fill=\"{}\" stroke=\"white\" data-severity=\"{}\"/>",
            severity_fill(a.severity, max_severity),
            a.severity
        );
    }
    let ly = MARGIN_TOP + row_keys.len() as u32 * CELL_H + 16;
    let _ = writeln!(
        out,
        "<text x=\"{MARGIN_LEFT}\" y=\"{}\">lighter = lower severity, darker = higher (max {max_severity})</text>",
        ly + 11
    );
    out.push_str("</svg>\n");
    out
}

/// Writes the full report set into `out_dir` and returns the written
/// paths: the three CSVs always, plus a region chart and severity
/// heatmap per benchmark when there is data.
pub fn emit_reports(
    runs: &[ParsedRun],
    aggregates: &[VoltageLevelAggregate],
    rows: &[RegionRow],
    out_dir: &Path,
    nominal_mv: u32,
) -> Result<Vec<PathBuf>, AnalysisError> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    for (name, contents) in [
        ("runs.csv", runs_csv(runs)),
        ("severity.csv", severity_csv(aggregates)),
        ("regions.csv", regions_csv(rows, nominal_mv)),
    ] {
        let path = out_dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
    }

    let mut rows_by_bench: BTreeMap<&str, Vec<&RegionRow>> = BTreeMap::new();
    for row in rows {
        rows_by_bench.entry(&row.benchmark).or_default().push(row);
    }
    for (bench, bench_rows) in &rows_by_bench {
        let path = out_dir.join(format!("{bench}-regions.svg"));
        write_file(&path, &region_chart_svg(bench, bench_rows))?;
        written.push(path);
    }

    let mut aggs_by_bench: BTreeMap<&str, Vec<&VoltageLevelAggregate>> = BTreeMap::new();
    for a in aggregates {
        aggs_by_bench.entry(&a.key.benchmark).or_default().push(a);
    }
    for (bench, bench_aggs) in &aggs_by_bench {
        let path = out_dir.join(format!("{bench}-severity.svg"));
        write_file(&path, &severity_heatmap_svg(bench, bench_aggs))?;
        written.push(path);
    }

    let warnings: Vec<&String> = rows.iter().flat_map(|r| r.warnings.iter()).collect();
    if !warnings.is_empty() {
        let path = out_dir.join("warnings.txt");
        let text: String = warnings.iter().map(|w| format!("{w}\n")).collect();
        write_file(&path, &text)?;
        written.push(path);
    }

    Ok(written)
}
