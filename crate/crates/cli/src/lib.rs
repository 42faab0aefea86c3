//! Batch front end: configuration, scan dispatch and report files.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod svg;

use std::path::{Path, PathBuf};

use equibif_core::report::BifurcationReport;

pub use config::{diagnose, parse_config, validate, Diagnostic, ScanConfig};
pub use error::CliError;
pub use run::{run_scan, Overrides};

pub fn read_config(path: &Path) -> Result<ScanConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text).map_err(CliError::Config)
}

/// Runs a scan and writes its files; returns the report and the paths.
pub fn scan_and_write(cfg: &ScanConfig) -> Result<(BifurcationReport, Vec<PathBuf>), CliError> {
    let report = run_scan(cfg)?;
    let written = output::write_outputs(cfg, &report)?;
    Ok((report, written))
}

fn snake<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// One line per instant, for the terminal.
pub fn summary(report: &BifurcationReport) -> Vec<String> {
    if report.instants.is_empty() {
        return vec![format!(
            "{}: no instants in [{}, {}]",
            report.family, report.interval[0], report.interval[1]
        )];
    }
    report
        .instants
        .iter()
        .map(|i| {
            let mut line = format!(
                "{} {} = {:.10}: fired {} ({})",
                report.family,
                report.parameter,
                i.parameter,
                snake(&i.verdict.fired),
                i.source
            );
            if !i.verdict.gate_failures.is_empty() {
                let gates: Vec<String> = i.verdict.gate_failures.iter().map(snake).collect();
                line.push_str(&format!(", gates failed: {}", gates.join(", ")));
            }
            line
        })
        .collect()
}
