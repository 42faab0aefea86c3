//! Report persistence. Every file is written to a temporary sibling and
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use equibif_core::report::{BifurcationReport, SCHEMA_VERSION};
use serde::Serialize;

use crate::config::{Format, ScanConfig};
use crate::error::CliError;
use crate::svg;

pub const TOOL_NAME: &str = "equibif";

#[derive(Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

/// Top-level layout of `report.json`.
#[derive(Debug, Serialize)]
pub struct ReportFile<'a> {
    pub schema_version: u32,
    pub tool: Tool,
    pub config: &'a ScanConfig,
    pub report: &'a BifurcationReport,
}

pub fn report_json(cfg: &ScanConfig, report: &BifurcationReport) -> Result<String, CliError> {
    let file = ReportFile {
        schema_version: SCHEMA_VERSION,
        tool: Tool {
            name: TOOL_NAME,
            version: env!("CARGO_PKG_VERSION"),
        },
        config: cfg,
        report,
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Serialize(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Mode labels in order of first appearance over the samples.
pub fn mode_columns(report: &BifurcationReport) -> (Vec<String>, Vec<String>) {
    let mut modes: Vec<String> = Vec::new();
    let mut conj: Vec<String> = Vec::new();
    for s in &report.samples {
        for m in &s.modes {
            if !modes.contains(&m.mode) {
                modes.push(m.mode.clone());
            }
            if m.conjugate_value.is_some() && !conj.contains(&m.mode) {
                conj.push(m.mode.clone());
            }
        }
    }
    conj.sort_by_key(|c| modes.iter().position(|m| m == c));
    (modes, conj)
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn table_csv(report: &BifurcationReport) -> Result<String, CliError> {
    let (modes, conj) = mode_columns(report);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "parameter",
        "mean_curvature",
        "mean_curvature_derivative",
        "morse_index",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(modes.iter().map(|m| format!("neg_{m}")));
    header.extend(conj.iter().map(|m| format!("conj_{m}")));
    let err = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(&header).map_err(err)?;
    for s in &report.samples {
        let find = |label: &String| s.modes.iter().find(|m| &m.mode == label);
        let mut row = vec![
            s.parameter.to_string(),
            cell(s.mean_curvature),
            cell(s.mean_curvature_derivative),
            cell(s.morse_index),
        ];
        row.extend(modes.iter().map(|m| cell(find(m).map(|m| m.negative_count))));
        row.extend(conj.iter().map(|m| cell(find(m).and_then(|m| m.conjugate_value))));
        w.write_record(&row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

/// Writes the requested formats into `cfg.output.dir` and returns the
/// paths in the order written.
pub fn write_outputs(cfg: &ScanConfig, report: &BifurcationReport) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut formats = cfg.output.formats.clone();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<(), CliError> {
        let path = dir.join(name);
        write_atomic(&path, &text)?;
        written.push(path);
        Ok(())
    };
    for f in formats {
        match f {
            Format::Json => put("report.json", report_json(cfg, report)?)?,
            Format::Csv => put("table.csv", table_csv(report)?)?,
            Format::Svg => {
                put("plot-index.svg", svg::index_plot(report))?;
                if let Some(text) = svg::conjugate_plot(report) {
                    put("plot-conjugate.svg", text)?;
                }
            }
        }
    }
    Ok(written)
}
