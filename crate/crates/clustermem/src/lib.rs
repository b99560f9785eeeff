//! Command-line companion to `clustermem-core`: JSON configs, CSV sweeps,
//! SVG plots, the protocol report and the `verify` suite.

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod sweep;
pub mod table;
pub mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clustermem_core::Stage;

pub use error::CliError;
use plot::{Panel, Series};
use report::ProtocolReport;
use sweep::{SweepRecord, SweepSpec};
use verify::{VerifyOptions, VerifyReport};

/// Relative tolerance for protocol stages against their closed forms.
pub const PROTOCOL_TOL: f64 = 1e-12;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

pub(crate) fn series_of(records: &[SweepRecord], names: &[&str], stage: Option<Stage>) -> Vec<Series> {
    names
        .iter()
        .map(|name| Series {
            name: match stage {
                Some(s) => format!("{name} {}", s.name()),
                None => name.to_string(),
            },
            points: records
                .iter()
                .filter(|r| r.stage == stage)
                .filter_map(|r| r.get(name).map(|v| (r.abscissa, v)))
                .collect(),
        })
        .collect()
}

pub fn cmd_verify(opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let report = verify::run_verify(opts);
    match report.failures().count() {
        0 => Ok(report),
        n => {
            print!("{}", report.render());
            Err(CliError::CheckFailure(n))
        }
    }
}

pub fn cmd_sweep_coefficients(spec: &SweepSpec, out: &Path, svg: Option<&Path>) -> Result<Vec<SweepRecord>, CliError> {
    let records = sweep::coefficient_sweep(spec)?;
    let mut w = create(out)?;
    table::write_coefficients(&records, &mut w)?;
    w.flush().map_err(|e| CliError::io(out, e))?;
    if let Some(svg) = svg {
        let panel = Panel {
            title: "memory channel coefficients".into(),
            x_label: "kappa".into(),
            y_label: "coefficient".into(),
            series: series_of(&records, &sweep::COEFFICIENT_SERIES, None),
        };
        write_text(svg, &plot::render(&[panel]))?;
    }
    Ok(records)
}

/// CSV path for the `index`-th κ of a multi-κ sweep: `out` itself for the
/// first, `<stem>.kappa-<κ>.<ext>` next to it for the rest.
pub fn variance_csv_path(out: &Path, kappa: f64, index: usize) -> PathBuf {
    if index == 0 {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.kappa-{kappa}.{}", ext.to_string_lossy()),
        None => format!("{stem}.kappa-{kappa}"),
    };
    out.with_file_name(name)
}

/// Runs one r sweep per spec. Returns the CSV paths written, in spec order.
pub fn cmd_sweep_variances(specs: &[SweepSpec], out: &Path, svg: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    if specs.is_empty() {
        return Err(CliError::Usage("no coupling strength given".into()));
    }
    let mut paths = Vec::new();
    let mut panels = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let kappa = spec.fixed.get("kappa").copied().unwrap_or(f64::NAN);
        let records = sweep::variance_sweep(spec)?;
        let path = variance_csv_path(out, kappa, i);
        let mut w = create(&path)?;
        table::write_variances(&records, &mut w)?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        paths.push(path);
        let series = Stage::ALL
            .iter()
            .flat_map(|&st| series_of(&records, &sweep::VARIANCE_SERIES, Some(st)))
            .collect();
        panels.push(Panel {
            title: format!("nullifier variances, kappa = {kappa}"),
            x_label: "r".into(),
            y_label: "variance".into(),
            series,
        });
    }
    if let Some(svg) = svg {
        write_text(svg, &plot::render(&panels))?;
    }
    Ok(paths)
}

/// Runs the protocol from a JSON config and writes the JSON report to `out`
/// (stdout when `None`). Fails with a check failure when a stage drifts from
/// its closed form.
pub fn cmd_protocol(config: &Path, out: Option<&Path>) -> Result<ProtocolReport, CliError> {
    let cfg = config::load_protocol_config(config)?;
    let report = report::protocol_report(&cfg)?;
    let json = serde_json::to_string_pretty(&report).expect("report is plain data") + "\n";
    match out {
        Some(path) => write_text(path, &json)?,
        None => print!("{json}"),
    }
    let bad = report
        .stages
        .iter()
        .flat_map(|s| s.variances.iter().zip(&s.closed_form))
        .filter(|(v, c)| (*v - *c).abs() > PROTOCOL_TOL * c.abs().max(1.0))
        .count();
    if bad > 0 {
        return Err(CliError::CheckFailure(bad));
    }
    Ok(report)
}
