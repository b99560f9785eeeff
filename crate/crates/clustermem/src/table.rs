//! CSV emission and read-back. Numbers use Rust's shortest round-trip decimal
//! form, `,` separators and `\n` line endings; the header row is always present.

use std::io::{Read, Write};

use clustermem_core::protocol::Stage;

use crate::error::CliError;
use crate::sweep::{SweepRecord, COEFFICIENT_SERIES, VARIANCE_SERIES};

pub const COEFFICIENT_HEADER: [&str; 4] = ["kappa", "C1", "C2", "C3"];
pub const VARIANCE_HEADER: [&str; 6] = ["r", "stage", "V1", "V2", "V3", "V4"];

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io("<csv stream>", io),
        other => CliError::Config(format!("csv: {other:?}")),
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_coefficients<W: Write>(records: &[SweepRecord], out: W) -> Result<(), CliError> {
    let mut w = writer(out);
    w.write_record(COEFFICIENT_HEADER).map_err(csv_err)?;
    for r in records {
        let mut row = vec![num(r.abscissa)];
        for s in COEFFICIENT_SERIES {
            row.push(num(r.get(s).ok_or_else(|| CliError::Usage(format!("record lacks {s}")))?));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("<csv stream>", e))
}

pub fn write_variances<W: Write>(records: &[SweepRecord], out: W) -> Result<(), CliError> {
    let mut w = writer(out);
    w.write_record(VARIANCE_HEADER).map_err(csv_err)?;
    for r in records {
        let stage = r.stage.ok_or_else(|| CliError::Usage("variance record lacks a stage".into()))?;
        let mut row = vec![num(r.abscissa), stage.name().to_string()];
        for s in VARIANCE_SERIES {
            row.push(num(r.get(s).ok_or_else(|| CliError::Usage(format!("record lacks {s}")))?));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("<csv stream>", e))
}

fn parse_stage(s: &str) -> Result<Stage, CliError> {
    Stage::ALL
        .into_iter()
        .find(|st| st.name() == s)
        .ok_or_else(|| CliError::Config(format!("unknown stage `{s}`")))
}

fn read_records<R: Read>(input: R, header: &[&str], with_stage: bool, series: &[&str]) -> Result<Vec<SweepRecord>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    let got: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if got != header {
        return Err(CliError::Config(format!("unexpected CSV header {got:?}")));
    }
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| CliError::Config(format!("bad number `{s}`: {e}")))
    };
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let offset = if with_stage { 2 } else { 1 };
        let stage = if with_stage { Some(parse_stage(&row[1])?) } else { None };
        let values = series
            .iter()
            .enumerate()
            .map(|(i, s)| Ok((s.to_string(), parse(&row[offset + i])?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        out.push(SweepRecord {
            abscissa: parse(&row[0])?,
            stage,
            series: values,
        });
    }
    Ok(out)
}

pub fn read_coefficients<R: Read>(input: R) -> Result<Vec<SweepRecord>, CliError> {
    read_records(input, &COEFFICIENT_HEADER, false, &COEFFICIENT_SERIES)
}

pub fn read_variances<R: Read>(input: R) -> Result<Vec<SweepRecord>, CliError> {
    read_records(input, &VARIANCE_HEADER, true, &VARIANCE_SERIES)
}
