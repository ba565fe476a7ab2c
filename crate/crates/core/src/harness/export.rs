//! CSV output: UTF-8, LF line ends, header first, floats in shortest
//! round-trip form.

use std::fs::File;
use std::path::Path;

use super::maps::ComplianceMap;
use super::sweep::SweepTable;
use crate::error::{Error, Result};

pub const SWEEP_HEADER: [&str; 8] = [
    "swept_value_m",
    "cop_m",
    "ankle_comp_rad",
    "F1_N",
    "F2_N",
    "F3_N",
    "T_N",
    "admissible",
];

pub const COMPLIANCE_HEADER: [&str; 4] = ["e_bar", "e0", "load_kg", "compliance_m_per_N"];

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `header` and `records` to `path`.
pub fn write_csv<I>(path: &Path, header: &[&str], records: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for rec in records {
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sweep_records(table: &SweepTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            let mut rec: Vec<String> = [r.swept_value, r.cop, r.ankle_compensation]
                .into_iter()
                .chain(r.forces)
                .chain([r.tension])
                .map(format_float)
                .collect();
            rec.push(r.admissible.to_string());
            rec
        })
        .collect()
}

pub fn compliance_records(map: &ComplianceMap) -> Vec<Vec<String>> {
    map.records()
        .map(|(eb, e0, kg, c)| {
            vec![
                format_float(eb),
                format_float(e0),
                format_float(kg),
                format_float(c.unwrap_or(f64::NAN)),
            ]
        })
        .collect()
}

pub fn export_sweep(table: &SweepTable, path: &Path) -> Result<()> {
    write_csv(path, &SWEEP_HEADER, sweep_records(table))
}

pub fn export_compliance_map(map: &ComplianceMap, path: &Path) -> Result<()> {
    write_csv(path, &COMPLIANCE_HEADER, compliance_records(map))
}

/// Reads a numeric CSV back; `true`/`false` map to 1/0.
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = rec
            .iter()
            .map(|field| match field {
                "true" => Ok(1.0),
                "false" => Ok(0.0),
                other => other
                    .parse::<f64>()
                    .map_err(|_| Error::invalid("csv field", format!("not a number: {other:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
