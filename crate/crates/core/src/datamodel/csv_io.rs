//! Wide panel CSV: `unit_id,group,x1,...,xq,y_tm{T-1},...,y_t0,y_t1,...,y_tT`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{ExposureGroup, PanelDataset, UnitRecord};
use crate::error::{Error, Result};

/// Column name of the outcome at time `t`.
pub(crate) fn outcome_column(t: i32) -> String {
    if t < 0 {
        format!("y_tm{}", -t)
    } else {
        format!("y_t{t}")
    }
}

fn parse_outcome_column(name: &str) -> Option<i32> {
    if let Some(k) = name.strip_prefix("y_tm") {
        let k: i32 = k.parse().ok()?;
        (k > 0).then_some(-k)
    } else {
        name.strip_prefix("y_t")?.parse().ok()
    }
}

pub fn read_panel_csv(path: impl AsRef<Path>) -> Result<PanelDataset> {
    read_panel_csv_from(File::open(path)?)
}

pub fn read_panel_csv_from(reader: impl Read) -> Result<PanelDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let header_err = |column: &str, message: String| Error::Data {
        row: 1,
        column: column.to_string(),
        message,
    };
    if header.get(0) != Some("unit_id") {
        return Err(header_err(
            header.get(0).unwrap_or(""),
            "first column must be unit_id".into(),
        ));
    }
    if header.get(1) != Some("group") {
        return Err(header_err(
            header.get(1).unwrap_or(""),
            "second column must be group".into(),
        ));
    }

    let mut q = 0usize;
    let mut time_points = Vec::new();
    for name in header.iter().skip(2) {
        if let Some(t) = parse_outcome_column(name) {
            time_points.push(t);
        } else if time_points.is_empty() && name == format!("x{}", q + 1) {
            q += 1;
        } else {
            return Err(header_err(
                name,
                format!("expected x{} or an outcome column y_t*/y_tm*", q + 1),
            ));
        }
    }
    if time_points.is_empty() {
        return Err(header_err("", "no outcome columns".into()));
    }

    let mut units = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(i + 2, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(Error::Data {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let group: ExposureGroup = record[1].parse().map_err(|message| Error::Data {
            row,
            column: "group".into(),
            message,
        })?;
        let mut values = Vec::with_capacity(record.len() - 2);
        for (name, field) in header.iter().zip(record.iter()).skip(2) {
            let v: f64 = field.parse().map_err(|_| Error::Data {
                row,
                column: name.to_string(),
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Data {
                    row,
                    column: name.to_string(),
                    message: "missing or non-finite value".into(),
                });
            }
            values.push(v);
        }
        let outcomes = values.split_off(q);
        units.push(UnitRecord {
            id: record[0].to_string(),
            group,
            covariates: values,
            outcomes,
        });
    }
    PanelDataset::new(units, time_points)
}

pub fn write_panel_csv(d: &PanelDataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_panel_csv_to(d, std::io::BufWriter::new(file))
}

/// Numbers are written in shortest round-trip form so reading the file back
/// yields bit-identical values.
pub fn write_panel_csv_to(d: &PanelDataset, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["unit_id".to_string(), "group".to_string()];
    header.extend((1..=d.n_covariates()).map(|j| format!("x{j}")));
    header.extend(d.time_points().iter().map(|&t| outcome_column(t)));
    wtr.write_record(&header)?;
    for unit in d.units() {
        let mut fields = Vec::with_capacity(header.len());
        fields.push(unit.id.clone());
        fields.push(unit.group.code().to_string());
        fields.extend(unit.covariates.iter().map(|v| v.to_string()));
        fields.extend(unit.outcomes.iter().map(|v| v.to_string()));
        wtr.write_record(&fields)?;
    }
    wtr.flush()?;
    Ok(())
}
