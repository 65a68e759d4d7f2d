//! CSV ingestion. Header `time,status,group` (any column order), status 1
//! for an observed event and 0 for censoring.

use std::io::Read;
use std::path::Path;

use mdir_core::{ingest, RawRecord, TwoSampleData};

use crate::error::CliError;

pub fn read_records<R: Read>(source: R) -> Result<Vec<RawRecord>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("line 1: {e}")))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                CliError::Data(format!(
                    "line 1: missing column '{name}' (expected header time,status,group)"
                ))
            })
    };
    let (ti, si, gi) = (col("time")?, col("status")?, col("group")?);

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let time: f64 = field(ti)
            .parse()
            .map_err(|_| CliError::Data(format!("line {line}: time '{}' is not a number", field(ti))))?;
        let status: i64 = field(si)
            .parse()
            .map_err(|_| CliError::Data(format!("line {line}: BadStatus: '{}' is not 0 or 1", field(si))))?;
        out.push(RawRecord::new(time, status, field(gi)));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<TwoSampleData, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let records = read_records(file)?;
    Ok(ingest(records)?)
}
